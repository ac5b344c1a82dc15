#include "tvu/runner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvu/dataset.hpp"
#include "tvu/geometry.hpp"
#include "tvu/jl.hpp"
#include "tvu/solvers.hpp"
#include "tvu/stream.hpp"

namespace tvu {
namespace {

Vec default_w0(std::size_t d) {
  Vec w(d);
  for (std::size_t i = 0; i < d; ++i) w[i] = 0.1 * static_cast<double>(i + 1);
  return w;
}

QuerySpec identity_spec(double sensitivity) {
  QuerySpec s;
  s.name = "identity";
  s.sensitivity = sensitivity;
  s.p = [](const ModelHist&, const Vec& z, std::size_t) { return z; };
  return s;
}

UpdateRule running_mean_rule(std::size_t d) {
  UpdateRule r;
  r.name = "running-mean";
  r.w0 = zeros(d);
  r.update = [](const ModelHist&, const Vec& resp, std::size_t t) {
    return scaled(resp, 1.0 / static_cast<double>(t));
  };
  return r;
}

QuerySpec quad_grad_spec(double sensitivity) {
  QuerySpec s;
  s.name = "quad-grad";
  s.sensitivity = sensitivity;
  s.p = [](const ModelHist& hist, const Vec& z, std::size_t) {
    return sub(hist.back(), z);
  };
  return s;
}

UpdateRule affine_rule(Vec w0, double lr) {
  UpdateRule r;
  r.name = "affine";
  r.w0 = w0;
  r.update = [w0, lr](const ModelHist&, const Vec& resp, std::size_t) {
    Vec w = w0;
    axpy_in(w, -lr, resp);
    return w;
  };
  return r;
}

// The fixed instance behind both coupling certificates: four well-spread
// points whose pairwise distances stay below the declared sensitivity 2.
std::vector<Vec> certificate_points() {
  return {{0.9, -0.3}, {-0.7, 0.5}, {0.2, 0.8}, {-0.4, -0.6}};
}

}  // namespace

ProblemBundle make_problem(const Config& cfg) {
  const std::string name = cfg.get_str("problem", "sphere-mean");
  const auto d = static_cast<std::size_t>(cfg.get_int("d", 2));
  const auto n = static_cast<std::size_t>(cfg.get_int("n", 64));
  const double rho = cfg.get_num("rho", 0.1);

  ProblemBundle b;
  if (name == "sphere-mean") {
    b.spec = identity_spec(cfg.get_num("sensitivity", 2.0));
    b.rule = running_mean_rule(d);
    return b;
  }
  if (name == "quad-grad") {
    b.spec = quad_grad_spec(cfg.get_num("sensitivity", 2.0));
    b.rule = affine_rule(default_w0(d), cfg.get_num("lr", 0.25));
    return b;
  }

  const double radius = cfg.get_num("radius", 1.0);
  ConvexBody body = ball_body(zeros(d), radius);
  if (name == "glm-logistic-vrfw") {
    b.loss = logistic_loss(cfg.get_num("x_bound", 1.0));
  } else if (name == "quad-vrfw") {
    b.loss = clipped_quadratic(cfg.get_num("clip", 1.0));
  } else if (name == "glm-logistic-da") {
    b.loss = logistic_loss(cfg.get_num("x_bound", 1.0));
  } else if (name == "glm-hinge-da") {
    b.loss = hinge_loss(cfg.get_num("x_bound", 1.0));
  } else {
    throw std::invalid_argument("unknown problem: " + name);
  }

  if (name == "glm-logistic-vrfw" || name == "quad-vrfw") {
    b.spec = vrfw_spec(*b.loss, body);
    b.rule = vrfw_rule(body);
  } else {
    const double eta =
        da_step_size(body.diameter, d, n, rho, b.loss->lipschitz);
    b.spec = da_spec(*b.loss);
    b.rule = da_rule(body, eta);
  }
  return b;
}

std::vector<Vec> make_dataset(const Config& cfg, Rng& rng) {
  const std::string source = cfg.get_str("source", "sphere");
  const auto n = static_cast<std::size_t>(cfg.get_int("n", 64));
  const auto d = static_cast<std::size_t>(cfg.get_int("d", 2));
  if (source == "sphere") return synth_sphere(n, d, rng);
  if (source == "glm") {
    return synth_glm(n, d, cfg.get_num("margin", 0.05),
                     cfg.get_num("label_noise", 0.1), rng)
        .rows;
  }
  if (source == "blobs") {
    return synth_blobs(n, static_cast<std::size_t>(cfg.get_int("k", 3)), d,
                       cfg.get_num("center_spread", 4.0),
                       cfg.get_num("stddev", 0.5), rng)
        .points;
  }
  if (source == "csv") return read_csv(cfg.require_str("path")).rows;
  throw std::invalid_argument("unknown source: " + source);
}

bool SuiteResult::pass(double alpha_total) const {
  if (tests == 0) return false;
  return min_p >= alpha_total / static_cast<double>(tests);
}

SuiteResult compare_samples(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  const std::size_t d = a[0].size();
  SuiteResult out;
  out.tests = 2 * d;
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> xa(a.size()), xb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) xa[i] = a[i][c];
    for (std::size_t i = 0; i < b.size(); ++i) xb[i] = b[i][c];
    out.ks_p.push_back(ks_two_sample(xa, xb).p_value);
    const double va = variance_of(xa), vb = variance_of(xb);
    double zp;
    if (va == 0.0 && vb == 0.0) {
      zp = mean_of(xa) == mean_of(xb) ? 1.0 : 0.0;
    } else {
      zp = z_test_two_sample(xa, xb);
    }
    out.z_p.push_back(zp);
    out.min_p = std::min({out.min_p, out.ks_p.back(), out.z_p.back()});
  }
  return out;
}

CouplingCertificate verify_coupling_tree(std::size_t trials, double sigma,
                                         std::uint64_t seed, double alpha) {
  const std::vector<Vec> full = certificate_points();
  const std::vector<Vec> reduced = {full[0], full[2], full[3]};  // row 1 removed
  const QuerySpec spec = quad_grad_spec(2.0);
  const UpdateRule rule = affine_rule({0.1, 0.2}, 0.3);
  const LearnOptions opts{sigma, true};

  CouplingCertificate cert;
  cert.alpha = alpha;
  cert.trials = trials;
  std::vector<Vec> unlearned, retrained, mutated;
  unlearned.reserve(trials);
  retrained.reserve(trials);
  mutated.reserve(trials);

  for (std::size_t i = 0; i < trials; ++i) {
    {
      Rng rng = Rng::derive(seed, 3 * i);
      LearnState st = tree_learn(full, spec, rule, 1.0, rng, opts);
      const std::size_t pos = position_of_row(st, 1);
      const UnlearnReport rep = tree_unlearn(st, pos, rng);
      if (rep.retrained) ++cert.retrain_events;
      unlearned.push_back(model_of(st));
    }
    {
      Rng rng = Rng::derive(seed, 3 * i + 1);
      LearnState st = tree_learn(reduced, spec, rule, 1.0, rng, opts);
      retrained.push_back(model_of(st));
    }
    {
      Rng rng = Rng::derive(seed, 3 * i + 2);
      LearnState st = tree_learn(full, spec, rule, 1.0, rng, opts);
      const std::size_t pos = position_of_row(st, 1);
      tree_unlearn(st, pos, rng, CouplingVariant::inverted);
      mutated.push_back(model_of(st));
    }
  }

  cert.standard = compare_samples(unlearned, retrained);
  cert.mutated = compare_samples(mutated, retrained);
  cert.standard_pass = cert.standard.pass(alpha);
  cert.mutation_detected = !cert.mutated.pass(alpha);
  cert.pass = cert.standard_pass && cert.mutation_detected;
  return cert;
}

CouplingCertificate verify_coupling_linear(std::size_t trials, double sigma,
                                           std::uint64_t seed, double alpha) {
  const std::vector<Vec> full = certificate_points();
  const std::vector<Vec> reduced = {full[0], full[2], full[3]};
  const std::size_t T = 6;

  LinearQuerySpec spec;
  spec.name = "affine-mean";
  spec.sensitivity = 2.0;
  spec.per_point = [](const ModelHist& hist, const Vec& z, std::size_t) {
    Vec v = z;
    axpy_in(v, -0.25, hist.back());
    return v;
  };
  const UpdateRule rule = affine_rule({0.1, 0.2}, 0.3);

  CouplingCertificate cert;
  cert.alpha = alpha;
  cert.trials = trials;
  std::vector<Vec> unlearned, retrained, mutated;
  unlearned.reserve(trials);
  retrained.reserve(trials);
  mutated.reserve(trials);

  for (std::size_t i = 0; i < trials; ++i) {
    {
      Rng rng = Rng::derive(seed, 3 * i);
      LinLearnState st = linear_learn(full, spec, rule, T, 1.0, rng, sigma);
      const LinearUnlearnReport rep = linear_unlearn(st, 2, rng);
      if (rep.retrained) ++cert.retrain_events;
      unlearned.push_back(linear_model_of(st));
    }
    {
      Rng rng = Rng::derive(seed, 3 * i + 1);
      LinLearnState st = linear_learn(reduced, spec, rule, T, 1.0, rng, sigma);
      retrained.push_back(linear_model_of(st));
    }
    {
      Rng rng = Rng::derive(seed, 3 * i + 2);
      LinLearnState st = linear_learn(full, spec, rule, T, 1.0, rng, sigma);
      linear_unlearn(st, 2, rng, CouplingVariant::inverted);
      mutated.push_back(linear_model_of(st));
    }
  }

  cert.standard = compare_samples(unlearned, retrained);
  cert.mutated = compare_samples(mutated, retrained);
  cert.standard_pass = cert.standard.pass(alpha);
  cert.mutation_detected = !cert.mutated.pass(alpha);
  cert.pass = cert.standard_pass && cert.mutation_detected;
  return cert;
}

SuiteResult weak_stream_certificate(std::size_t trials, double rho,
                                    std::uint64_t seed) {
  const std::vector<Vec> initial = {{0.8}, {-0.5}, {0.3}, {-0.9}};
  const std::vector<StreamRequest> script = parse_stream_script(
      "I 0.6\nD 2\nI -0.4\nD 4\nI 0.2\nD 1\n");
  const QuerySpec spec = identity_spec(2.0);
  const UpdateRule rule = running_mean_rule(1);

  // Weak-mode bookkeeping is deterministic: replay it once to get the final
  // sequence the fresh-run arm learns on.
  std::vector<Vec> final_seq = initial;
  for (const auto& req : script) {
    if (req.kind == StreamRequest::Kind::insert) {
      final_seq.push_back(req.point);
    } else {
      final_seq[req.position - 1] = final_seq.back();
      final_seq.pop_back();
    }
  }

  std::vector<Vec> streamed, fresh;
  streamed.reserve(trials);
  fresh.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    {
      Rng rng = Rng::derive(seed, 2 * i);
      StreamEngine eng(StreamMode::weak, initial, spec, rule, rho, rng);
      for (const auto& req : script) eng.step(req, rng);
      streamed.push_back(eng.model());
    }
    {
      Rng rng = Rng::derive(seed, 2 * i + 1);
      StreamEngine eng(StreamMode::weak, final_seq, spec, rule, rho, rng);
      fresh.push_back(eng.model());
    }
  }
  return compare_samples(streamed, fresh);
}

UnlearnBenchRow run_unlearn_experiment(std::size_t n, double rho,
                                       std::size_t trials,
                                       std::size_t relearn_every,
                                       std::uint64_t seed) {
  if (relearn_every == 0) relearn_every = 1;
  const QuerySpec spec = identity_spec(2.0);
  const UpdateRule rule = running_mean_rule(2);

  UnlearnBenchRow row;
  row.n = n;
  row.rho = rho;
  row.trials = trials;

  std::optional<LearnState> base;
  double total_queries = 0.0, total_accepted = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    if (i % relearn_every == 0) {
      Rng rng = Rng::derive(seed, 700000 + i);
      base = tree_learn(synth_sphere(n, 2, rng), spec, rule, rho, rng);
    }
    Rng rng = Rng::derive(seed, i);
    LearnState st = *base;
    const std::size_t j = 1 + rng.integer(n);
    const UnlearnReport rep = tree_unlearn(st, j, rng);
    if (rep.retrained) ++row.retrains;
    total_queries += static_cast<double>(rep.queries_made);
    total_accepted += static_cast<double>(rep.accepted_nodes);
  }
  row.retrain_fraction = static_cast<double>(row.retrains) / static_cast<double>(trials);
  row.mean_unlearn_queries = total_queries / static_cast<double>(trials);
  row.mean_accepted_nodes = total_accepted / static_cast<double>(trials);
  row.relative_complexity = row.mean_unlearn_queries / static_cast<double>(n);
  return row;
}

StreamBenchResult run_weak_stream_bench(std::size_t streams, std::size_t n0,
                                        std::size_t inserts, std::size_t deletes,
                                        double rho, std::uint64_t seed) {
  const QuerySpec spec = identity_spec(2.0);
  const UpdateRule rule = running_mean_rule(2);

  StreamBenchResult out;
  out.streams = streams;
  out.inserts_per_stream = inserts;
  out.deletes_per_stream = deletes;

  double total = 0.0;
  for (std::size_t s = 0; s < streams; ++s) {
    Rng rng = Rng::derive(seed, s);
    StreamEngine eng(StreamMode::weak, synth_sphere(n0, 2, rng), spec, rule,
                     rho, rng);
    const std::size_t steps = std::max(inserts, deletes);
    for (std::size_t k = 0; k < steps; ++k) {
      if (k < inserts) {
        StreamRequest req;
        req.kind = StreamRequest::Kind::insert;
        req.point = synth_sphere(1, 2, rng)[0];
        eng.step(req, rng);
      }
      if (k < deletes) {
        StreamRequest req;
        req.kind = StreamRequest::Kind::remove;
        req.position = 1 + rng.integer(eng.size());
        eng.step(req, rng);
      }
    }
    total += static_cast<double>(eng.retrain_count());
    out.max_retrains = std::max(out.max_retrains, eng.retrain_count());
  }
  out.mean_retrains = total / static_cast<double>(streams);
  return out;
}

LinearRetrainPoint linear_retrain_bench(std::size_t T, double rho,
                                        std::size_t trials, std::uint64_t seed) {
  // Four exactly unit-norm points: every per-point term has norm 1, so the
  // per-step disagreement probability is 2 Phi(1 / (2 sigma)) - 1.
  std::vector<Vec> data;
  for (std::size_t k = 0; k < 4; ++k) {
    const double th = 0.4 + 1.3 * static_cast<double>(k);
    data.push_back({std::cos(th), std::sin(th)});
  }
  LinearQuerySpec spec;
  spec.name = "identity-mean";
  spec.sensitivity = 2.0;
  spec.per_point = [](const ModelHist&, const Vec& z, std::size_t) { return z; };
  const UpdateRule rule = affine_rule({0.0, 0.0}, 0.01);

  LinearRetrainPoint pt;
  pt.T = T;
  pt.trials = trials;
  std::size_t retrains = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = Rng::derive(seed, i);
    LinLearnState st = linear_learn(data, spec, rule, T, rho, rng);
    const std::size_t pos = 1 + rng.integer(data.size());
    if (linear_unlearn(st, pos, rng).retrained) ++retrains;
  }
  pt.retrain_fraction = static_cast<double>(retrains) / static_cast<double>(trials);
  return pt;
}

std::vector<RiskCell> risk_curve(const std::vector<std::size_t>& ns,
                                 const std::vector<double>& rhos,
                                 std::size_t trials, std::size_t d,
                                 std::size_t holdout_factor,
                                 const std::string& method, std::size_t jl_k,
                                 std::uint64_t seed) {
  if (ns.empty() || rhos.empty()) throw std::invalid_argument("empty grid");
  const std::size_t max_n = *std::max_element(ns.begin(), ns.end());
  const std::size_t holdout_n = holdout_factor * max_n;
  const LossModel loss = logistic_loss(1.0);
  const double radius = 1.0;

  std::vector<RiskCell> cells;
  for (std::size_t n : ns) {
    for (double rho : rhos) {
      RiskCell c;
      c.n = n;
      c.rho = rho;
      c.per_trial_risk.resize(trials, 0.0);
      cells.push_back(std::move(c));
    }
  }

  for (std::size_t i = 0; i < trials; ++i) {
    Rng data_rng = Rng::derive(seed, 500000 + i);
    const SynthGlm glm = synth_glm(max_n + holdout_n, d, 0.05, 0.1, data_rng);
    const std::vector<Vec> holdout(glm.rows.begin() + static_cast<std::ptrdiff_t>(max_n),
                                   glm.rows.end());

    std::size_t cell = 0;
    for (std::size_t n : ns) {
      const std::vector<Vec> train(glm.rows.begin(),
                                   glm.rows.begin() + static_cast<std::ptrdiff_t>(n));
      for (double rho : rhos) {
        Rng rng = Rng::derive(seed, (i + 1) * 10000 + cell);
        Vec model;
        if (method == "vrfw") {
          const ConvexBody body = ball_body(zeros(d), radius);
          LearnState st = tree_learn(train, vrfw_spec(loss, body),
                                     vrfw_rule(body), rho, rng);
          model = model_of(st);
        } else if (method == "da") {
          const ConvexBody body = ball_body(zeros(d), radius);
          const double eta =
              da_step_size(body.diameter, d, n, rho, loss.lipschitz);
          LearnState st = tree_learn(train, da_spec(loss), da_rule(body, eta),
                                     rho, rng);
          model = model_of(st);
        } else if (method == "jl-vrfw") {
          const JlSketch sketch(jl_k, d, rng);
          std::vector<Vec> sk_train;
          sk_train.reserve(train.size());
          for (const Vec& row : train) {
            Vec r = sketch.embed(glm_features(row));
            r.push_back(glm_label(row));
            sk_train.push_back(std::move(r));
          }
          // Base solver in the sketched space with inherited constants
          // 2 G ||X|| and 2 H ||X||^2 over a ball of twice the radius.
          LossModel sk_loss = logistic_loss(1.0);
          sk_loss.name = "logistic-jl";
          sk_loss.lipschitz = 2.0 * loss.lipschitz;
          sk_loss.smoothness = 2.0 * loss.smoothness;
          const ConvexBody body = ball_body(zeros(jl_k), 2.0 * radius);
          LearnState st = tree_learn(sk_train, vrfw_spec(sk_loss, body),
                                     vrfw_rule(body), rho, rng);
          const ConvexBody orig = ball_body(zeros(d), radius);
          model = orig.project(sketch.lift(model_of(st)));
        } else {
          throw std::invalid_argument("unknown method: " + method);
        }
        cells[cell].per_trial_risk[i] = empirical_risk(loss, model, holdout);
        ++cell;
      }
    }
  }

  for (auto& c : cells) c.mean_risk = mean_of(c.per_trial_risk);
  return cells;
}

}  // namespace tvu
