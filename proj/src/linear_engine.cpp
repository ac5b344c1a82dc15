#include "tvu/linear_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace tvu {

double linear_noise_scale(double sensitivity, std::size_t n, double rho) {
  if (sensitivity < 0.0) throw std::invalid_argument("linear_noise_scale: negative sensitivity");
  if (n < 1) throw std::invalid_argument("linear_noise_scale: n < 1");
  if (rho <= 0.0) throw std::invalid_argument("linear_noise_scale: rho must be > 0");
  return 8.0 * sensitivity / (static_cast<double>(n) * rho);
}

const Vec& linear_model_of(const LinLearnState& state) {
  if (state.models.empty()) throw std::logic_error("linear_model_of: empty state");
  return state.models.back();
}

void linear_learn_from(LinLearnState& state, std::size_t t0, Rng& rng) {
  if (state.models.size() != t0) {
    throw std::logic_error("linear_learn_from: model history does not match resume point");
  }
  for (std::size_t t = t0; t <= state.T; ++t) {
    if (state.spec.prepare) state.spec.prepare(state.models, state.data, t);
    Vec q;
    for (const Vec& z : state.data) {
      Vec term = state.spec.per_point(state.models, z, t);
      ++state.unit_queries_learn;
      if (q.empty()) {
        q = std::move(term);
      } else {
        add_in(q, term);
      }
    }
    if (q.empty()) throw std::logic_error("linear_learn_from: empty dataset");
    const Vec r = sample_gaussian(q, state.sigma, rng);
    state.qs.resize(t);
    state.rs.resize(t);
    state.qs[t - 1] = q;
    state.rs[t - 1] = r;
    state.models.push_back(state.rule.update(state.models, r, t));
  }
}

LinLearnState linear_learn(std::vector<Vec> data, const LinearQuerySpec& spec,
                           const UpdateRule& rule, std::size_t T, double rho,
                           Rng& rng, std::optional<double> sigma_override) {
  if (data.empty()) throw std::invalid_argument("linear_learn: empty dataset");
  if (T < 1) throw std::invalid_argument("linear_learn: T < 1");
  const double sigma = sigma_override
                           ? *sigma_override
                           : linear_noise_scale(spec.sensitivity, data.size(), rho);
  LinLearnState state{std::move(data), ModelHist{rule.w0}, {}, {}, spec,
                      rule,            T,                  sigma, rho, 0};
  linear_learn_from(state, 1, rng);
  return state;
}

LinearUnlearnReport linear_unlearn(LinLearnState& state, std::size_t position,
                                   Rng& rng, CouplingVariant variant) {
  if (position < 1 || position > state.data.size()) {
    throw std::out_of_range("linear_unlearn: position out of range");
  }
  if (state.data.size() < 2) {
    throw std::invalid_argument("linear_unlearn: deleting would empty the dataset");
  }
  if (state.models.size() != state.T + 1) {
    throw std::logic_error("linear_unlearn: incomplete state");
  }
  LinearUnlearnReport rep;
  const Vec z_j = state.data[position - 1];
  // Per-point terms are evaluated against the original dataset (sizes and
  // shared context included); the reduced dataset is what any relearn sees.
  const std::vector<Vec> data_orig = state.data;
  state.data.erase(state.data.begin() + static_cast<std::ptrdiff_t>(position - 1));

  for (std::size_t t = 1; t <= state.T; ++t) {
    const ModelHist hist_t(state.models.begin(),
                           state.models.begin() + static_cast<std::ptrdiff_t>(t));
    if (state.spec.prepare) state.spec.prepare(hist_t, data_orig, t);
    const Vec p_j = state.spec.per_point(hist_t, z_j, t);
    ++rep.unit_queries;
    const Vec u_old = state.qs[t - 1];
    const Vec u_new = sub(u_old, p_j);
    const CoupleResult out = couple(u_old, u_new, state.rs[t - 1], state.sigma,
                                    rng.uniform(), variant);
    state.qs[t - 1] = u_new;
    if (out.accepted) {
      ++rep.accepted_steps;
      continue;
    }
    // First disagreement: store the reflection, recompute this step's model,
    // relearn the remaining steps on the reduced dataset.
    state.rs[t - 1] = out.response;
    state.models.resize(t);
    state.models.push_back(state.rule.update(state.models, state.rs[t - 1], t));
    state.qs.resize(t);
    state.rs.resize(t);
    rep.retrained = true;
    rep.resume_step = t + 1;
    const std::size_t before = state.unit_queries_learn;
    linear_learn_from(state, t + 1, rng);
    rep.unit_queries += state.unit_queries_learn - before;
    return rep;
  }
  return rep;
}

// --- FedAvg ------------------------------------------------------------------

Vec clip_to_ball(Vec v, double radius) {
  if (radius < 0.0) throw std::invalid_argument("clip_to_ball: negative radius");
  const double n = norm(v);
  if (n > radius && n > 0.0) {
    const double s = radius / n;
    for (double& x : v) x *= s;
  }
  return v;
}

Vec fedavg_round(const std::vector<Vec>& client_models, double clip) {
  if (client_models.empty()) throw std::invalid_argument("fedavg_round: no clients");
  Vec sum = zeros(client_models.front().size());
  for (const Vec& m : client_models) add_in(sum, clip_to_ball(m, clip));
  return scaled(std::move(sum), 1.0 / static_cast<double>(client_models.size()));
}

Vec fedavg_client_update(const Vec& w_global, const Vec& target,
                         std::size_t local_steps, double lr) {
  // Gradient steps on the client's quadratic objective 0.5 ||w - target||^2.
  Vec w = w_global;
  for (std::size_t s = 0; s < local_steps; ++s) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (w[i] - target[i]);
  }
  return w;
}

LinearQuerySpec fedavg_spec(std::size_t clients, std::size_t local_steps,
                            double lr, double clip) {
  if (clients < 1) throw std::invalid_argument("fedavg_spec: no clients");
  LinearQuerySpec spec;
  spec.name = "fedavg";
  spec.sensitivity = 2.0 * clip / static_cast<double>(clients);
  const double inv_c = 1.0 / static_cast<double>(clients);
  spec.per_point = [local_steps, lr, clip, inv_c](const ModelHist& hist,
                                                  const Vec& z, std::size_t) {
    return scaled(clip_to_ball(fedavg_client_update(hist.back(), z, local_steps, lr), clip),
                  inv_c);
  };
  return spec;
}

UpdateRule fedavg_rule(std::size_t dim) {
  UpdateRule rule;
  rule.name = "fedavg-aggregate";
  rule.w0 = zeros(dim);
  rule.update = [](const ModelHist&, const Vec& r, std::size_t) { return r; };
  return rule;
}

// --- Lloyd -------------------------------------------------------------------

std::vector<std::size_t> lloyd_assign(const std::vector<Vec>& points,
                                      const std::vector<Vec>& centers) {
  if (centers.empty()) throw std::invalid_argument("lloyd_assign: no centers");
  std::vector<std::size_t> assign(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = dist(points[i], centers[c]);
      if (d < best) {  // strict: ties stay with the lowest index
        best = d;
        arg = c;
      }
    }
    assign[i] = arg;
  }
  return assign;
}

std::vector<Vec> lloyd_step(const std::vector<Vec>& points,
                            const std::vector<Vec>& centers) {
  const auto assign = lloyd_assign(points, centers);
  std::vector<Vec> next(centers.size());
  std::vector<std::size_t> counts(centers.size(), 0);
  for (std::size_t c = 0; c < centers.size(); ++c) next[c] = zeros(centers[c].size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    add_in(next[assign[i]], points[i]);
    ++counts[assign[i]];
  }
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (counts[c] == 0) {
      next[c] = centers[c];  // empty cluster keeps its center
    } else {
      next[c] = scaled(std::move(next[c]), 1.0 / static_cast<double>(counts[c]));
    }
  }
  return next;
}

Vec flatten_centers(const std::vector<Vec>& centers) {
  Vec flat;
  for (const Vec& c : centers) flat.insert(flat.end(), c.begin(), c.end());
  return flat;
}

std::vector<Vec> unflatten_centers(const Vec& flat, std::size_t k) {
  if (k == 0 || flat.size() % k != 0) throw std::invalid_argument("unflatten_centers: bad shape");
  const std::size_t d = flat.size() / k;
  std::vector<Vec> centers(k);
  for (std::size_t c = 0; c < k; ++c) {
    centers[c] = Vec(flat.begin() + static_cast<std::ptrdiff_t>(c * d),
                     flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * d));
  }
  return centers;
}

namespace {
struct LloydContext {
  std::vector<Vec> centers;
  std::vector<std::size_t> counts;
  std::size_t n_points = 0;
};
}  // namespace

LinearQuerySpec lloyd_spec(std::size_t k, std::size_t dim, double radius) {
  auto ctx = std::make_shared<LloydContext>();
  LinearQuerySpec spec;
  spec.name = "lloyd";
  spec.sensitivity = 2.0 * radius;
  spec.prepare = [ctx, k](const ModelHist& hist, const std::vector<Vec>& data,
                          std::size_t) {
    ctx->centers = unflatten_centers(hist.back(), k);
    ctx->counts.assign(k, 0);
    for (const std::size_t a : lloyd_assign(data, ctx->centers)) ++ctx->counts[a];
    ctx->n_points = data.size();
  };
  spec.per_point = [ctx, k, dim](const ModelHist&, const Vec& z, std::size_t) {
    Vec out = zeros(k * dim);
    // Own block: an equal share of the assigned cluster's mean.
    const auto a = lloyd_assign({z}, ctx->centers)[0];
    for (std::size_t i = 0; i < dim; ++i) {
      out[a * dim + i] = z[i] / static_cast<double>(ctx->counts[a]);
    }
    // Empty clusters: each point carries an equal share of the old center so
    // the summed query keeps it in place.
    for (std::size_t c = 0; c < k; ++c) {
      if (ctx->counts[c] != 0) continue;
      for (std::size_t i = 0; i < dim; ++i) {
        out[c * dim + i] = ctx->centers[c][i] / static_cast<double>(ctx->n_points);
      }
    }
    return out;
  };
  return spec;
}

UpdateRule lloyd_rule(std::size_t k, std::size_t dim,
                      const std::vector<Vec>& init_centers) {
  if (init_centers.size() != k) throw std::invalid_argument("lloyd_rule: wrong center count");
  for (const Vec& c : init_centers) {
    if (c.size() != dim) throw std::invalid_argument("lloyd_rule: wrong center dim");
  }
  UpdateRule rule;
  rule.name = "lloyd-centers";
  rule.w0 = flatten_centers(init_centers);
  rule.update = [](const ModelHist&, const Vec& r, std::size_t) { return r; };
  return rule;
}

}  // namespace tvu
