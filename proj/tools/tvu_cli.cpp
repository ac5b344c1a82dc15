// tvu: learn / unlearn / stream / bench / verify-coupling / risk-curve.
//
// Every command reads a key=value config (file via --config, overrides via
// --set k=v, seed via --seed or the TVU_SEED environment variable) and writes
// JSON records to --out or stdout. Reruns with the same seed produce the same
// records except for the wall_time_ms field.
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tvu/config.hpp"
#include "tvu/dataset.hpp"
#include "tvu/engine.hpp"
#include "tvu/linear_engine.hpp"
#include "tvu/runner.hpp"
#include "tvu/serialize.hpp"
#include "tvu/solvers.hpp"
#include "tvu/stream.hpp"

using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (key = value lines)");
  cmd->add_option("--set", args.sets, "override a config key, e.g. --set n=128");
  cmd->add_option("--seed", args.seed, "seed override (else TVU_SEED, else default)");
  cmd->add_option("--out", args.out_path, "output file (default: stdout)");
}

tvu::Config build_config(const CommonArgs& args) {
  tvu::Config cfg;
  if (!args.config_path.empty()) cfg = tvu::Config::parse_file(args.config_path);
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

void emit(const CommonArgs& args, const std::string& text) {
  if (args.out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot open output file: " + args.out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

json config_json(const tvu::Config& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

tvu::LearnOptions learn_options(const tvu::Config& cfg) {
  tvu::LearnOptions opts;
  if (cfg.has("sigma")) opts.sigma_override = cfg.get_num("sigma", 0.0);
  opts.permute = cfg.get_bool("permute", true);
  return opts;
}

int cmd_learn(const CommonArgs& args, const std::string& checkpoint_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const tvu::Config cfg = build_config(args);
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260819);
  tvu::Rng rng(seed);

  const tvu::ProblemBundle prob = tvu::make_problem(cfg);
  std::vector<tvu::Vec> data = tvu::make_dataset(cfg, rng);
  tvu::LearnState st = tvu::tree_learn(std::move(data), prob.spec, prob.rule,
                                       cfg.get_num("rho", 0.1), rng,
                                       learn_options(cfg));

  json rec;
  rec["schema"] = "tvu-run-v1";
  rec["command"] = "learn";
  rec["seed"] = seed;
  rec["config"] = config_json(cfg);
  rec["n"] = st.data.size();
  rec["model"] = tvu::model_of(st);
  rec["queries_learn"] = st.queries_learn;
  rec["queries_unlearn"] = 0;
  rec["retrained"] = false;
  if (prob.loss) {
    rec["empirical_risk"] =
        tvu::empirical_risk(*prob.loss, tvu::model_of(st), st.data);
  }
  rec["wall_time_ms"] = ms_since(t0);

  if (!checkpoint_path.empty()) tvu::save_checkpoint(checkpoint_path, st, cfg);
  emit(args, rec.dump(2));
  return 0;
}

int cmd_unlearn(const CommonArgs& args, const std::string& checkpoint_path,
                std::optional<std::int64_t> position,
                std::optional<std::int64_t> row_id,
                const std::string& checkpoint_out) {
  const auto t0 = std::chrono::steady_clock::now();
  if (position.has_value() == row_id.has_value()) {
    throw std::invalid_argument("pass exactly one of --position / --row-id");
  }

  auto [ckpt, cfg] = tvu::load_checkpoint(checkpoint_path);
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260820);
  tvu::Rng rng(seed);

  const tvu::ProblemBundle prob = tvu::make_problem(cfg);
  tvu::LearnState st = tvu::state_from_json(ckpt.at("state"), prob.spec, prob.rule);

  const std::size_t pos =
      position ? static_cast<std::size_t>(*position)
               : tvu::position_of_row(st, static_cast<std::size_t>(*row_id));
  const tvu::UnlearnReport rep = tvu::tree_unlearn(st, pos, rng);

  json rec;
  rec["schema"] = "tvu-run-v1";
  rec["command"] = "unlearn";
  rec["seed"] = seed;
  rec["config"] = config_json(cfg);
  rec["position"] = pos;
  rec["n"] = st.data.size();
  rec["model"] = tvu::model_of(st);
  rec["queries_learn"] = st.queries_learn;
  rec["queries_unlearn"] = rep.queries_made;
  rec["retrained"] = rep.retrained;
  rec["accepted_nodes"] = rep.accepted_nodes;
  if (rep.resume_leaf) rec["resume_leaf"] = *rep.resume_leaf;
  if (prob.loss) {
    rec["empirical_risk"] =
        tvu::empirical_risk(*prob.loss, tvu::model_of(st), st.data);
  }
  rec["wall_time_ms"] = ms_since(t0);

  if (!checkpoint_out.empty()) tvu::save_checkpoint(checkpoint_out, st, cfg);
  emit(args, rec.dump(2));
  return 0;
}

int cmd_stream(const CommonArgs& args, const std::string& script_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const tvu::Config cfg = build_config(args);
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260821);
  tvu::Rng rng(seed);

  std::ifstream in(script_path);
  if (!in) throw std::runtime_error("cannot open script: " + script_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::vector<tvu::StreamRequest> script =
      tvu::parse_stream_script(buf.str());

  const std::string mode_str = cfg.get_str("mode", "weak");
  if (mode_str != "weak" && mode_str != "exact") {
    throw std::invalid_argument("mode must be weak or exact, got: " + mode_str);
  }
  const tvu::StreamMode mode =
      mode_str == "exact" ? tvu::StreamMode::exact : tvu::StreamMode::weak;

  const tvu::ProblemBundle prob = tvu::make_problem(cfg);
  std::vector<tvu::Vec> initial = tvu::make_dataset(cfg, rng);
  tvu::StreamEngine eng(mode, std::move(initial), prob.spec, prob.rule,
                        cfg.get_num("rho", 0.1), rng);

  std::ostringstream lines;
  std::size_t step_id = 0;
  for (const auto& req : script) {
    const tvu::StreamStepReport rep = eng.step(req, rng);
    json row;
    row["step"] = ++step_id;
    row["kind"] = req.kind == tvu::StreamRequest::Kind::insert ? "insert" : "delete";
    row["retrained"] = rep.retrained;
    row["queries"] = rep.queries;
    row["size_after"] = rep.size_after;
    lines << row.dump() << '\n';
  }
  json summary;
  summary["schema"] = "tvu-stream-v1";
  summary["seed"] = seed;
  summary["mode"] = mode_str;
  summary["steps"] = step_id;
  summary["retrains"] = eng.retrain_count();
  summary["size"] = eng.size();
  summary["model"] = eng.model();
  summary["wall_time_ms"] = ms_since(t0);
  lines << summary.dump() << '\n';
  emit(args, lines.str());
  return 0;
}

int cmd_bench(const CommonArgs& args) {
  const tvu::Config cfg = build_config(args);
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260822);
  const std::vector<double> ns = cfg.get_list("ns", {1024.0});
  const std::vector<double> rhos = cfg.get_list("rhos", {0.02, 0.05, 0.1});
  const auto trials = static_cast<std::size_t>(cfg.get_int("trials", 2000));
  const auto relearn_every =
      static_cast<std::size_t>(cfg.get_int("relearn_every", 50));

  std::ostringstream lines;
  for (double n : ns) {
    for (double rho : rhos) {
      const auto t0 = std::chrono::steady_clock::now();
      const tvu::UnlearnBenchRow row = tvu::run_unlearn_experiment(
          static_cast<std::size_t>(n), rho, trials, relearn_every, seed);
      json j;
      j["schema"] = "tvu-bench-v1";
      j["n"] = row.n;
      j["rho"] = row.rho;
      j["trials"] = row.trials;
      j["retrains"] = row.retrains;
      j["retrain_fraction"] = row.retrain_fraction;
      j["mean_unlearn_queries"] = row.mean_unlearn_queries;
      j["mean_accepted_nodes"] = row.mean_accepted_nodes;
      j["relative_complexity"] = row.relative_complexity;
      j["wall_time_ms"] = ms_since(t0);
      lines << j.dump() << '\n';
    }
  }
  emit(args, lines.str());
  return 0;
}

int cmd_verify_coupling(const CommonArgs& args) {
  const tvu::Config cfg = build_config(args);
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260823);
  const auto trials = static_cast<std::size_t>(cfg.get_int("trials", 20000));
  const double alpha = cfg.get_num("alpha", 0.01);
  const std::string which = cfg.get_str("engine", "both");

  bool all_pass = true;
  std::ostringstream lines;
  auto report = [&](const char* label, const tvu::CouplingCertificate& c) {
    json j;
    j["schema"] = "tvu-verify-v1";
    j["engine"] = label;
    j["trials"] = c.trials;
    j["alpha"] = c.alpha;
    j["retrain_events"] = c.retrain_events;
    j["standard_min_p"] = c.standard.min_p;
    j["mutated_min_p"] = c.mutated.min_p;
    j["standard_pass"] = c.standard_pass;
    j["mutation_detected"] = c.mutation_detected;
    j["pass"] = c.pass;
    lines << j.dump() << '\n';
    std::cerr << (c.pass ? "[PASS] " : "[FAIL] ") << label
              << " coupling certificate: standard min_p=" << c.standard.min_p
              << ", mutated min_p=" << c.mutated.min_p << '\n';
    all_pass = all_pass && c.pass;
  };

  if (which == "tree" || which == "both") {
    report("tree", tvu::verify_coupling_tree(
                       trials, cfg.get_num("sigma", 1.25), seed, alpha));
  }
  if (which == "linear" || which == "both") {
    report("linear", tvu::verify_coupling_linear(
                         trials, cfg.get_num("sigma_linear", 4.0), seed, alpha));
  }
  if (which != "tree" && which != "linear" && which != "both") {
    throw std::invalid_argument("engine must be tree, linear or both");
  }
  emit(args, lines.str());
  return all_pass ? 0 : 1;
}

int cmd_risk_curve(const CommonArgs& args) {
  const tvu::Config cfg = build_config(args);
  const std::uint64_t seed = tvu::resolve_seed(cfg, 20260824);
  const std::vector<double> ns_d = cfg.get_list("ns", {64.0, 256.0, 1024.0});
  std::vector<std::size_t> ns;
  for (double v : ns_d) ns.push_back(static_cast<std::size_t>(v));
  const std::vector<double> rhos = cfg.get_list("rhos", {0.05, 0.2});
  const auto trials = static_cast<std::size_t>(cfg.get_int("trials", 20));
  const auto d = static_cast<std::size_t>(cfg.get_int("d", 5));
  const auto holdout = static_cast<std::size_t>(cfg.get_int("holdout_factor", 10));
  const std::string method = cfg.get_str("method", "vrfw");
  const auto jl_k = static_cast<std::size_t>(cfg.get_int("jl_k", 16));

  const std::vector<tvu::RiskCell> cells =
      tvu::risk_curve(ns, rhos, trials, d, holdout, method, jl_k, seed);

  std::ostringstream lines;
  for (const auto& c : cells) {
    json j;
    j["schema"] = "tvu-risk-v1";
    j["method"] = method;
    j["n"] = c.n;
    j["rho"] = c.rho;
    j["trials"] = trials;
    j["mean_risk"] = c.mean_risk;
    j["risks"] = c.per_trial_risk;
    lines << j.dump() << '\n';
  }
  emit(args, lines.str());
  return 0;
}

int selftest_fail(const std::string& what) {
  std::cerr << "[FAIL] " << what << '\n';
  return 1;
}

int cmd_selftest() {
  namespace fs = std::filesystem;
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const fs::path dir =
      fs::temp_directory_path() / ("tvu-selftest-" + std::to_string(stamp));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path d;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  } cleanup{dir};

  tvu::Config cfg;
  cfg.set("problem", "sphere-mean");
  cfg.set("source", "sphere");
  cfg.set("n", "32");
  cfg.set("d", "3");
  cfg.set("rho", "0.2");
  cfg.set("seed", "99");

  // learn twice with one seed: identical models
  const tvu::ProblemBundle prob = tvu::make_problem(cfg);
  tvu::Rng rng_a(99), rng_b(99);
  tvu::LearnState a =
      tvu::tree_learn(tvu::make_dataset(cfg, rng_a), prob.spec, prob.rule, 0.2, rng_a);
  tvu::LearnState b =
      tvu::tree_learn(tvu::make_dataset(cfg, rng_b), prob.spec, prob.rule, 0.2, rng_b);
  if (tvu::model_of(a) != tvu::model_of(b)) return selftest_fail("seeded rerun differs");
  std::cerr << "[PASS] seeded rerun reproduces the model\n";

  // checkpoint roundtrip preserves the full state
  const std::string ckpt = (dir / "state.ckpt").string();
  tvu::save_checkpoint(ckpt, a, cfg);
  auto [loaded_json, loaded_cfg] = tvu::load_checkpoint(ckpt);
  tvu::LearnState loaded =
      tvu::state_from_json(loaded_json.at("state"), prob.spec, prob.rule);
  if (tvu::state_to_json(a).dump() != tvu::state_to_json(loaded).dump()) {
    return selftest_fail("checkpoint roundtrip changed the state");
  }
  if (loaded_cfg.get_str("problem", "") != "sphere-mean") {
    return selftest_fail("checkpoint lost the config");
  }
  std::cerr << "[PASS] checkpoint roundtrip is lossless\n";

  // unlearn keeps the engine consistent
  tvu::Rng rng_u(1234);
  const tvu::UnlearnReport rep = tvu::tree_unlearn(loaded, 5, rng_u);
  if (loaded.data.size() != 31 || loaded.models.size() != 32 ||
      rep.queries_made < 2) {
    return selftest_fail("unlearn left an inconsistent state");
  }
  std::cerr << "[PASS] unlearn keeps sizes and query accounting consistent\n";

  // weak + exact streams
  tvu::Rng rng_s(777);
  tvu::StreamEngine weak(tvu::StreamMode::weak,
                         tvu::synth_sphere(8, 3, rng_s), prob.spec, prob.rule,
                         0.5, rng_s);
  for (int i = 0; i < 4; ++i) {
    tvu::StreamRequest req;
    req.kind = tvu::StreamRequest::Kind::insert;
    req.point = tvu::synth_sphere(1, 3, rng_s)[0];
    weak.step(req, rng_s);
  }
  {
    tvu::StreamRequest req;
    req.kind = tvu::StreamRequest::Kind::remove;
    req.position = 2;
    weak.step(req, rng_s);
  }
  if (weak.size() != 11) return selftest_fail("weak stream size mismatch");
  tvu::StreamEngine exact(tvu::StreamMode::exact,
                          tvu::synth_sphere(8, 3, rng_s), prob.spec, prob.rule,
                          0.5, rng_s);
  for (int i = 0; i < 3; ++i) {
    tvu::StreamRequest req;
    req.kind = tvu::StreamRequest::Kind::insert;
    req.point = tvu::synth_sphere(1, 3, rng_s)[0];
    exact.step(req, rng_s);
  }
  if (exact.size() != 11) return selftest_fail("exact stream size mismatch");
  std::cerr << "[PASS] stream engines run in both modes\n";

  // linear engine end to end
  tvu::Rng rng_l(555);
  tvu::LinearQuerySpec lspec;
  lspec.name = "identity-mean";
  lspec.sensitivity = 2.0;
  lspec.per_point = [](const tvu::ModelHist&, const tvu::Vec& z, std::size_t) {
    return z;
  };
  tvu::UpdateRule lrule;
  lrule.name = "affine";
  lrule.w0 = tvu::zeros(3);
  lrule.update = [](const tvu::ModelHist&, const tvu::Vec& r, std::size_t) {
    return tvu::scaled(r, 0.1);
  };
  tvu::LinLearnState lst = tvu::linear_learn(tvu::synth_sphere(6, 3, rng_l),
                                             lspec, lrule, 4, 0.5, rng_l);
  tvu::linear_unlearn(lst, 2, rng_l);
  if (lst.data.size() != 5 || tvu::linear_model_of(lst).size() != 3) {
    return selftest_fail("linear engine state mismatch after unlearn");
  }
  std::cerr << "[PASS] linear engine learn + unlearn\n";

  std::cerr << "[PASS] selftest complete\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TV-stable prefix-sum release with exact unlearning"};
  app.require_subcommand(1);

  CommonArgs learn_args, unlearn_args, stream_args, bench_args, verify_args,
      risk_args;
  std::string learn_ckpt, unlearn_ckpt, unlearn_ckpt_out, stream_script;
  std::optional<std::int64_t> unlearn_pos, unlearn_row;

  CLI::App* learn = app.add_subcommand("learn", "run the learner once");
  add_common(learn, learn_args);
  learn->add_option("--checkpoint", learn_ckpt, "write the learned state here");

  CLI::App* unlearn = app.add_subcommand("unlearn", "delete one point from a checkpoint");
  add_common(unlearn, unlearn_args);
  unlearn->add_option("--checkpoint", unlearn_ckpt, "state to load")->required();
  unlearn->add_option("--position", unlearn_pos, "1-based position to delete");
  unlearn->add_option("--row-id", unlearn_row, "original row id to delete");
  unlearn->add_option("--checkpoint-out", unlearn_ckpt_out, "write the updated state here");

  CLI::App* stream = app.add_subcommand("stream", "apply an insert/delete script");
  add_common(stream, stream_args);
  stream->add_option("--script", stream_script, "stream script file")->required();

  CLI::App* bench = app.add_subcommand("bench", "deletion retrain-rate benchmark");
  add_common(bench, bench_args);

  CLI::App* verify = app.add_subcommand(
      "verify-coupling", "distributional certificate for the unlearning transport");
  add_common(verify, verify_args);

  CLI::App* risk = app.add_subcommand("risk-curve", "held-out risk across n and rho");
  add_common(risk, risk_args);

  CLI::App* selftest = app.add_subcommand("selftest", "end-to-end smoke test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (learn->parsed()) return cmd_learn(learn_args, learn_ckpt);
    if (unlearn->parsed()) {
      return cmd_unlearn(unlearn_args, unlearn_ckpt, unlearn_pos, unlearn_row,
                         unlearn_ckpt_out);
    }
    if (stream->parsed()) return cmd_stream(stream_args, stream_script);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (verify->parsed()) return cmd_verify_coupling(verify_args);
    if (risk->parsed()) return cmd_risk_curve(risk_args);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
