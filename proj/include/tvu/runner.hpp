// Experiment drivers shared by the CLI and the acceptance suite: problem
// registry, distributional certificates for the unlearning transports,
// retrain-rate benchmarks, and risk curves.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvu/config.hpp"
#include "tvu/engine.hpp"
#include "tvu/linear_engine.hpp"
#include "tvu/losses.hpp"
#include "tvu/rng.hpp"
#include "tvu/stats.hpp"

namespace tvu {

// --- problem registry --------------------------------------------------------

struct ProblemBundle {
  QuerySpec spec;
  UpdateRule rule;
  std::optional<LossModel> loss;  // set for risk-bearing problems
};

// Problems: sphere-mean (p = z over unit vectors, running-mean update),
// quad-grad (p = w_t - z, linear update), glm-logistic-vrfw, glm-logistic-da,
// glm-hinge-da, quad-vrfw. Reads n/d/rho and geometry keys from the config.
ProblemBundle make_problem(const Config& cfg);

// Sources: sphere (unit vectors), glm (planted margin GLM rows), blobs,
// csv (path = ...). Reads n/d and generator keys.
std::vector<Vec> make_dataset(const Config& cfg, Rng& rng);

// --- two-sample suite ---------------------------------------------------------

// Per-coordinate KS and z tests between two collections of models.
struct SuiteResult {
  std::vector<double> ks_p;
  std::vector<double> z_p;
  double min_p = 1.0;
  std::size_t tests = 0;
  bool pass(double alpha_total) const;  // Bonferroni: min_p >= alpha/tests
};
SuiteResult compare_samples(const std::vector<Vec>& a, const std::vector<Vec>& b);

// --- distributional certificates ---------------------------------------------

// Paired-trial certificate: unlearn-transport arm vs fresh-retrain arm, plus
// a deliberately inverted accept-ratio arm that must be detected. The
// explicit sigma is the certificate's operating point: transport exactness
// holds for every sigma > 0, and a sigma comparable to the per-node mean
// shifts gives the tests their power.
struct CouplingCertificate {
  SuiteResult standard;
  SuiteResult mutated;
  double alpha = 0.01;
  std::size_t trials = 0;
  std::size_t retrain_events = 0;  // rejects seen in the standard arm
  bool standard_pass = false;
  bool mutation_detected = false;
  bool pass = false;  // both of the above
};
CouplingCertificate verify_coupling_tree(std::size_t trials, double sigma,
                                         std::uint64_t seed, double alpha);
CouplingCertificate verify_coupling_linear(std::size_t trials, double sigma,
                                           std::uint64_t seed, double alpha);

// Weak-mode stream check: fixed 6-request script from n0 = 4; the model
// distribution must match a fresh run on the stream's final sequence.
SuiteResult weak_stream_certificate(std::size_t trials, double rho,
                                    std::uint64_t seed);

// --- benchmarks ---------------------------------------------------------------

struct UnlearnBenchRow {
  std::size_t n = 0;
  double rho = 0.0;
  std::size_t trials = 0;
  std::size_t retrains = 0;
  double retrain_fraction = 0.0;
  double mean_unlearn_queries = 0.0;
  double mean_accepted_nodes = 0.0;
  // Definition: mean unlearning query count / learning query count (= n).
  double relative_complexity = 0.0;
};
// Random single deletions against the sphere-mean problem. A fresh state is
// learned every `relearn_every` deletions; each deletion works on a copy.
UnlearnBenchRow run_unlearn_experiment(std::size_t n, double rho,
                                       std::size_t trials,
                                       std::size_t relearn_every,
                                       std::uint64_t seed);

struct StreamBenchResult {
  std::size_t streams = 0;
  std::size_t inserts_per_stream = 0;
  std::size_t deletes_per_stream = 0;
  double mean_retrains = 0.0;
  std::size_t max_retrains = 0;
};
// Insert-only when deletes == 0; otherwise alternating insert/delete.
StreamBenchResult run_weak_stream_bench(std::size_t streams, std::size_t n0,
                                        std::size_t inserts, std::size_t deletes,
                                        double rho, std::uint64_t seed);

struct LinearRetrainPoint {
  std::size_t T = 0;
  std::size_t trials = 0;
  double retrain_fraction = 0.0;
};
// Fixed 4-point instance, unit per-point terms, one uniform deletion per
// trial; sigma follows the engine formula for the given rho.
LinearRetrainPoint linear_retrain_bench(std::size_t T, double rho,
                                        std::size_t trials, std::uint64_t seed);

// --- risk curves ---------------------------------------------------------------

struct RiskCell {
  std::size_t n = 0;
  double rho = 0.0;
  std::vector<double> per_trial_risk;  // paired by trial index across cells
  double mean_risk = 0.0;
};
// Held-out logistic risk of the chosen method ("vrfw", "da", "jl-vrfw") on
// planted GLM data; trials share datasets across cells for paired tests.
std::vector<RiskCell> risk_curve(const std::vector<std::size_t>& ns,
                                 const std::vector<double>& rhos,
                                 std::size_t trials, std::size_t d,
                                 std::size_t holdout_factor,
                                 const std::string& method, std::size_t jl_k,
                                 std::uint64_t seed);

}  // namespace tvu
