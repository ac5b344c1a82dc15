// Flat (non-tree) release of T adaptive linear queries with per-step maximal
// coupling for unlearning. Each step's query decomposes as a sum of per-point
// terms q_t = sum_z p(hist, z, t); unlearning a point subtracts its term from
// every stored query mean and couples the stored response against the new
// mean. The first reject recomputes the model at that step and relearns the
// remaining steps on the reduced dataset with fresh noise.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tvu/engine.hpp"
#include "tvu/gaussian.hpp"
#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

struct LinearQuerySpec {
  std::string name;
  double sensitivity = 0.0;  // B: sup ||p(h,z,t) - p(h,z',t)||
  // Per-point term. `hist` is exactly w_1..w_t.
  std::function<Vec(const ModelHist& hist, const Vec& z, std::size_t t)> per_point;
  // Optional shared precomputation over the full dataset (e.g. cluster
  // assignments); runs once before each step's per-point sweep.
  std::function<void(const ModelHist& hist, const std::vector<Vec>& data,
                     std::size_t t)> prepare;
};

struct LinLearnState {
  std::vector<Vec> data;
  ModelHist models;        // w_1..w_{T+1}
  std::vector<Vec> qs;     // exact query means u_t, t = 1..T
  std::vector<Vec> rs;     // released responses r_t
  LinearQuerySpec spec;
  UpdateRule rule;
  std::size_t T = 0;
  double sigma = 0.0;
  double rho = 0.0;
  std::size_t unit_queries_learn = 0;  // per-point evaluations while learning
};

struct LinearUnlearnReport {
  bool retrained = false;
  std::size_t accepted_steps = 0;
  std::optional<std::size_t> resume_step;
  std::size_t unit_queries = 0;
};

// sigma = 8 * B / (n * rho).
double linear_noise_scale(double sensitivity, std::size_t n, double rho);

LinLearnState linear_learn(std::vector<Vec> data, const LinearQuerySpec& spec,
                           const UpdateRule& rule, std::size_t T, double rho,
                           Rng& rng,
                           std::optional<double> sigma_override = std::nullopt);

void linear_learn_from(LinLearnState& state, std::size_t t0, Rng& rng);

LinearUnlearnReport linear_unlearn(LinLearnState& state, std::size_t position,
                                   Rng& rng,
                                   CouplingVariant variant = CouplingVariant::standard);

const Vec& linear_model_of(const LinLearnState& state);

// --- instantiations --------------------------------------------------------

// Federated averaging round: clip each client model to the given norm ball
// and average. Exposed directly and as a LinearQuerySpec whose per-point term
// is clip(client_update(w_t, z)) / C with sensitivity 2 * clip / C.
Vec clip_to_ball(Vec v, double radius);
Vec fedavg_round(const std::vector<Vec>& client_models, double clip);
Vec fedavg_client_update(const Vec& w_global, const Vec& target,
                         std::size_t local_steps, double lr);
LinearQuerySpec fedavg_spec(std::size_t clients, std::size_t local_steps,
                            double lr, double clip);
UpdateRule fedavg_rule(std::size_t dim);  // w_{t+1} = r_t (the noisy average)

// Lloyd iteration: nearest-center assignment (ties to the lowest index),
// means of assigned points, empty clusters keep their previous centers.
std::vector<std::size_t> lloyd_assign(const std::vector<Vec>& points,
                                      const std::vector<Vec>& centers);
std::vector<Vec> lloyd_step(const std::vector<Vec>& points,
                            const std::vector<Vec>& centers);
// Centers are flattened into one k*d query vector. Per-point term: the
// point's block is z / |cluster|, and every empty cluster's block carries an
// equal share of its previous center so the summed query reproduces
// lloyd_step exactly. Sizes come from the dataset the query ran on; the
// declared sensitivity is the documented heuristic 2 * radius.
LinearQuerySpec lloyd_spec(std::size_t k, std::size_t dim, double radius);
UpdateRule lloyd_rule(std::size_t k, std::size_t dim, const std::vector<Vec>& init_centers);
Vec flatten_centers(const std::vector<Vec>& centers);
std::vector<Vec> unflatten_centers(const Vec& flat, std::size_t k);

}  // namespace tvu
