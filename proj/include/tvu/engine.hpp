// Learning and exact unlearning over noisy prefix sums.
//
// tree_learn permutes the dataset, then for t = 1..n evaluates the adaptive
// per-step query u_t = p(w_1..w_t, z_t), appends it to the tree, reads the
// noisy prefix sum r_t and computes w_{t+1} = U(w_1..w_t, r_t). The output
// model is the last iterate w_{n+1}.
//
// tree_unlearn(j) transports the stored state to a sample of the same
// algorithm run on the dataset with position j's point removed and the former
// last point standing in its place: it swaps the last point into slot j,
// shifts every tree node containing j by (new - old) contribution, and runs a
// maximal-coupling accept/reject at each noisy node on that path whose
// response is still live. All accepts keep every response bit-identical, so
// earlier models never change; a reject stores the reflected response at the
// rejecting node (interval ending at e), recomputes w_{e+1} from the updated
// prefix sum and relearns from leaf e+1 with fresh noise. Either way the
// result is distributed exactly as a fresh run on the reduced dataset.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tvu/gaussian.hpp"
#include "tvu/prefix_tree.hpp"
#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

// Adaptive per-step query. `p` sees exactly the model prefix w_1..w_t
// (hist.size() == t) plus the data point; `sensitivity` bounds
// sup ||p(h, z, t) - p(h, z', t)|| over histories and point pairs.
struct QuerySpec {
  std::string name;
  double sensitivity = 0.0;
  std::function<Vec(const ModelHist& hist, const Vec& z, std::size_t t)> p;
};

// Data-independent update: consumes only released responses, never raw data.
struct UpdateRule {
  std::string name;
  Vec w0;
  std::function<Vec(const ModelHist& hist, const Vec& r, std::size_t t)> update;
};

struct LearnOptions {
  std::optional<double> sigma_override;  // default: noise_scale(B, capacity, rho)
  bool permute = true;
};

struct LearnState {
  PrefixTree tree;
  std::vector<Vec> data;           // current working order
  std::vector<std::size_t> perm;   // position (0-based) -> original row id
  ModelHist models;                // w_1..w_{filled+1}
  QuerySpec spec;
  UpdateRule rule;
  double rho = 0.0;
  std::size_t queries_learn = 0;   // cumulative p evaluations while learning
};

struct UnlearnReport {
  bool retrained = false;
  std::size_t accepted_nodes = 0;
  std::optional<std::size_t> resume_leaf;  // set when retrained
  std::size_t queries_made = 0;            // >= 2: the two fresh p evaluations
  // (interval end, accepted) per coupling attempt, bottom-up.
  std::vector<std::pair<std::size_t, bool>> couplings;
};

// sigma = 8 * B * log2(n) / rho.
double noise_scale(double sensitivity, std::size_t n, double rho);

LearnState tree_learn(std::vector<Vec> data, const QuerySpec& spec,
                      const UpdateRule& rule, double rho, Rng& rng,
                      const LearnOptions& opts = {});

// Appends data positions t0..data.size() to an existing state (used by the
// fresh learn, the post-reject resume, and stream inserts). Requires
// models.size() == t0 on entry.
void tree_learn_from(LearnState& state, std::size_t t0, Rng& rng);

// Removes the point at 1-based position j. Requires at least two points.
UnlearnReport tree_unlearn(LearnState& state, std::size_t j, Rng& rng,
                           CouplingVariant variant = CouplingVariant::standard);

// Current model: the last iterate.
const Vec& model_of(const LearnState& state);

// Resolve an original-dataset row id to its current position (1-based).
std::size_t position_of_row(const LearnState& state, std::size_t row_id);

}  // namespace tvu
