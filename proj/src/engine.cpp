#include "tvu/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace tvu {

double noise_scale(double sensitivity, std::size_t n, double rho) {
  if (sensitivity < 0.0) throw std::invalid_argument("noise_scale: negative sensitivity");
  if (n < 1) throw std::invalid_argument("noise_scale: n < 1");
  if (rho <= 0.0) throw std::invalid_argument("noise_scale: rho must be > 0");
  return 8.0 * sensitivity * std::log2(static_cast<double>(n)) / rho;
}

const Vec& model_of(const LearnState& state) {
  if (state.models.empty()) throw std::logic_error("model_of: empty state");
  return state.models.back();
}

std::size_t position_of_row(const LearnState& state, std::size_t row_id) {
  for (std::size_t i = 0; i < state.perm.size(); ++i) {
    if (state.perm[i] == row_id) return i + 1;
  }
  throw std::out_of_range("row id not present");
}

void tree_learn_from(LearnState& state, std::size_t t0, Rng& rng) {
  if (state.models.size() != t0) {
    throw std::logic_error("tree_learn_from: model history does not match resume point");
  }
  for (std::size_t t = t0; t <= state.data.size(); ++t) {
    if (state.tree.filled() == state.tree.capacity()) state.tree.grow();
    const Vec u = state.spec.p(state.models, state.data[t - 1], t);
    ++state.queries_learn;
    state.tree.append(u, rng);
    TreeNode& leaf = state.tree.node_mut(state.tree.leaf_index(t));
    leaf.w = state.models.back();  // w_t, the model before this update
    leaf.z = static_cast<std::int64_t>(state.perm[t - 1]);
    const Vec r = state.tree.get_prefix_sum(t);
    state.models.push_back(state.rule.update(state.models, r, t));
  }
}

LearnState tree_learn(std::vector<Vec> data, const QuerySpec& spec,
                      const UpdateRule& rule, double rho, Rng& rng,
                      const LearnOptions& opts) {
  if (data.empty()) throw std::invalid_argument("tree_learn: empty dataset");
  if (rho <= 0.0) throw std::invalid_argument("tree_learn: rho must be > 0");
  const std::size_t n = data.size();
  const std::size_t capacity = std::bit_ceil(n);
  // Missing leaves up to the power-of-two capacity act as zero-valued dummy
  // slots: they are simply never appended, so they contribute no noise.
  const double sigma = opts.sigma_override
                           ? *opts.sigma_override
                           : noise_scale(spec.sensitivity, capacity, rho);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  if (opts.permute) perm = rng.permutation(n);
  std::vector<Vec> view(n);
  for (std::size_t i = 0; i < n; ++i) view[i] = data[perm[i]];

  LearnState state{PrefixTree(capacity, sigma), std::move(view), std::move(perm),
                   ModelHist{rule.w0}, spec, rule, rho, 0};
  tree_learn_from(state, 1, rng);
  return state;
}

UnlearnReport tree_unlearn(LearnState& state, std::size_t j, Rng& rng,
                           CouplingVariant variant) {
  PrefixTree& tree = state.tree;
  const std::size_t f = tree.filled();
  if (f != state.data.size() || state.models.size() != f + 1) {
    throw std::logic_error("tree_unlearn: inconsistent state");
  }
  if (f < 2) throw std::invalid_argument("tree_unlearn: deleting would leave an empty model");
  if (j < 1 || j > f) throw std::out_of_range("tree_unlearn: position out of range");

  UnlearnReport rep;
  const Vec z_old = state.data[j - 1];
  const Vec z_new = state.data[f - 1];  // the point that will occupy slot j
  // The two fresh query evaluations, against the stored history w_1..w_j.
  const ModelHist hist_j(state.models.begin(),
                         state.models.begin() + static_cast<std::ptrdiff_t>(j));
  const Vec g = state.spec.p(hist_j, z_old, j);
  const Vec g_new = state.spec.p(hist_j, z_new, j);
  rep.queries_made = 2;

  // Drop the last leaf: subtract its stored contribution along its path, then
  // clear it. Ancestors whose interval ended at f lose their response; the
  // shortened run never completes those intervals.
  const Vec u_last = tree.node(tree.leaf_index(f)).u;
  tree.adjust_path(f, negated(u_last));
  tree.remove_last_leaf();
  state.data[j - 1] = z_new;
  state.data.pop_back();
  state.perm[j - 1] = state.perm[f - 1];
  state.perm.pop_back();
  const std::size_t nf = f - 1;  // size after deletion

  if (j == f) {
    // Removed the final point; w_1..w_f already match the shortened run.
    state.models.resize(f);
    return rep;
  }

  // Slot j now holds the relocated point; its pre-update model w_j is
  // unchanged, only the row id and query contribution move.
  tree.node_mut(tree.leaf_index(j)).z = static_cast<std::int64_t>(state.perm[j - 1]);
  const Vec delta = sub(g_new, g);
  tree.adjust_path(j, delta);

  // Couple bottom-up at every noisy node on the path whose response is live.
  // Each such node's target mean is its adjusted u; the source mean is the
  // value it had when the response was drawn.
  bool rejected = false;
  std::size_t reject_end = 0;
  for (std::size_t x = tree.leaf_index(j); x >= 1; x /= 2) {
    if (tree.is_noisy(x) && tree.node(x).r) {
      const Vec& u_target = tree.node(x).u;
      const Vec u_source = sub(u_target, delta);
      const CoupleResult out = couple(u_source, u_target, *tree.node(x).r,
                                      tree.sigma_at(x), rng.uniform(), variant);
      rep.couplings.emplace_back(tree.interval_end(x), out.accepted);
      if (out.accepted) {
        ++rep.accepted_nodes;
      } else {
        tree.node_mut(x).r = out.response;
        rejected = true;
        reject_end = tree.interval_end(x);
        break;
      }
    }
    if (x == 1) break;
  }

  if (!rejected) {
    // Every response is unchanged, so models w_1..w_{nf} are already correct;
    // only the final iterate must be recomputed from the adjusted tree.
    state.models.resize(nf);
    const Vec r_last = tree.get_prefix_sum(nf);
    state.models.push_back(state.rule.update(state.models, r_last, nf));
    return rep;
  }

  // Reject at the node covering [.., e]: its reflected response is the first
  // changed release, so w_{e+1} is recomputed from it and everything past
  // leaf e is relearned with fresh noise.
  const std::size_t e = reject_end;
  tree.truncate(e);  // keeps the reflection (interval within [1..e])
  state.models.resize(e);
  const Vec r_e = tree.get_prefix_sum(e);
  state.models.push_back(state.rule.update(state.models, r_e, e));
  rep.retrained = true;
  rep.resume_leaf = e + 1;
  const std::size_t before = state.queries_learn;
  tree_learn_from(state, e + 1, rng);
  rep.queries_made += state.queries_learn - before;
  return rep;
}

}  // namespace tvu
