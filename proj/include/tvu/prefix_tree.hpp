// Binary-tree mechanism for noisy prefix sums. A complete binary tree over
// `capacity` leaf slots (power of two); leaf t holds the t-th appended value,
// internal nodes hold exact subtree sums. Noisy nodes are the left children
// plus the root: each draws its response r = u + sigma * N(0, I) exactly once,
// at the append step that completes its interval. Prefix queries sum the
// responses of the dyadic decomposition of [1..t] and never re-randomize.
//
// Node ids: the empty bit string is the root, '0'/'1' descend left/right.
// leaf(t) is the zero-padded binary expansion of t-1. Internally nodes live in
// a 1-based heap array (root 1, children 2i and 2i+1), so the id with depth k
// and bit value v is heap index 2^k + v.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

struct TreeNode {
  Vec u;                           // exact interval sum; empty if untouched
  std::optional<Vec> r;            // own noisy response (noisy nodes only)
  std::optional<Vec> w;            // leaves: model snapshot before the update
  std::optional<std::int64_t> z;   // leaves: original row id
};

class PrefixTree {
 public:
  // Uniform noise scale on every noisy node.
  PrefixTree(std::size_t capacity, double sigma);

  // Per-height noise schedule for anytime (stream) use: a node whose interval
  // has length 2^h gets sigma_h = 8 * B / rho_h with rho_h = rho / 2^{h+1},
  // so the total budget over any leaf-to-root path stays below rho. The
  // schedule is preserved when the tree grows.
  static PrefixTree anytime(std::size_t capacity, double budget_b, double rho);

  std::size_t capacity() const { return capacity_; }
  std::size_t filled() const { return filled_; }
  std::size_t dim() const { return dim_; }  // 0 until the first append
  double uniform_sigma() const;             // throws in anytime mode
  bool is_anytime() const { return anytime_; }
  double anytime_budget_b() const { return budget_b_; }
  double anytime_rho() const { return rho_; }

  // Dyadic decomposition of [1..t]: greedy aligned power-of-two blocks,
  // left to right, e.g. 7 -> [1..4],[5..6],[7..7].
  static std::vector<std::pair<std::size_t, std::size_t>> dyadic_decompose(
      std::size_t t);

  // --- node addressing -----------------------------------------------------
  std::size_t leaf_index(std::size_t t) const;      // heap index of leaf t
  std::size_t node_index(std::size_t start, std::size_t end) const;
  bool is_noisy(std::size_t idx) const { return idx == 1 || idx % 2 == 0; }
  std::size_t interval_start(std::size_t idx) const;
  std::size_t interval_end(std::size_t idx) const;
  std::size_t depth_of(std::size_t idx) const;
  static std::string bits_of(std::size_t idx);      // "" for the root
  std::size_t index_of(const std::string& bits) const;
  double sigma_at(std::size_t idx) const;

  const TreeNode& node(std::size_t idx) const;
  // Mutable access for bookkeeping writes; never draws or refreshes noise.
  TreeNode& node_mut(std::size_t idx);

  // --- mechanism -----------------------------------------------------------
  // Places u at leaf filled+1, accumulates it into every ancestor, and draws
  // the response of the unique noisy node whose interval this append
  // completes. sigma == 0 stores the exact value and consumes no randomness.
  void append(const Vec& u, Rng& rng);

  // Sum of responses over the dyadic decomposition of [1..t], recomputed on
  // demand. Throws if any required response is absent.
  Vec get_prefix_sum(std::size_t t) const;

  // Adds delta to u at leaf t and every ancestor. Responses are untouched.
  void adjust_path(std::size_t t, const Vec& delta);

  // Clears the last leaf and marks stale every ancestor whose interval lost
  // its final element (their r becomes absent). u values are not changed;
  // callers subtract the leaf's contribution first via adjust_path.
  void remove_last_leaf();

  // Keeps leaves 1..k: clears later leaves, subtracts their u from ancestors,
  // and drops responses of nodes whose interval extends past k. Responses of
  // nodes contained in [1..k] (the reflection target included) survive.
  void truncate(std::size_t k);

  // Doubles capacity; the old root becomes the left child of the new root.
  // Existing responses move with their nodes; nothing is redrawn.
  void grow();

  // Value-exact snapshot for serialization: every touched node keyed by its
  // bit-string id. from_snapshot reproduces the tree field for field.
  struct Snapshot {
    std::size_t capacity = 0;
    std::size_t filled = 0;
    std::size_t dim = 0;
    bool anytime = false;
    double sigma = 0.0;
    double budget_b = 0.0;
    double rho = 0.0;
    std::vector<std::pair<std::string, TreeNode>> nodes;
  };
  Snapshot snapshot() const;
  static PrefixTree from_snapshot(const Snapshot& snap);

 private:
  std::size_t capacity_;
  std::size_t filled_ = 0;
  std::size_t dim_ = 0;
  double sigma_ = 0.0;
  bool anytime_ = false;
  double budget_b_ = 0.0;
  double rho_ = 0.0;
  std::vector<TreeNode> nodes_;  // 1-based heap; index 0 unused

  void require_index(std::size_t idx) const;
};

}  // namespace tvu
