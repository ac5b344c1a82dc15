#include "tvu/prefix_tree.hpp"

#include <bit>
#include <stdexcept>

#include "tvu/gaussian.hpp"

namespace tvu {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

PrefixTree::PrefixTree(std::size_t capacity, double sigma)
    : capacity_(capacity), sigma_(sigma) {
  if (!is_pow2(capacity)) throw std::invalid_argument("capacity must be a power of two");
  if (sigma < 0.0) throw std::invalid_argument("negative sigma");
  nodes_.resize(2 * capacity_);
}

PrefixTree PrefixTree::anytime(std::size_t capacity, double budget_b, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("anytime: rho must be > 0");
  if (budget_b < 0.0) throw std::invalid_argument("anytime: negative sensitivity");
  PrefixTree t(capacity, 0.0);
  t.anytime_ = true;
  t.budget_b_ = budget_b;
  t.rho_ = rho;
  return t;
}

double PrefixTree::uniform_sigma() const {
  if (anytime_) throw std::logic_error("per-height schedule has no single sigma");
  return sigma_;
}

std::vector<std::pair<std::size_t, std::size_t>> PrefixTree::dyadic_decompose(
    std::size_t t) {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  std::size_t start = 1;
  while (t > 0) {
    const std::size_t len = std::bit_floor(t);
    blocks.emplace_back(start, start + len - 1);
    start += len;
    t -= len;
  }
  return blocks;
}

std::size_t PrefixTree::leaf_index(std::size_t t) const {
  if (t < 1 || t > capacity_) throw std::out_of_range("leaf index out of range");
  return capacity_ + (t - 1);
}

std::size_t PrefixTree::node_index(std::size_t start, std::size_t end) const {
  if (start < 1 || end < start || end > capacity_)
    throw std::out_of_range("bad interval");
  const std::size_t len = end - start + 1;
  if (!is_pow2(len) || (start - 1) % len != 0)
    throw std::invalid_argument("interval is not an aligned dyadic block");
  return capacity_ / len + (start - 1) / len;
}

std::size_t PrefixTree::depth_of(std::size_t idx) const {
  require_index(idx);
  return static_cast<std::size_t>(std::bit_width(idx) - 1);
}

std::size_t PrefixTree::interval_start(std::size_t idx) const {
  const std::size_t len = capacity_ >> depth_of(idx);
  return (idx - (std::size_t{1} << depth_of(idx))) * len + 1;
}

std::size_t PrefixTree::interval_end(std::size_t idx) const {
  const std::size_t len = capacity_ >> depth_of(idx);
  return interval_start(idx) + len - 1;
}

std::string PrefixTree::bits_of(std::size_t idx) {
  if (idx == 0) throw std::out_of_range("bits_of: index 0");
  std::string s;
  while (idx > 1) {
    s.insert(s.begin(), static_cast<char>('0' + (idx & 1)));
    idx >>= 1;
  }
  return s;
}

std::size_t PrefixTree::index_of(const std::string& bits) const {
  std::size_t idx = 1;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bad node id");
    idx = idx * 2 + static_cast<std::size_t>(c - '0');
  }
  require_index(idx);
  return idx;
}

double PrefixTree::sigma_at(std::size_t idx) const {
  require_index(idx);
  if (!anytime_) return sigma_;
  const std::size_t len = capacity_ >> depth_of(idx);  // 2^height
  const double rho_h = rho_ / (2.0 * static_cast<double>(len));
  return 8.0 * budget_b_ / rho_h;
}

const TreeNode& PrefixTree::node(std::size_t idx) const {
  require_index(idx);
  return nodes_[idx];
}

TreeNode& PrefixTree::node_mut(std::size_t idx) {
  require_index(idx);
  return nodes_[idx];
}

void PrefixTree::require_index(std::size_t idx) const {
  if (idx < 1 || idx >= nodes_.size()) throw std::out_of_range("node index");
}

void PrefixTree::append(const Vec& u, Rng& rng) {
  if (filled_ == capacity_) throw std::logic_error("append: tree is full");
  if (dim_ == 0) dim_ = u.size();
  if (u.size() != dim_) throw std::invalid_argument("append: dimension mismatch");
  const std::size_t t = filled_ + 1;
  const std::size_t leaf = leaf_index(t);
  for (std::size_t x = leaf; x >= 1; x /= 2) {
    TreeNode& nd = nodes_[x];
    if (x == leaf || nd.u.empty()) {
      nd.u = u;
    } else {
      add_in(nd.u, u);
    }
    // Exactly one noisy node's interval ends at t; it draws its response now.
    if (is_noisy(x) && interval_end(x) == t) {
      const double s = sigma_at(x);
      nd.r = s > 0.0 ? sample_gaussian(nd.u, s, rng) : nd.u;
    }
    if (x == 1) break;
  }
  ++filled_;
}

Vec PrefixTree::get_prefix_sum(std::size_t t) const {
  if (t < 1 || t > filled_) throw std::out_of_range("get_prefix_sum: t outside [1, filled]");
  Vec out;
  for (const auto& [start, end] : dyadic_decompose(t)) {
    const TreeNode& nd = nodes_[node_index(start, end)];
    if (!nd.r) throw std::logic_error("get_prefix_sum: missing response");
    if (out.empty()) {
      out = *nd.r;
    } else {
      add_in(out, *nd.r);
    }
  }
  return out;
}

void PrefixTree::adjust_path(std::size_t t, const Vec& delta) {
  if (t < 1 || t > filled_) throw std::out_of_range("adjust_path: t outside [1, filled]");
  for (std::size_t x = leaf_index(t); x >= 1; x /= 2) {
    TreeNode& nd = nodes_[x];
    if (nd.u.empty()) nd.u = zeros(delta.size());
    add_in(nd.u, delta);
    if (x == 1) break;
  }
}

void PrefixTree::remove_last_leaf() {
  if (filled_ == 0) throw std::logic_error("remove_last_leaf: empty tree");
  const std::size_t t = filled_;
  nodes_[leaf_index(t)] = TreeNode{};
  for (std::size_t x = leaf_index(t) / 2; x >= 1; x /= 2) {
    // Intervals ending exactly at t just lost their final element.
    if (nodes_[x].r && interval_end(x) == t) nodes_[x].r.reset();
    if (x == 1) break;
  }
  --filled_;
}

void PrefixTree::truncate(std::size_t k) {
  if (k > filled_) throw std::out_of_range("truncate: k > filled");
  for (std::size_t t = filled_; t > k; --t) {
    const std::size_t leaf = leaf_index(t);
    const Vec leaf_u = nodes_[leaf].u;
    for (std::size_t x = leaf / 2; x >= 1; x /= 2) {
      TreeNode& nd = nodes_[x];
      if (!leaf_u.empty() && !nd.u.empty()) sub_in(nd.u, leaf_u);
      if (nd.r && interval_end(x) > k) nd.r.reset();
      if (x == 1) break;
    }
    nodes_[leaf] = TreeNode{};
  }
  filled_ = k;
}

PrefixTree::Snapshot PrefixTree::snapshot() const {
  Snapshot snap;
  snap.capacity = capacity_;
  snap.filled = filled_;
  snap.dim = dim_;
  snap.anytime = anytime_;
  snap.sigma = sigma_;
  snap.budget_b = budget_b_;
  snap.rho = rho_;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const TreeNode& nd = nodes_[i];
    if (nd.u.empty() && !nd.r && !nd.w && !nd.z) continue;
    snap.nodes.emplace_back(bits_of(i), nd);
  }
  return snap;
}

PrefixTree PrefixTree::from_snapshot(const Snapshot& snap) {
  PrefixTree t(snap.capacity, snap.sigma);
  t.anytime_ = snap.anytime;
  t.budget_b_ = snap.budget_b;
  t.rho_ = snap.rho;
  t.dim_ = snap.dim;
  t.filled_ = snap.filled;
  for (const auto& [bits, nd] : snap.nodes) {
    t.nodes_[t.index_of(bits)] = nd;
  }
  return t;
}

void PrefixTree::grow() {
  const std::size_t new_capacity = capacity_ * 2;
  std::vector<TreeNode> fresh(2 * new_capacity);
  // Old node at depth k keeps its bit path with a leading '0': heap index
  // i -> i + 2^k, i.e. i + bit_floor(i).
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].u.empty() && !nodes_[i].r && !nodes_[i].w && !nodes_[i].z) continue;
    fresh[i + std::bit_floor(i)] = std::move(nodes_[i]);
  }
  // The new root covers [1..2n]; its interval is incomplete, so no response.
  // Its u so far equals the old root's u.
  if (!fresh[2].u.empty()) fresh[1].u = fresh[2].u;
  nodes_ = std::move(fresh);
  capacity_ = new_capacity;
}

}  // namespace tvu
