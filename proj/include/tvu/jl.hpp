// Gaussian Johnson-Lindenstrauss sketch: a k x d matrix with N(0, 1/k)
// entries. embed() maps features down, lift() transposes back up; inner
// products are preserved to within beta * ||u|| * ||v|| with probability
// 1 - gamma when k >= jl_dim(beta, gamma, n).
#pragma once

#include <cstddef>
#include <vector>

#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

class JlSketch {
 public:
  JlSketch(std::size_t k, std::size_t d, Rng& rng);
  static JlSketch identity(std::size_t d);  // k = d, exact pass-through

  std::size_t k() const { return rows_.size(); }
  std::size_t d() const { return rows_.empty() ? 0 : rows_[0].size(); }

  Vec embed(const Vec& x) const;  // Phi x, length k
  Vec lift(const Vec& y) const;   // Phi^T y, length d

  const std::vector<Vec>& rows() const { return rows_; }

 private:
  explicit JlSketch(std::vector<Vec> rows) : rows_(std::move(rows)) {}
  std::vector<Vec> rows_;  // k rows of length d
};

// Default documented dimension: ceil(8 * ln(2n / gamma) / beta^2).
std::size_t jl_dim(double beta, double gamma, std::size_t n);

}  // namespace tvu
