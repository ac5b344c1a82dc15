#include "tvu/jl.hpp"

#include <cmath>
#include <stdexcept>

namespace tvu {

JlSketch::JlSketch(std::size_t k, std::size_t d, Rng& rng) {
  if (k == 0 || d == 0) throw std::invalid_argument("JlSketch: zero dimension");
  rows_.resize(k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (Vec& row : rows_) {
    row.resize(d);
    for (double& x : row) x = scale * rng.gaussian();
  }
}

JlSketch JlSketch::identity(std::size_t d) {
  std::vector<Vec> rows(d, zeros(d));
  for (std::size_t i = 0; i < d; ++i) rows[i][i] = 1.0;
  return JlSketch(std::move(rows));
}

Vec JlSketch::embed(const Vec& x) const {
  Vec out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = dot(rows_[i], x);
  return out;
}

Vec JlSketch::lift(const Vec& y) const {
  if (y.size() != rows_.size()) throw std::invalid_argument("lift: dimension mismatch");
  Vec out = zeros(d());
  for (std::size_t i = 0; i < rows_.size(); ++i) axpy_in(out, y[i], rows_[i]);
  return out;
}

std::size_t jl_dim(double beta, double gamma, std::size_t n) {
  if (beta <= 0.0 || beta >= 1.0 || gamma <= 0.0 || gamma >= 1.0 || n == 0) {
    throw std::invalid_argument("jl_dim: bad parameters");
  }
  const double k = 8.0 * std::log(2.0 * static_cast<double>(n) / gamma) / (beta * beta);
  return static_cast<std::size_t>(std::ceil(k));
}

}  // namespace tvu
