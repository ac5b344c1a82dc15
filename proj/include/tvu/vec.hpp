// Small dense-vector helpers used throughout the library.
// Vectors are plain std::vector<double>; dimension mismatches throw.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tvu {

using Vec = std::vector<double>;
using ModelHist = std::vector<Vec>;  // w_1..w_t, oldest first

inline void require_same_dim(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("vector dimension mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }

inline void add_in(Vec& a, const Vec& b) {
  require_same_dim(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline void sub_in(Vec& a, const Vec& b) {
  require_same_dim(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
}

inline Vec add(Vec a, const Vec& b) {
  add_in(a, b);
  return a;
}

inline Vec sub(Vec a, const Vec& b) {
  sub_in(a, b);
  return a;
}

inline Vec scaled(Vec a, double s) {
  for (double& x : a) x *= s;
  return a;
}

inline Vec negated(Vec a) { return scaled(std::move(a), -1.0); }

inline void axpy_in(Vec& a, double s, const Vec& b) {
  require_same_dim(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace tvu
