#include "tvu/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvu/stats.hpp"

namespace tvu {

double log_density_ratio(const Vec& u, const Vec& u_new, const Vec& r,
                         double sigma) {
  require_same_dim(u, u_new);
  require_same_dim(u, r);
  if (sigma <= 0.0) throw std::invalid_argument("log_density_ratio: sigma must be > 0");
  // (||r-u||^2 - ||r-u_new||^2) / (2 sigma^2), target over source.
  double num = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = r[i] - u[i];
    const double b = r[i] - u_new[i];
    num += a * a - b * b;
  }
  return num / (2.0 * sigma * sigma);
}

Vec reflect(const Vec& u, const Vec& u_new, const Vec& r) {
  require_same_dim(u, u_new);
  require_same_dim(u, r);
  Vec e = sub(u_new, u);
  const double len = norm(e);
  if (len == 0.0) throw std::invalid_argument("reflect: u and u_new coincide");
  for (double& x : e) x /= len;
  // u_new + (r - u) - 2 <e, r - u> e
  Vec out = sub(r, u);
  const double proj = dot(e, out);
  axpy_in(out, -2.0 * proj, e);
  add_in(out, u_new);
  return out;
}

CoupleResult couple(const Vec& u, const Vec& u_new, const Vec& r, double sigma,
                    double unif, CouplingVariant variant) {
  require_same_dim(u, u_new);
  require_same_dim(u, r);
  if (sigma < 0.0) throw std::invalid_argument("couple: negative sigma");
  if (sigma == 0.0) {
    if (u == u_new) return {true, r};
    return {false, u_new};
  }
  double log_ratio = log_density_ratio(u, u_new, r, sigma);
  if (variant == CouplingVariant::inverted) log_ratio = -log_ratio;
  // log(0) = -inf accepts whenever the ratio is finite; unif < 1 always.
  const double log_u = unif > 0.0 ? std::log(unif)
                                  : -std::numeric_limits<double>::infinity();
  if (log_u <= log_ratio) return {true, r};
  return {false, reflect(u, u_new, r)};
}

double gaussian_tv(double delta_norm, double sigma) {
  if (delta_norm < 0.0) throw std::invalid_argument("gaussian_tv: negative distance");
  if (sigma < 0.0) throw std::invalid_argument("gaussian_tv: negative sigma");
  if (sigma == 0.0) return delta_norm > 0.0 ? 1.0 : 0.0;
  return 2.0 * normal_cdf(delta_norm / (2.0 * sigma)) - 1.0;
}

Vec sample_gaussian(const Vec& mean, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("sample_gaussian: negative sigma");
  if (sigma == 0.0) return mean;
  Vec out = mean;
  for (double& x : out) x += sigma * rng.gaussian();
  return out;
}

}  // namespace tvu
