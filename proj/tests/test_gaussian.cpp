#include <cmath>
#include <limits>

#include "doctest.h"
#include "tvu/gaussian.hpp"
#include "tvu/rng.hpp"
#include "tvu/stats.hpp"
#include "tvu/vec.hpp"

using namespace tvu;

namespace {
// Independent normal CDF oracle via erf (the library uses erfc).
double phi_oracle(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }
}  // namespace

TEST_CASE("log density ratio matches hand-computed values") {
  // ((r-u)^2 - (r-u')^2) / (2 sigma^2)
  CHECK(log_density_ratio({0.0}, {1.0}, {1.0}, 1.0) == doctest::Approx(0.5));
  CHECK(log_density_ratio({0.0}, {1.0}, {0.5}, 1.0) == doctest::Approx(0.0));
  CHECK(log_density_ratio({0.0}, {1.0}, {0.0}, 1.0) == doctest::Approx(-0.5));
  // d = 2, sigma = 2: (4 - 0) / (2 * 4) = 0.5
  CHECK(log_density_ratio({0.0, 0.0}, {2.0, 0.0}, {2.0, 0.0}, 2.0) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(log_density_ratio({0.0}, {1.0}, {0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(log_density_ratio({0.0}, {1.0, 2.0}, {0.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("reflection maps across the bisecting hyperplane") {
  // e = (1,0): u' + (I - 2ee^T)(r - u) = (2,0) + (-0.5, 0.3) = (1.5, 0.3)
  const Vec out = reflect({0.0, 0.0}, {2.0, 0.0}, {0.5, 0.3});
  CHECK(out[0] == doctest::Approx(1.5));
  CHECK(out[1] == doctest::Approx(0.3));
  CHECK_THROWS_AS(reflect({1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("reflection is an isometry and an involution") {
  Rng rng(31);
  for (int it = 0; it < 100; ++it) {
    const Vec u = rng.gaussian_vec(3);
    Vec u_new = rng.gaussian_vec(3);
    u_new[0] += 1.0;  // keep the means distinct
    const Vec r = rng.gaussian_vec(3);
    const Vec ref = reflect(u, u_new, r);
    CHECK(dist(ref, u_new) == doctest::Approx(dist(r, u)).epsilon(1e-10));
    const Vec back = reflect(u_new, u, ref);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i] == doctest::Approx(r[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("couple accepts and rejects by the density ratio") {
  // ratio = +0.5: accept for every uniform
  const CoupleResult acc = couple({0.0}, {1.0}, {1.0}, 1.0, 0.999);
  CHECK(acc.accepted);
  CHECK(acc.response == Vec{1.0});
  // ratio = -0.5: accept iff unif <= exp(-0.5) = 0.6065...
  CHECK(couple({0.0}, {1.0}, {0.0}, 1.0, 0.60).accepted);
  const CoupleResult rej = couple({0.0}, {1.0}, {0.0}, 1.0, 0.61);
  CHECK_FALSE(rej.accepted);
  // reflection of r = u across the hyperplane is u'
  CHECK(rej.response[0] == doctest::Approx(1.0));
  // unif = 0 accepts any finite ratio
  CHECK(couple({0.0}, {1.0}, {-50.0}, 1.0, 0.0).accepted);
}

TEST_CASE("inverted variant flips the accept ratio") {
  // Standard ratio -0.5 rejects at unif 0.61; inverted (ratio +0.5) accepts.
  CHECK(couple({0.0}, {1.0}, {0.0}, 1.0, 0.61, CouplingVariant::inverted).accepted);
  // Standard ratio +0.5 accepts; inverted rejects and reflects r=u' onto u.
  const CoupleResult rej =
      couple({0.0}, {1.0}, {1.0}, 1.0, 0.61, CouplingVariant::inverted);
  CHECK_FALSE(rej.accepted);
  CHECK(rej.response[0] == doctest::Approx(0.0));
}

TEST_CASE("sigma = 0 degenerates to exact equality of means") {
  const CoupleResult same = couple({1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, 0.0, 0.5);
  CHECK(same.accepted);
  const CoupleResult diff = couple({1.0, 2.0}, {1.0, 2.5}, {1.0, 2.0}, 0.0, 0.5);
  CHECK_FALSE(diff.accepted);
  CHECK(diff.response == Vec{1.0, 2.5});
}

TEST_CASE("gaussian_tv matches the closed form") {
  CHECK(gaussian_tv(0.0, 1.0) == doctest::Approx(0.0));
  CHECK(gaussian_tv(0.8, 1.0) == doctest::Approx(2.0 * phi_oracle(0.4) - 1.0));
  CHECK(gaussian_tv(3.0, 0.5) == doctest::Approx(2.0 * phi_oracle(3.0) - 1.0));
  CHECK(gaussian_tv(0.5, 0.0) == 1.0);
  CHECK(gaussian_tv(0.0, 0.0) == 0.0);
}

TEST_CASE("coupling disagreement rate equals the TV distance") {
  const Vec u = {0.3, -0.2};
  const Vec u_new = {-0.5, 0.4};  // ||u - u'|| = 1
  const double sigma = 1.0;
  const double tv = gaussian_tv(dist(u, u_new), sigma);
  Rng rng(12345);
  const int n = 60000;
  int disagree = 0;
  Vec mean = zeros(2);
  std::vector<double> coord0;
  coord0.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec r = sample_gaussian(u, sigma, rng);
    const CoupleResult out = couple(u, u_new, r, sigma, rng.uniform());
    if (!out.accepted) ++disagree;
    add_in(mean, out.response);
    coord0.push_back(out.response[0]);
  }
  const double freq = static_cast<double>(disagree) / n;
  CHECK(freq == doctest::Approx(tv).epsilon(0.04));
  CHECK(std::fabs(freq - tv) < 0.01);
  // The output marginal is N(u', sigma^2 I).
  CHECK(mean[0] / n == doctest::Approx(u_new[0]).epsilon(0.05));
  CHECK(mean[1] / n == doctest::Approx(u_new[1]).epsilon(0.05));
  CHECK(mean_of(coord0) == doctest::Approx(u_new[0]).epsilon(0.05));
  CHECK(variance_of(coord0) == doctest::Approx(sigma * sigma).epsilon(0.03));
  // Same-distribution KS against a fresh target sample.
  std::vector<double> fresh(coord0.size());
  for (double& x : fresh) x = u_new[0] + sigma * rng.gaussian();
  CHECK(ks_two_sample(coord0, fresh).p_value > 1e-3);
}

TEST_CASE("sample_gaussian at sigma 0 is the mean and consumes no randomness") {
  Rng a(7), b(7);
  const Vec m = {1.0, -2.0};
  CHECK(sample_gaussian(m, 0.0, a) == m);
  CHECK(a.uniform() == b.uniform());
}
