#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tvu/dataset.hpp"
#include "tvu/engine.hpp"
#include "tvu/geometry.hpp"
#include "tvu/losses.hpp"
#include "tvu/rng.hpp"
#include "tvu/solvers.hpp"
#include "tvu/vec.hpp"

using namespace tvu;

namespace {

// Full-batch projected gradient descent, used as a convergence reference.
Vec pgd_oracle(const LossModel& loss, const ConvexBody& body,
               const std::vector<Vec>& rows, std::size_t steps, double lr) {
  Vec w = body.center;
  for (std::size_t s = 0; s < steps; ++s) {
    Vec g = zeros(w.size());
    for (const Vec& z : rows) add_in(g, loss.grad(w, z));
    axpy_in(w, -lr / static_cast<double>(rows.size()), g);
    w = body.project(w);
  }
  return w;
}

}  // namespace

TEST_CASE("ball body: lmo and projection") {
  const ConvexBody b = ball_body(zeros(2), 2.5);
  CHECK(b.diameter == 5.0);
  CHECK(b.lmo(Vec{3.0, 4.0}) == Vec{-1.5, -2.0});  // scale 2.5/5 is exact
  CHECK(b.lmo(Vec{0.0, 0.0}) == zeros(2));  // degenerate direction: the center
  CHECK(b.project(Vec{3.0, 4.0}) == Vec{1.5, 2.0});
  const Vec inside{0.5, -0.5};
  CHECK(b.project(inside) == inside);  // interior points come back untouched

  const ConvexBody off = ball_body(Vec{1.0, 1.0}, 2.0);
  CHECK(off.lmo(Vec{0.0, -2.0}) == Vec{1.0, 3.0});
  CHECK_THROWS_AS(ball_body(zeros(2), 0.0), std::invalid_argument);
}

TEST_CASE("box body: lmo, projection, diameter") {
  const ConvexBody b = box_body(Vec{-1.0, -1.0}, Vec{1.0, 1.0});
  CHECK(b.center == zeros(2));
  CHECK(b.diameter == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
  CHECK(b.lmo(Vec{1.0, -3.0}) == Vec{-1.0, 1.0});
  CHECK(b.project(Vec{2.0, 0.5}) == Vec{1.0, 0.5});
  CHECK(b.project(Vec{-3.0, 0.0}) == Vec{-1.0, 0.0});
  CHECK_THROWS_AS(box_body(Vec{1.0}, Vec{0.0}), std::invalid_argument);

  // lmo optimality against random feasible points
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    const Vec dir = rng.gaussian_vec(2);
    const Vec best = b.lmo(dir);
    const Vec probe = b.project(scaled(rng.gaussian_vec(2), 2.0));
    CHECK(dot(best, dir) <= dot(probe, dir) + 1e-12);
  }
}

TEST_CASE("glm row helpers") {
  CHECK(glm_features(Vec{1.0, 2.0, 3.0}) == Vec{1.0, 2.0});
  CHECK(glm_label(Vec{1.0, 2.0, 3.0}) == 3.0);
  CHECK_THROWS_AS(glm_features(Vec{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(glm_label(Vec{1.0}), std::invalid_argument);
}

TEST_CASE("logistic loss: constants, value, gradient") {
  const LossModel m = logistic_loss(1.5);
  CHECK(m.lipschitz == 1.5);
  CHECK(m.smoothness == doctest::Approx(0.5625).epsilon(1e-15));
  const Vec z{0.6, -0.8, 1.0};
  CHECK(m.value(zeros(2), z) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(logistic_loss(0.0), std::invalid_argument);

  // central finite differences against the analytic gradient
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    Vec w = scaled(rng.gaussian_vec(3), 0.5);
    Vec row = rng.gaussian_vec(3);
    row.push_back(rng.uniform() < 0.5 ? -1.0 : 1.0);
    const Vec g = m.grad(w, row);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-6;
      Vec wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (m.value(wp, row) - m.value(wm, row)) / (2.0 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("hinge loss: margin cases") {
  const LossModel m = hinge_loss(1.0);
  CHECK(m.smoothness == 0.0);
  CHECK(m.value(Vec{0.5}, Vec{1.0, 1.0}) == 0.5);
  CHECK(m.grad(Vec{0.5}, Vec{1.0, 1.0}) == Vec{-1.0});
  // exactly on the margin: the zero subgradient
  CHECK(m.value(Vec{1.0}, Vec{1.0, 1.0}) == 0.0);
  CHECK(m.grad(Vec{1.0}, Vec{1.0, 1.0}) == Vec{0.0});
  CHECK(m.grad(Vec{2.0}, Vec{1.0, 1.0}) == Vec{0.0});
  CHECK(m.value(Vec{-1.0}, Vec{1.0, 1.0}) == 2.0);
}

TEST_CASE("clipped quadratic: inside and outside the clip radius") {
  const LossModel m = clipped_quadratic(1.0);
  CHECK(m.lipschitz == 1.0);
  CHECK(m.smoothness == 1.0);
  CHECK(m.value(Vec{3.0, 0.0}, Vec{0.0, 0.0}) == 2.5);  // 1*3 - 0.5
  CHECK(m.grad(Vec{3.0, 0.0}, Vec{0.0, 0.0}) == Vec{1.0, 0.0});
  CHECK(m.value(Vec{0.5, 0.0}, Vec{0.0, 0.0}) == 0.125);
  CHECK(m.grad(Vec{0.5, 0.0}, Vec{0.0, 0.0}) == Vec{0.5, 0.0});
  CHECK_THROWS_AS(clipped_quadratic(0.0), std::invalid_argument);

  Rng rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const Vec w = rng.gaussian_vec(2);
    const Vec z = rng.gaussian_vec(2);
    if (std::abs(dist(w, z) - 1.0) < 1e-3) continue;  // keep off the kink
    const Vec g = m.grad(w, z);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-6;
      Vec wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (m.value(wp, z) - m.value(wm, z)) / (2.0 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("variance-reduced increments: hand values") {
  const ConvexBody body = ball_body(zeros(1), 5.0);
  const QuerySpec spec = vrfw_spec(clipped_quadratic(10.0), body);
  const Vec z{2.0};
  // t = 1 treats w_0 as w_1: p = 2 g(w_1) - g(w_1) = g(w_1)
  CHECK(spec.p({{0.0}}, z, 1) == Vec{-2.0});
  // t = 2: 3 g(w_2) - 2 g(w_1) = 3 (1-2) - 2 (0-2) = 1
  CHECK(spec.p({{0.0}, {1.0}}, z, 2) == Vec{1.0});
}

TEST_CASE("declared sensitivities") {
  const ConvexBody unit = ball_body(zeros(2), 1.0);
  CHECK(vrfw_spec(logistic_loss(1.0), unit).sensitivity == 3.0);  // 2(0.25*2 + 1)
  const ConvexBody half = ball_body(zeros(2), 0.5);
  CHECK(vrfw_spec(clipped_quadratic(1.0), half).sensitivity == 4.0);  // 2(1*1 + 1)
  CHECK(da_spec(logistic_loss(2.0)).sensitivity == 4.0);
}

TEST_CASE("increment sensitivity holds along genuine trajectories") {
  // Swapping one point moves the increment by at most 2G when the gradients
  // at w_t change, plus 2HD from the step between consecutive iterates.
  const double bound = 4.0;  // 2(1*1 + 1) for clipped_quadratic(1), radius 0.5
  const ConvexBody body = ball_body(zeros(2), 0.5);
  const LossModel loss = clipped_quadratic(1.0);
  const QuerySpec spec = vrfw_spec(loss, body);
  const UpdateRule rule = vrfw_rule(body);
  Rng rng(44);
  std::vector<Vec> data;
  for (int i = 0; i < 32; ++i) {
    data.push_back({rng.uniform() * 6.0 - 3.0, rng.uniform() * 6.0 - 3.0});
  }
  LearnOptions opts;
  opts.sigma_override = 0.0;
  const LearnState st = tree_learn(data, spec, rule, 1.0, rng, opts);
  for (std::size_t t = 1; t <= 32; ++t) {
    const ModelHist hist(st.models.begin(),
                         st.models.begin() + static_cast<std::ptrdiff_t>(t));
    for (int rep = 0; rep < 60; ++rep) {
      const Vec z{rng.uniform() * 6.0 - 3.0, rng.uniform() * 6.0 - 3.0};
      const Vec z2{rng.uniform() * 6.0 - 3.0, rng.uniform() * 6.0 - 3.0};
      CHECK(dist(spec.p(hist, z, t), spec.p(hist, z2, t)) <= bound + 1e-9);
    }
  }
}

TEST_CASE("frank-wolfe update: hand value and feasibility") {
  const ConvexBody body = ball_body(zeros(1), 1.0);
  const UpdateRule rule = vrfw_rule(body);
  CHECK(rule.w0 == zeros(1));
  // t = 1: v = lmo({2}/2) = {-1}, eta = 1/2: 0.5*0.5 - 0.5 = -0.25 exactly
  CHECK(rule.update({{0.5}}, Vec{2.0}, 1) == Vec{-0.25});

  // iterates stay inside the body under noiseless learning
  Rng rng(45);
  const ConvexBody ball2 = ball_body(zeros(2), 1.5);
  std::vector<Vec> data;
  for (int i = 0; i < 20; ++i) data.push_back(scaled(rng.gaussian_vec(2), 2.0));
  LearnOptions opts;
  opts.sigma_override = 0.0;
  const LearnState st = tree_learn(data, vrfw_spec(clipped_quadratic(1.0), ball2),
                                   vrfw_rule(ball2), 1.0, rng, opts);
  for (const Vec& w : st.models) CHECK(norm(w) <= 1.5 + 1e-9);
}

TEST_CASE("dual averaging step size and update") {
  CHECK(da_step_size(2.0, 16, 64, 0.25, 1.0) ==
        doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK_THROWS_AS(da_step_size(2.0, 16, 1, 0.25, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(da_step_size(2.0, 16, 64, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(da_step_size(2.0, 16, 64, 0.25, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(da_step_size(2.0, 0, 64, 0.25, 1.0), std::invalid_argument);

  const ConvexBody body = ball_body(zeros(2), 1.0);
  const UpdateRule rule = da_rule(body, 0.5);
  // w0 - 0.5 {4,0} = {-2,0}, projected back to the unit sphere
  CHECK(rule.update({zeros(2)}, Vec{4.0, 0.0}, 1) == Vec{-1.0, 0.0});
}

TEST_CASE("planted glm: both solvers beat the trivial model") {
  Rng rng(46);
  const SynthGlm glm = synth_glm(400, 3, 0.1, 0.05, rng);
  const LossModel loss = logistic_loss(1.0);
  const ConvexBody body = ball_body(zeros(3), 1.0);
  LearnOptions opts;
  opts.sigma_override = 0.0;

  LearnState fw = tree_learn(glm.rows, vrfw_spec(loss, body), vrfw_rule(body),
                             1.0, rng, opts);
  const Vec w_fw = model_of(fw);
  const double corr = dot(w_fw, glm.planted) / (norm(w_fw) * norm(glm.planted));
  CHECK(corr >= 0.6);
  const double risk_fw = empirical_risk(loss, w_fw, glm.rows);
  CHECK(risk_fw < std::log(2.0));  // strictly better than w = 0

  const Vec w_ref = pgd_oracle(loss, body, glm.rows, 300, 1.0);
  CHECK(risk_fw <= empirical_risk(loss, w_ref, glm.rows) + 0.05);

  const double eta = da_step_size(body.diameter, 3, 400, 0.25, loss.lipschitz);
  LearnState da = tree_learn(glm.rows, da_spec(loss), da_rule(body, eta), 1.0,
                             rng, opts);
  CHECK(empirical_risk(loss, model_of(da), glm.rows) < std::log(2.0));
}

TEST_CASE("empirical risk") {
  const LossModel loss = logistic_loss(1.0);
  const std::vector<Vec> rows = {{0.3, 0.4, 1.0}, {-0.5, 0.1, -1.0}};
  CHECK(empirical_risk(loss, zeros(2), rows) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_risk(loss, zeros(2), {}), std::invalid_argument);
}
