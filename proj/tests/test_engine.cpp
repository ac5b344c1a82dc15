#include <algorithm>
#include <bit>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tvu/engine.hpp"
#include "tvu/rng.hpp"
#include "tvu/runner.hpp"
#include "tvu/stats.hpp"
#include "tvu/vec.hpp"

using namespace tvu;

namespace {

QuerySpec point_spec() {
  QuerySpec s;
  s.name = "identity";
  s.sensitivity = 2.0;
  s.p = [](const ModelHist&, const Vec& z, std::size_t) { return z; };
  return s;
}

UpdateRule mean_rule(std::size_t d) {
  UpdateRule r;
  r.name = "running-mean";
  r.w0 = zeros(d);
  r.update = [](const ModelHist&, const Vec& resp, std::size_t t) {
    return scaled(resp, 1.0 / static_cast<double>(t));
  };
  return r;
}

// Prefix sum of us[0..t), folded over the greedy dyadic blocks of [1..t] the
// way released responses are: each block left to right, leaves in append
// order. Matching the summation order makes noiseless comparisons bit-exact.
Vec dyadic_prefix(const std::vector<Vec>& us, std::size_t t) {
  Vec out;
  std::size_t start = 1;
  std::size_t rem = t;
  while (rem > 0) {
    const std::size_t len = std::bit_floor(rem);
    Vec block;
    for (std::size_t i = start; i < start + len; ++i) {
      if (block.empty()) {
        block = us[i - 1];
      } else {
        add_in(block, us[i - 1]);
      }
    }
    if (out.empty()) {
      out = std::move(block);
    } else {
      add_in(out, block);
    }
    start += len;
    rem -= len;
  }
  return out;
}

// Noiseless reference: the same algorithm run directly on `data`, no tree.
ModelHist brute_force_models(const std::vector<Vec>& data, const QuerySpec& spec,
                             const UpdateRule& rule) {
  ModelHist models{rule.w0};
  std::vector<Vec> us;
  for (std::size_t t = 1; t <= data.size(); ++t) {
    us.push_back(spec.p(models, data[t - 1], t));
    models.push_back(rule.update(models, dyadic_prefix(us, t), t));
  }
  return models;
}

}  // namespace

TEST_CASE("noise_scale formula") {
  CHECK(noise_scale(2.0, 8, 0.1) == doctest::Approx(480.0));
  CHECK_THROWS_AS(noise_scale(2.0, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_scale(-1.0, 8, 0.1), std::invalid_argument);
}

TEST_CASE("noiseless learning reproduces the direct run bit for bit") {
  Rng rng(81);
  std::vector<Vec> data;
  for (int i = 0; i < 11; ++i) data.push_back(rng.gaussian_vec(2));
  const QuerySpec spec = point_spec();
  const UpdateRule rule = mean_rule(2);
  LearnOptions opts;
  opts.sigma_override = 0.0;
  opts.permute = false;
  const LearnState st = tree_learn(data, spec, rule, 0.1, rng, opts);
  const ModelHist expect = brute_force_models(data, spec, rule);
  REQUIRE(st.models.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(st.models[i] == expect[i]);
  CHECK(st.queries_learn == 11);
  CHECK(st.models.front() == rule.w0);
  CHECK(model_of(st) == expect.back());
}

TEST_CASE("permutation bookkeeping is consistent") {
  Rng rng(82);
  std::vector<Vec> data;
  for (int i = 0; i < 9; ++i) data.push_back({static_cast<double>(i), 1.0});
  const LearnState st = tree_learn(data, point_spec(), mean_rule(2), 0.1, rng);
  std::vector<std::size_t> sorted = st.perm;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(9);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
  for (std::size_t i = 0; i < 9; ++i) CHECK(st.data[i] == data[st.perm[i]]);
  for (std::size_t row = 0; row < 9; ++row) {
    const std::size_t pos = position_of_row(st, row);
    CHECK(st.data[pos - 1] == data[row]);
  }
  CHECK_THROWS_AS(position_of_row(st, 9), std::out_of_range);
}

TEST_CASE("noiseless unlearning equals a direct run on the reduced data") {
  Rng rng(83);
  const QuerySpec spec = point_spec();
  const UpdateRule rule = mean_rule(2);
  LearnOptions opts;
  opts.sigma_override = 0.0;
  opts.permute = false;
  for (std::size_t n : {6u, 8u}) {
    std::vector<Vec> data;
    for (std::size_t i = 0; i < n; ++i) data.push_back(rng.gaussian_vec(2));
    for (std::size_t j = 1; j <= n; ++j) {
      LearnState st = tree_learn(data, spec, rule, 0.1, rng, opts);
      const UnlearnReport rep = tree_unlearn(st, j, rng);
      // The reduced dataset: the last point moves into slot j.
      std::vector<Vec> reduced = data;
      reduced[j - 1] = reduced.back();
      reduced.pop_back();
      const ModelHist expect = brute_force_models(reduced, spec, rule);
      REQUIRE(st.models.size() == expect.size());
      for (std::size_t t = 0; t < expect.size(); ++t) {
        REQUIRE(st.models[t].size() == expect[t].size());
        for (std::size_t c = 0; c < expect[t].size(); ++c) {
          CHECK(st.models[t][c] == doctest::Approx(expect[t][c]).epsilon(1e-9));
        }
      }
      CHECK(st.data.size() == n - 1);
      if (j == n) {
        CHECK(rep.couplings.empty());
        CHECK(rep.queries_made == 2);
      }
    }
  }
}

TEST_CASE("unlearn reports are internally consistent") {
  Rng rng(84);
  std::vector<Vec> data;
  for (int i = 0; i < 8; ++i) data.push_back(rng.gaussian_vec(2));
  for (int rep_i = 0; rep_i < 40; ++rep_i) {
    LearnOptions opts;
    opts.sigma_override = 1.5;  // heavy rejection regime
    LearnState st = tree_learn(data, point_spec(), mean_rule(2), 0.1, rng, opts);
    const std::size_t j = 1 + rng.integer(8);
    const UnlearnReport rep = tree_unlearn(st, j, rng);
    CHECK(rep.queries_made >= 2);
    std::size_t accepts = 0;
    for (std::size_t k = 0; k < rep.couplings.size(); ++k) {
      if (rep.couplings[k].second) {
        ++accepts;
      } else {
        CHECK(k + 1 == rep.couplings.size());  // a reject ends the walk
      }
    }
    CHECK(accepts == rep.accepted_nodes);
    if (rep.retrained) {
      REQUIRE(rep.resume_leaf.has_value());
      const std::size_t e = *rep.resume_leaf - 1;
      CHECK(rep.queries_made == 2 + (7 - e));
      CHECK_FALSE(rep.couplings.empty());
      CHECK_FALSE(rep.couplings.back().second);
    } else {
      CHECK(rep.queries_made == 2);
    }
    CHECK(st.models.size() == st.data.size() + 1);
    CHECK(st.tree.uniform_sigma() == 1.5);  // deletions never rescale noise
  }
}

TEST_CASE("deleting the last position needs no coupling") {
  Rng rng(85);
  std::vector<Vec> data;
  for (int i = 0; i < 5; ++i) data.push_back(rng.gaussian_vec(2));
  LearnOptions opts;
  opts.sigma_override = 2.0;
  opts.permute = false;
  LearnState st = tree_learn(data, point_spec(), mean_rule(2), 0.1, rng, opts);
  const Vec w_before_last = st.models[4];  // w_5, the model before step 5
  const UnlearnReport rep = tree_unlearn(st, 5, rng);
  CHECK(rep.couplings.empty());
  CHECK_FALSE(rep.retrained);
  CHECK(model_of(st) == w_before_last);
}

TEST_CASE("coupling walk visits exactly the live noisy path nodes") {
  // Full tree of 8, delete j = 5: the root's response went stale with the
  // removed 8th point, [5..8] and [8..8] are never noisy, so the only
  // couplings possible are the intervals ending at 5 and 6, bottom-up.
  Rng rng(86);
  std::vector<Vec> data;
  for (int i = 0; i < 8; ++i) data.push_back(rng.gaussian_vec(2));
  LearnOptions opts;
  opts.sigma_override = 1e9;  // accepts overwhelmingly likely
  opts.permute = false;
  LearnState st = tree_learn(data, point_spec(), mean_rule(2), 0.1, rng, opts);
  const UnlearnReport rep = tree_unlearn(st, 5, rng);
  const std::vector<std::size_t> want = {5, 6};
  REQUIRE(rep.couplings.size() <= want.size());
  for (std::size_t k = 0; k < rep.couplings.size(); ++k) {
    CHECK(rep.couplings[k].first == want[k]);
  }

  // Same shape for j = 2: intervals ending at 2 and 4.
  LearnState st2 = tree_learn(data, point_spec(), mean_rule(2), 0.1, rng, opts);
  const UnlearnReport rep2 = tree_unlearn(st2, 2, rng);
  const std::vector<std::size_t> want2 = {2, 4};
  REQUIRE(rep2.couplings.size() <= want2.size());
  for (std::size_t k = 0; k < rep2.couplings.size(); ++k) {
    CHECK(rep2.couplings[k].first == want2[k]);
  }
}

TEST_CASE("unlearn argument validation") {
  Rng rng(87);
  std::vector<Vec> data = {{1.0}, {2.0}};
  LearnState st = tree_learn(data, point_spec(), mean_rule(1), 0.1, rng);
  CHECK_THROWS_AS(tree_unlearn(st, 0, rng), std::out_of_range);
  CHECK_THROWS_AS(tree_unlearn(st, 3, rng), std::out_of_range);
  tree_unlearn(st, 1, rng);
  CHECK_THROWS_AS(tree_unlearn(st, 1, rng), std::invalid_argument);  // size 1
}

TEST_CASE("unlearned models match retraining in distribution") {
  // Small-scale version of the full certificate: learn 3 points, delete row
  // 0, compare against direct retraining on the other two.
  const std::vector<Vec> full = {{0.9}, {-0.4}, {0.3}};
  const std::vector<Vec> reduced = {{-0.4}, {0.3}};
  QuerySpec spec = point_spec();
  UpdateRule rule;
  rule.name = "affine";
  rule.w0 = {0.2};
  rule.update = [](const ModelHist&, const Vec& r, std::size_t) {
    Vec w = {0.2};
    axpy_in(w, -0.4, r);
    return w;
  };
  LearnOptions opts;
  opts.sigma_override = 0.8;
  const std::size_t trials = 4000;
  std::vector<double> unlearned, retrained;
  for (std::size_t i = 0; i < trials; ++i) {
    {
      Rng rng = Rng::derive(4242, 2 * i);
      LearnState st = tree_learn(full, spec, rule, 1.0, rng, opts);
      tree_unlearn(st, position_of_row(st, 0), rng);
      unlearned.push_back(model_of(st)[0]);
    }
    {
      Rng rng = Rng::derive(4242, 2 * i + 1);
      LearnState st = tree_learn(reduced, spec, rule, 1.0, rng, opts);
      retrained.push_back(model_of(st)[0]);
    }
  }
  CHECK(ks_two_sample(unlearned, retrained).p_value > 1e-3);
  CHECK(z_test_two_sample(unlearned, retrained) > 1e-3);
  CHECK(mean_of(unlearned) == doctest::Approx(mean_of(retrained)).epsilon(0.15));
}

TEST_CASE("single-point datasets learn but refuse deletion") {
  Rng rng(88);
  LearnState st = tree_learn({{1.0, 2.0}}, point_spec(), mean_rule(2), 0.1, rng);
  CHECK(st.models.size() == 2);
  CHECK_THROWS_AS(tree_unlearn(st, 1, rng), std::invalid_argument);
}
