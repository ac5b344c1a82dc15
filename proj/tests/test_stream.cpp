#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tvu/rng.hpp"
#include "tvu/runner.hpp"
#include "tvu/stream.hpp"
#include "tvu/vec.hpp"

using namespace tvu;

namespace {

QuerySpec point_spec(std::size_t d) {
  QuerySpec s;
  s.name = "point";
  s.sensitivity = 2.0;
  s.p = [d](const ModelHist&, const Vec& z, std::size_t) {
    if (z.size() != d) throw std::invalid_argument("bad point dim");
    return z;
  };
  return s;
}

UpdateRule mean_rule(std::size_t d) {
  UpdateRule r;
  r.name = "prefix-mean";
  r.w0 = zeros(d);
  r.update = [](const ModelHist&, const Vec& resp, std::size_t t) {
    return scaled(resp, 1.0 / static_cast<double>(t));
  };
  return r;
}

void check_state_consistency(const StreamEngine& eng) {
  const LearnState& st = eng.state();
  CHECK(st.data.size() == eng.size());
  CHECK(st.perm.size() == eng.size());
  CHECK(st.models.size() == eng.size() + 1);
  std::vector<std::size_t> ids = st.perm;
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());  // all distinct
}

}  // namespace

TEST_CASE("weak inserts never retrain and cost one query each") {
  Rng rng(51);
  std::vector<Vec> initial = {{0.1, 0.2}, {0.3, -0.1}, {-0.2, 0.4}};
  StreamEngine eng(StreamMode::weak, initial, point_spec(2), mean_rule(2), 0.5, rng);
  CHECK(eng.size() == 3);
  for (int i = 0; i < 20; ++i) {
    StreamRequest req;
    req.kind = StreamRequest::Kind::insert;
    req.point = rng.gaussian_vec(2);
    const StreamStepReport rep = eng.step(req, rng);
    CHECK_FALSE(rep.retrained);
    CHECK(rep.queries == 1);
    CHECK(rep.size_after == 3 + static_cast<std::size_t>(i) + 1);
  }
  CHECK(eng.retrain_count() == 0);
  CHECK(eng.size() == 23);
  CHECK(eng.state().tree.capacity() == 32);  // grown 4 -> 8 -> 16 -> 32
  check_state_consistency(eng);
  // weak mode never permutes: ids arrive in order
  for (std::size_t i = 0; i < eng.size(); ++i) CHECK(eng.state().perm[i] == i);
}

TEST_CASE("weak deletes shrink the stream and report their cost") {
  Rng rng(52);
  std::vector<Vec> initial;
  for (int i = 0; i < 8; ++i) initial.push_back(rng.gaussian_vec(2));
  StreamEngine eng(StreamMode::weak, initial, point_spec(2), mean_rule(2), 0.5, rng);
  StreamRequest req;
  req.kind = StreamRequest::Kind::remove;
  req.position = 3;
  const StreamStepReport rep = eng.step(req, rng);
  CHECK(rep.queries >= 2);
  CHECK(rep.size_after == 7);
  CHECK(eng.size() == 7);
  check_state_consistency(eng);
}

TEST_CASE("exact inserts land at a uniform position") {
  const std::size_t trials = 6000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = Rng::derive(53, i);
    StreamEngine eng(StreamMode::exact, {{1.0}, {2.0}}, point_spec(1),
                     mean_rule(1), 1.0, rng);
    StreamRequest req;
    req.kind = StreamRequest::Kind::insert;
    req.point = {9.0};
    eng.step(req, rng);
    const std::vector<Vec>& data = eng.state().data;
    REQUIRE(data.size() == 3);
    bool found = false;
    for (std::size_t pos = 0; pos < 3; ++pos) {
      if (data[pos] == Vec{9.0}) {
        ++counts[pos];
        found = true;
        break;
      }
    }
    REQUIRE(found);
  }
  // each slot expects trials/3 = 2000; 2000 +- 200 is > 5 binomial sd
  for (std::size_t pos = 0; pos < 3; ++pos) {
    CHECK(counts[pos] >= 1800);
    CHECK(counts[pos] <= 2200);
  }
}

TEST_CASE("exact mode stays consistent through a mixed stream") {
  Rng rng(54);
  std::vector<Vec> initial;
  for (int i = 0; i < 4; ++i) initial.push_back(rng.gaussian_vec(2));
  StreamEngine eng(StreamMode::exact, initial, point_spec(2), mean_rule(2), 0.4, rng);
  for (std::size_t t = 0; t < 30; ++t) {
    StreamRequest req;
    if (t % 2 == 0 || eng.size() < 3) {
      req.kind = StreamRequest::Kind::insert;
      req.point = rng.gaussian_vec(2);
    } else {
      req.kind = StreamRequest::Kind::remove;
      req.position = 1 + (t * 7) % eng.size();
    }
    const StreamStepReport rep = eng.step(req, rng);
    CHECK(rep.size_after == eng.size());
    check_state_consistency(eng);
  }
}

TEST_CASE("streamed weak models match a fresh run on the final sequence") {
  const SuiteResult sr = weak_stream_certificate(1200, 16.0, 505);
  CHECK(sr.tests > 0);
  CHECK(sr.pass(0.01));
}

TEST_CASE("insert-only weak benchmark reports zero retrains") {
  const StreamBenchResult res = run_weak_stream_bench(10, 16, 30, 0, 1.0, 606);
  CHECK(res.streams == 10);
  CHECK(res.inserts_per_stream == 30);
  CHECK(res.deletes_per_stream == 0);
  CHECK(res.mean_retrains == 0.0);
  CHECK(res.max_retrains == 0);
}

TEST_CASE("stream script parsing") {
  const auto reqs = parse_stream_script("I 0.5,1.5\nD 2\n# full comment\n\nI -1.0 # tail\n");
  REQUIRE(reqs.size() == 3);
  CHECK(reqs[0].kind == StreamRequest::Kind::insert);
  CHECK(reqs[0].point == Vec{0.5, 1.5});
  CHECK(reqs[1].kind == StreamRequest::Kind::remove);
  CHECK(reqs[1].position == 2);
  CHECK(reqs[2].point == Vec{-1.0});

  CHECK_THROWS_AS(parse_stream_script("X 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_stream_script("I 1\nD 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_stream_script("I\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_stream_script("D x\n"), std::invalid_argument);
  try {
    parse_stream_script("I 1\nD nope\n");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("a stream needs a nonempty initial dataset") {
  Rng rng(55);
  CHECK_THROWS_AS(
      StreamEngine(StreamMode::weak, {}, point_spec(1), mean_rule(1), 1.0, rng),
      std::invalid_argument);
}
