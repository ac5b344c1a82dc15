// Streaming inserts and deletes over an anytime prefix tree whose per-height
// noise schedule keeps the total stability budget under rho regardless of how
// far the stream grows (level h of the tree spends rho / 2^{h+1}).
//
// weak mode: no permutation. Inserts append in arrival order (constant query
// cost, never a retrain); deletes run the coupling walk, so an insert-only
// stream triggers zero retrains and a stream with V deletes retrains O(rho V)
// times in expectation.
//
// exact mode: the initial dataset is permuted and each insert lands at a
// uniformly random position among size+1 slots (the displaced point moves to
// the end, preserving uniformity of the arrangement). A non-final insert
// shifts slot j's contribution and couples along that path before the
// displaced point is re-appended as a fresh step.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tvu/engine.hpp"
#include "tvu/rng.hpp"

namespace tvu {

enum class StreamMode { weak, exact };

struct StreamRequest {
  enum class Kind { insert, remove };
  Kind kind = Kind::insert;
  Vec point;                 // insert only
  std::size_t position = 0;  // remove only, 1-based
};

struct StreamStepReport {
  bool retrained = false;
  std::size_t queries = 0;
  std::size_t size_after = 0;
};

class StreamEngine {
 public:
  StreamEngine(StreamMode mode, std::vector<Vec> initial, const QuerySpec& spec,
               const UpdateRule& rule, double rho, Rng& rng);

  StreamStepReport step(const StreamRequest& req, Rng& rng);

  const LearnState& state() const { return st_; }
  const Vec& model() const { return model_of(st_); }
  std::size_t size() const { return st_.data.size(); }
  std::size_t retrain_count() const { return retrains_; }
  StreamMode mode() const { return mode_; }

 private:
  StreamStepReport insert_weak(const Vec& point, Rng& rng);
  StreamStepReport insert_exact(const Vec& point, Rng& rng);
  StreamStepReport remove_at(std::size_t position, Rng& rng);

  LearnState st_;
  StreamMode mode_;
  std::size_t retrains_ = 0;
  std::size_t next_row_id_ = 0;
};

// Parse a stream script: one request per line, "I v1,v2,..." inserts a point,
// "D k" deletes position k (1-based). '#' starts a comment.
std::vector<StreamRequest> parse_stream_script(const std::string& text);

}  // namespace tvu
