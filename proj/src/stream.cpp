#include "tvu/stream.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace tvu {

StreamEngine::StreamEngine(StreamMode mode, std::vector<Vec> initial,
                           const QuerySpec& spec, const UpdateRule& rule,
                           double rho, Rng& rng)
    : st_{PrefixTree::anytime(std::bit_ceil(std::max<std::size_t>(initial.size(), 1)),
                              spec.sensitivity, rho),
          {},
          {},
          ModelHist{rule.w0},
          spec,
          rule,
          rho,
          0},
      mode_(mode) {
  if (initial.empty()) throw std::invalid_argument("stream: empty initial dataset");
  const std::size_t n = initial.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  if (mode_ == StreamMode::exact) perm = rng.permutation(n);
  st_.perm = perm;
  st_.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) st_.data[i] = initial[perm[i]];
  next_row_id_ = n;
  tree_learn_from(st_, 1, rng);
}

StreamStepReport StreamEngine::step(const StreamRequest& req, Rng& rng) {
  if (req.kind == StreamRequest::Kind::insert) {
    return mode_ == StreamMode::weak ? insert_weak(req.point, rng)
                                     : insert_exact(req.point, rng);
  }
  return remove_at(req.position, rng);
}

StreamStepReport StreamEngine::insert_weak(const Vec& point, Rng& rng) {
  st_.data.push_back(point);
  st_.perm.push_back(next_row_id_++);
  const std::size_t before = st_.queries_learn;
  tree_learn_from(st_, st_.data.size(), rng);
  return {false, st_.queries_learn - before, st_.data.size()};
}

StreamStepReport StreamEngine::insert_exact(const Vec& point, Rng& rng) {
  const std::size_t m = st_.data.size();
  const std::size_t j = 1 + static_cast<std::size_t>(rng.integer(m + 1));
  if (j == m + 1) {
    // Landing past the end is a plain append.
    StreamStepReport rep = insert_weak(point, rng);
    return rep;
  }
  StreamStepReport rep;
  // The new point takes slot j; the displaced point re-enters at the end.
  const Vec z_old = st_.data[j - 1];
  const ModelHist hist_j(st_.models.begin(),
                         st_.models.begin() + static_cast<std::ptrdiff_t>(j));
  const Vec g = st_.spec.p(hist_j, z_old, j);
  const Vec g_new = st_.spec.p(hist_j, point, j);
  rep.queries = 2;

  st_.data[j - 1] = point;
  st_.data.push_back(z_old);
  st_.perm.push_back(st_.perm[j - 1]);
  st_.perm[j - 1] = next_row_id_++;
  st_.tree.node_mut(st_.tree.leaf_index(j)).z =
      static_cast<std::int64_t>(st_.perm[j - 1]);

  const Vec delta = sub(g_new, g);
  st_.tree.adjust_path(j, delta);

  // Same walk as deletion, but no node went stale: a full tree couples at its
  // root too (the extended run re-releases that interval).
  bool rejected = false;
  std::size_t reject_end = 0;
  for (std::size_t x = st_.tree.leaf_index(j); x >= 1; x /= 2) {
    if (st_.tree.is_noisy(x) && st_.tree.node(x).r) {
      const Vec& u_target = st_.tree.node(x).u;
      const Vec u_source = sub(u_target, delta);
      const CoupleResult out = couple(u_source, u_target, *st_.tree.node(x).r,
                                      st_.tree.sigma_at(x), rng.uniform());
      if (!out.accepted) {
        st_.tree.node_mut(x).r = out.response;
        rejected = true;
        reject_end = st_.tree.interval_end(x);
        break;
      }
    }
    if (x == 1) break;
  }

  const std::size_t before = st_.queries_learn;
  if (!rejected) {
    // Kept responses leave models w_1..w_{m+1} valid; append the displaced
    // point as step m+1.
    tree_learn_from(st_, m + 1, rng);
  } else {
    const std::size_t e = reject_end;
    st_.tree.truncate(e);
    st_.models.resize(e);
    const Vec r_e = st_.tree.get_prefix_sum(e);
    st_.models.push_back(st_.rule.update(st_.models, r_e, e));
    rep.retrained = true;
    ++retrains_;
    tree_learn_from(st_, e + 1, rng);
  }
  rep.queries += st_.queries_learn - before;
  rep.size_after = st_.data.size();
  return rep;
}

StreamStepReport StreamEngine::remove_at(std::size_t position, Rng& rng) {
  const UnlearnReport rep = tree_unlearn(st_, position, rng);
  if (rep.retrained) ++retrains_;
  return {rep.retrained, rep.queries_made, st_.data.size()};
}

std::vector<StreamRequest> parse_stream_script(const std::string& text) {
  std::vector<StreamRequest> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op)) continue;  // blank line
    StreamRequest req;
    if (op == "I") {
      req.kind = StreamRequest::Kind::insert;
      std::string rest;
      if (!(ls >> rest)) {
        throw std::invalid_argument("stream script line " + std::to_string(lineno) +
                                    ": insert needs coordinates");
      }
      std::istringstream cs(rest);
      std::string tok;
      while (std::getline(cs, tok, ',')) req.point.push_back(std::stod(tok));
      if (req.point.empty()) {
        throw std::invalid_argument("stream script line " + std::to_string(lineno) +
                                    ": empty point");
      }
    } else if (op == "D") {
      req.kind = StreamRequest::Kind::remove;
      if (!(ls >> req.position) || req.position < 1) {
        throw std::invalid_argument("stream script line " + std::to_string(lineno) +
                                    ": delete needs a 1-based position");
      }
    } else {
      throw std::invalid_argument("stream script line " + std::to_string(lineno) +
                                  ": unknown op '" + op + "'");
    }
    out.push_back(std::move(req));
  }
  return out;
}

}  // namespace tvu
