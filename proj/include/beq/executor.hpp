#pragma once

// BE-tree evaluation: left-to-right accumulation over each group's children
// with bag-semantics operators, optional candidate pruning of BGP leaves
// gated by a size threshold, and per-query statistics.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "beq/algebra.hpp"
#include "beq/betree.hpp"
#include "beq/bgp_engine.hpp"
#include "beq/optimizer.hpp"
#include "beq/store.hpp"

namespace beq {

struct ExecOptions {
  enum class Mode { Base, TT, CP, Full };
  Mode mode = Mode::Base;
  double fixedRatio = 0.01;  // candidate threshold as a fraction of |D|
  std::uint64_t seed = 1;
  int sampleSize = 100;
  std::int64_t timeoutUs = 0;  // 0 = unlimited; checked between child steps
};

// Raised when evaluation overruns ExecOptions::timeoutUs; the check runs
// between accumulation steps, so a single oversized step can overshoot.
struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool mode_prunes(ExecOptions::Mode m) {
  return m == ExecOptions::Mode::CP || m == ExecOptions::Mode::Full;
}
inline bool mode_transforms(ExecOptions::Mode m) {
  return m == ExecOptions::Mode::TT || m == ExecOptions::Mode::Full;
}

struct ExecStats {
  std::map<const BeNode*, double> perBgpResultSize;
  double joinSpace = 0.0;
  std::size_t prunedBgpCount = 0;
  std::chrono::microseconds wallTime{0};
  std::chrono::microseconds transformTime{0};
};

struct ExecResult {
  Bag rows;
  ExecStats stats;
};

namespace detail {

struct ExecCtx {
  const Store& store;
  ExecStats& stats;
  bool prune = false;
  bool adaptive = false;
  double fixedThreshold = 0.0;
  bool hasDeadline = false;
  std::chrono::steady_clock::time_point deadline{};
};

// Accumulated rows projected onto the variables they share with the block,
// deduplicated; empty `variables` means the rows constrain nothing here.
inline CandidateSet project_candidates(const Bag& r, const Bgp& bgp) {
  CandidateSet cs;
  std::vector<Variable> bvars;
  for (const TriplePattern& t : bgp.triples) collect_vars(t, bvars);
  for (const Variable& v : bvars) {
    for (const Mapping& m : r.rows)
      if (m.lookup(v)) {
        cs.variables.push_back(v);
        break;
      }
  }
  if (cs.variables.empty()) return cs;
  for (const Mapping& m : r.rows) {
    Mapping p;
    for (const Variable& v : cs.variables)
      if (auto id = m.lookup(v)) p.bind(v, *id);
    cs.rows.rows.push_back(std::move(p));
  }
  std::sort(cs.rows.rows.begin(), cs.rows.rows.end());
  cs.rows.rows.erase(
      std::unique(cs.rows.rows.begin(), cs.rows.rows.end()),
      cs.rows.rows.end());
  return cs;
}

inline Bag eval_bgp_child(ExecCtx& cx, const BeNode* node, const Bag* cand) {
  const Bgp& bgp = node->bgp;
  if (cx.prune && cand && !bgp.triples.empty()) {
    CandidateSet cs = project_candidates(*cand, bgp);
    if (cand->rows.empty() || !cs.variables.empty()) {
      double threshold = cx.fixedThreshold;
      if (cx.adaptive && node->estimatedResultSize >= 0.0)
        threshold = node->estimatedResultSize;
      if (double(cs.rows.rows.size()) < threshold) {
        ++cx.stats.prunedBgpCount;
        Bag out = evaluate_bgp(cx.store, bgp, &cs);
        cx.stats.perBgpResultSize[node] = double(out.rows.size());
        return out;
      }
    }
  }
  Bag out = evaluate_bgp(cx.store, bgp, nullptr);
  cx.stats.perBgpResultSize[node] = double(out.rows.size());
  return out;
}

// One group node: children fold left-to-right into r starting from the
// identity bag. Under pruning, the candidate for each child is the rows
// accumulated so far, or the caller's rows while nothing has accumulated.
inline Bag eval_group(ExecCtx& cx, const BeNode* group, const Bag* inherited) {
  Bag r = identity_bag();
  bool accumulated = false;
  for (const auto& cptr : group->children) {
    if (cx.hasDeadline && std::chrono::steady_clock::now() > cx.deadline)
      throw TimeoutError("evaluation exceeded the time budget");
    const BeNode* c = cptr.get();
    const Bag* cand = cx.prune ? (accumulated ? &r : inherited) : nullptr;
    switch (c->kind) {
      case BeNode::Kind::Bgp:
        r = join(r, eval_bgp_child(cx, c, cand));
        break;
      case BeNode::Kind::Group:
        r = join(r, eval_group(cx, c, cand));
        break;
      case BeNode::Kind::Union: {
        Bag u;
        for (const auto& br : c->children)
          u = union_bag(u, eval_group(cx, br.get(), cand));
        r = join(r, u);
        break;
      }
      case BeNode::Kind::Optional: {
        Bag o = eval_group(cx, c->children[0].get(), cand);
        r = left_outer_join(r, o);
        break;
      }
    }
    accumulated = true;
  }
  return r;
}

}  // namespace detail

inline ExecResult evaluate(const Store& store, const BeTree& t,
                           const ExecOptions& opts = {}) {
  ExecResult res;
  auto start = std::chrono::steady_clock::now();
  detail::ExecCtx cx{store, res.stats};
  cx.prune = mode_prunes(opts.mode);
  cx.adaptive = opts.mode == ExecOptions::Mode::Full;
  cx.fixedThreshold = opts.fixedRatio * double(store.size());
  if (opts.timeoutUs > 0) {
    cx.hasDeadline = true;
    cx.deadline = start + std::chrono::microseconds(opts.timeoutUs);
  }
  res.rows = detail::eval_group(cx, t.root.get(), nullptr);
  res.stats.joinSpace = join_space(t, res.stats.perBgpResultSize);
  res.stats.wallTime = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  return res;
}

// Each mapping restricted to `vars`; missing bindings stay absent and
// multiplicities are preserved.
inline Bag project_rows(const Bag& rows, const std::vector<Variable>& vars) {
  Bag out;
  out.rows.reserve(rows.rows.size());
  for (const Mapping& m : rows.rows) {
    Mapping p;
    for (const Variable& v : vars)
      if (auto id = m.lookup(v)) p.bind(v, *id);
    out.rows.push_back(std::move(p));
  }
  return out;
}

// Declared projection list, or for wildcard queries every variable of the
// body in first-appearance order.
inline std::vector<Variable> projection_vars(const Query& q) {
  if (!q.wildcard) return q.projection;
  std::vector<Variable> vars;
  collect_vars(q.body, vars);
  return vars;
}

struct PreparedQuery {
  BeTree tree;
  std::vector<AppliedTransform> transforms;
  std::string preText, postText;  // plan renderings for explain output
  std::chrono::microseconds transformTime{0};
};

// Builds the plan tree and, for the transforming modes, rewrites and
// annotates it; evaluation stays a separate step.
inline PreparedQuery prepare(const Store& store, const Query& q,
                             const ExecOptions& opts = {}) {
  PreparedQuery out;
  out.tree = build_betree(q);
  out.preText = betree_to_text(out.tree);
  if (mode_transforms(opts.mode)) {
    auto start = std::chrono::steady_clock::now();
    CardEstimator est(opts.seed, opts.sampleSize);
    multi_level_transform(store, est, out.tree, &out.transforms);
    out.transformTime =
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - start);
  }
  out.postText = betree_to_text(out.tree);
  return out;
}

}  // namespace beq
