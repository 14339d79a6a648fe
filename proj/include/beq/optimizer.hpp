#pragma once

// Cost model and plan rewrites over the block-expression tree: local cost of
// the nodes a rewrite touches, merge/inject mutations with exact undo, and
// the greedy level-by-level driver that keeps only cost-reducing rewrites.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "beq/betree.hpp"
#include "beq/bgp_engine.hpp"
#include "beq/store.hpp"

namespace beq {

inline double f_and(double a, double b, double c) { return a * b * c; }
inline double f_union(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}
inline double f_optional(double a, double b) { return a * b; }

struct LocalCost {
  double bgpCost = 0.0;
  double algebraCost = 0.0;
  double total() const { return bgpCost + algebraCost; }
};

inline double delta_cost(const LocalCost& before, const LocalCost& after) {
  return after.total() - before.total();
}

// Result-size estimate of a subtree: blocks from the evaluation engine,
// joins (sibling lists, optional) multiply, union adds.
inline double node_result_size(const Store& store, CardEstimator& est,
                               const BeNode* n) {
  switch (n->kind) {
    case BeNode::Kind::Bgp:
      return n->bgp.triples.empty() ? 1.0 : est.estimate(store, n->bgp);
    case BeNode::Kind::Group: {
      double p = 1.0;
      for (const auto& c : n->children) p *= node_result_size(store, est, c.get());
      return p;
    }
    case BeNode::Kind::Union: {
      double s = 0.0;
      for (const auto& c : n->children) s += node_result_size(store, est, c.get());
      return s;
    }
    case BeNode::Kind::Optional:
      return node_result_size(store, est, n->children[0].get());
  }
  return 1.0;
}

// Evaluation cost of one block node per the engine's plan.
inline double bgp_node_cost(const Store& store, CardEstimator& est,
                            const BeNode* n) {
  if (n->bgp.triples.empty()) return 0.0;
  return est.plan(store, n->bgp).total_cost();
}

namespace detail {

inline std::size_t index_of(const BeNode* parent, const BeNode* child) {
  for (std::size_t i = 0; i < parent->children.size(); ++i)
    if (parent->children[i].get() == child) return i;
  throw std::logic_error("optimizer: node is not a child of its parent");
}

// Joint size of all siblings on one side of the child at `idx` (empty = 1).
inline double siblings_size(const Store& store, CardEstimator& est,
                            const BeNode* parent, std::size_t idx,
                            bool leftSide) {
  double p = 1.0;
  for (std::size_t k = 0; k < parent->children.size(); ++k) {
    if (leftSide ? k < idx : k > idx)
      p *= node_result_size(store, est, parent->children[k].get());
  }
  return p;
}

inline std::string describe_block(const Bgp& b) {
  if (b.triples.empty()) return "{}";
  std::string s = "{" + render_triple(b.triples[0]);
  if (b.triples.size() > 1)
    s += " ..(+" + std::to_string(b.triples.size() - 1) + ")";
  return s + "}";
}

}  // namespace detail

// Identifies a merge: a source block, a sibling union, and per branch the
// block chosen to absorb the source (nullptr = branch takes an uncoalesced
// copy as its new leftmost child).
struct MergeContext {
  BeNode* group = nullptr;
  std::size_t sourceIdx = 0;
  std::size_t targetIdx = 0;
  std::vector<BeNode*> branchChoice;
};

// Identifies an inject: a source block, a sibling optional to its right, and
// the block of the optional's body that absorbs a copy of the source.
struct InjectContext {
  BeNode* group = nullptr;
  std::size_t sourceIdx = 0;
  std::size_t targetIdx = 0;
  BeNode* affected = nullptr;
};

// A merge may not move the source across an optional sibling (that would
// change the left operand of the left-outer-join), and must leave at least
// one other contributing sibling ahead of any optional the source feeds.
inline bool merge_positional_ok(const BeNode* group, std::size_t sourceIdx,
                                std::size_t targetIdx) {
  std::size_t lo = std::min(sourceIdx, targetIdx);
  std::size_t hi = std::max(sourceIdx, targetIdx);
  for (std::size_t k = lo + 1; k < hi; ++k)
    if (group->children[k]->kind == BeNode::Kind::Optional) return false;
  for (std::size_t k = sourceIdx + 1; k < group->children.size(); ++k) {
    if (group->children[k]->kind != BeNode::Kind::Optional) continue;
    bool other = false;
    for (std::size_t m = 0; m < k && !other; ++m) {
      if (m == sourceIdx) continue;
      const BeNode* c = group->children[m].get();
      if (c->kind == BeNode::Kind::Optional) continue;
      if (c->kind == BeNode::Kind::Bgp && c->bgp.triples.empty()) continue;
      other = true;
    }
    if (!other) return false;
  }
  return true;
}

// Cost of the nodes a merge touches: the source, each branch's affected
// block (a virtual leftmost empty slot where no choice exists), and the
// union/sibling join terms. `costScale` sets the cost unit.
inline LocalCost local_cost_merge(const Store& store, CardEstimator& est,
                                  const MergeContext& x,
                                  double costScale = 1.0) {
  const BeNode* src = x.group->children[x.sourceIdx].get();
  const BeNode* tgt = x.group->children[x.targetIdx].get();
  LocalCost c;
  c.bgpCost += bgp_node_cost(store, est, src);
  c.algebraCost +=
      f_and(node_result_size(store, est, src),
            detail::siblings_size(store, est, x.group, x.sourceIdx, true),
            detail::siblings_size(store, est, x.group, x.sourceIdx, false));
  std::vector<double> branchSizes;
  for (std::size_t j = 0; j < tgt->children.size(); ++j) {
    const BeNode* branch = tgt->children[j].get();
    branchSizes.push_back(node_result_size(store, est, branch));
    const BeNode* b = x.branchChoice[j];
    if (b) {
      std::size_t bi = detail::index_of(branch, b);
      c.bgpCost += bgp_node_cost(store, est, b);
      c.algebraCost += f_and(node_result_size(store, est, b),
                             detail::siblings_size(store, est, branch, bi, true),
                             detail::siblings_size(store, est, branch, bi, false));
    } else {
      double all = 1.0;
      for (const auto& bc : branch->children)
        all *= node_result_size(store, est, bc.get());
      c.algebraCost += f_and(1.0, 1.0, all);
    }
  }
  c.algebraCost += f_union(branchSizes);
  c.bgpCost *= costScale;
  c.algebraCost *= costScale;
  return c;
}

inline LocalCost local_cost_inject(const Store& store, CardEstimator& est,
                                   const InjectContext& x,
                                   double costScale = 1.0) {
  const BeNode* src = x.group->children[x.sourceIdx].get();
  const BeNode* tgt = x.group->children[x.targetIdx].get();
  const BeNode* inner = tgt->children[0].get();
  std::size_t bi = detail::index_of(inner, x.affected);
  LocalCost c;
  c.bgpCost += bgp_node_cost(store, est, src);
  c.bgpCost += bgp_node_cost(store, est, x.affected);
  c.algebraCost +=
      f_and(node_result_size(store, est, src),
            detail::siblings_size(store, est, x.group, x.sourceIdx, true),
            detail::siblings_size(store, est, x.group, x.sourceIdx, false));
  c.algebraCost += f_and(node_result_size(store, est, x.affected),
                         detail::siblings_size(store, est, inner, bi, true),
                         detail::siblings_size(store, est, inner, bi, false));
  c.algebraCost += f_optional(node_result_size(store, est, src),
                              node_result_size(store, est, inner));
  c.bgpCost *= costScale;
  c.algebraCost *= costScale;
  return c;
}

struct MergeToken {
  std::vector<TriplePattern> sourceTriples;
  struct BranchEdit {
    BeNode* branch = nullptr;
    bool inserted = false;  // new leftmost copy vs. prepended into a block
  };
  std::vector<BranchEdit> edits;
};

// The source's patterns move into every branch (prepended into the chosen
// block, or as a new leftmost block); the source stays behind empty.
// Updates x.branchChoice so nullptr entries point at the inserted copies.
inline MergeToken apply_merge(MergeContext& x) {
  BeNode* src = x.group->children[x.sourceIdx].get();
  BeNode* tgt = x.group->children[x.targetIdx].get();
  if (src->kind != BeNode::Kind::Bgp || src->bgp.triples.empty() ||
      tgt->kind != BeNode::Kind::Union ||
      x.branchChoice.size() != tgt->children.size())
    throw std::logic_error("apply_merge: invalid context");
  MergeToken tok;
  tok.sourceTriples = src->bgp.triples;
  for (std::size_t j = 0; j < tgt->children.size(); ++j) {
    BeNode* branch = tgt->children[j].get();
    BeNode* b = x.branchChoice[j];
    if (b) {
      b->bgp.triples.insert(b->bgp.triples.begin(), tok.sourceTriples.begin(),
                            tok.sourceTriples.end());
      tok.edits.push_back({branch, false});
    } else {
      Bgp copy;
      copy.triples = tok.sourceTriples;
      branch->children.insert(branch->children.begin(),
                              make_bgp_node(std::move(copy)));
      x.branchChoice[j] = branch->children.front().get();
      tok.edits.push_back({branch, true});
    }
  }
  src->bgp.triples.clear();
  return tok;
}

inline void undo_merge(MergeContext& x, const MergeToken& tok) {
  BeNode* src = x.group->children[x.sourceIdx].get();
  std::size_t n = tok.sourceTriples.size();
  for (std::size_t j = 0; j < tok.edits.size(); ++j) {
    const MergeToken::BranchEdit& e = tok.edits[j];
    if (e.inserted) {
      e.branch->children.erase(e.branch->children.begin());
      x.branchChoice[j] = nullptr;
    } else {
      auto& ts = x.branchChoice[j]->bgp.triples;
      ts.erase(ts.begin(), ts.begin() + long(n));
    }
  }
  src->bgp.triples = tok.sourceTriples;
}

struct InjectToken {
  std::size_t added = 0;
};

// A copy of the source's patterns is prepended into the affected block of
// the optional's body; the source itself is retained.
inline InjectToken apply_inject(InjectContext& x) {
  BeNode* src = x.group->children[x.sourceIdx].get();
  BeNode* tgt = x.group->children[x.targetIdx].get();
  if (src->kind != BeNode::Kind::Bgp || src->bgp.triples.empty() ||
      tgt->kind != BeNode::Kind::Optional || x.targetIdx <= x.sourceIdx ||
      x.affected == nullptr)
    throw std::logic_error("apply_inject: invalid context");
  x.affected->bgp.triples.insert(x.affected->bgp.triples.begin(),
                                 src->bgp.triples.begin(),
                                 src->bgp.triples.end());
  return {src->bgp.triples.size()};
}

inline void undo_inject(InjectContext& x, const InjectToken& tok) {
  auto& ts = x.affected->bgp.triples;
  ts.erase(ts.begin(), ts.begin() + long(tok.added));
}

struct MergeDecision {
  double delta = 0.0;            // most negative Δ-cost found (0 = none)
  std::vector<BeNode*> choice;   // per-branch choice realizing it
  int tuplesTried = 0;
};

struct AppliedTransform {
  enum Kind { Merge, Inject } kind;
  double delta = 0.0;
  std::string note;
};

// Trials every per-branch coalesce choice (branches without a joinable block
// contribute only the uncoalesced-copy option) and reports the cheapest;
// the tree is left unchanged.
inline MergeDecision decide_merge(const Store& store, CardEstimator& est,
                                  BeNode* group, std::size_t sourceIdx,
                                  std::size_t targetIdx,
                                  double costScale = 1.0) {
  MergeDecision out;
  BeNode* src = group->children[sourceIdx].get();
  BeNode* tgt = group->children[targetIdx].get();
  if (src->kind != BeNode::Kind::Bgp || src->bgp.triples.empty() ||
      tgt->kind != BeNode::Kind::Union || sourceIdx == targetIdx)
    return out;
  if (!merge_positional_ok(group, sourceIdx, targetIdx)) return out;
  std::vector<std::vector<BeNode*>> bsets;
  bool any = false;
  for (const auto& branch : tgt->children) {
    std::vector<BeNode*> bs;
    for (const auto& bc : branch->children)
      if (bc->kind == BeNode::Kind::Bgp &&
          bgps_share_join_var(src->bgp, bc->bgp))
        bs.push_back(bc.get());
    if (!bs.empty())
      any = true;
    else
      bs.push_back(nullptr);
    bsets.push_back(std::move(bs));
  }
  if (!any) return out;
  std::vector<std::size_t> pick(bsets.size(), 0);
  while (true) {
    MergeContext ctx{group, sourceIdx, targetIdx, {}};
    for (std::size_t j = 0; j < bsets.size(); ++j)
      ctx.branchChoice.push_back(bsets[j][pick[j]]);
    LocalCost before = local_cost_merge(store, est, ctx, costScale);
    MergeToken tok = apply_merge(ctx);
    LocalCost after = local_cost_merge(store, est, ctx, costScale);
    undo_merge(ctx, tok);
    ++out.tuplesTried;
    double d = delta_cost(before, after);
    if (d < out.delta) {
      out.delta = d;
      out.choice = ctx.branchChoice;  // restored to the trialed tuple by undo
    }
    std::size_t j = 0;
    while (j < pick.size() && ++pick[j] == bsets[j].size()) {
      pick[j] = 0;
      ++j;
    }
    if (j == pick.size()) break;
  }
  return out;
}

// Trials each joinable block of the optional's body independently; keeps the
// inject when it reduces cost, otherwise undoes it.
inline void decide_inject(const Store& store, CardEstimator& est,
                          BeNode* group, std::size_t sourceIdx,
                          std::size_t targetIdx,
                          std::vector<AppliedTransform>* log = nullptr,
                          double costScale = 1.0) {
  BeNode* src = group->children[sourceIdx].get();
  BeNode* tgt = group->children[targetIdx].get();
  if (src->kind != BeNode::Kind::Bgp || src->bgp.triples.empty() ||
      tgt->kind != BeNode::Kind::Optional || targetIdx <= sourceIdx)
    return;
  BeNode* inner = tgt->children[0].get();
  for (std::size_t k = 0; k < inner->children.size(); ++k) {
    BeNode* b = inner->children[k].get();
    if (b->kind != BeNode::Kind::Bgp ||
        !bgps_share_join_var(src->bgp, b->bgp))
      continue;
    InjectContext ctx{group, sourceIdx, targetIdx, b};
    LocalCost before = local_cost_inject(store, est, ctx, costScale);
    InjectToken tok = apply_inject(ctx);
    LocalCost after = local_cost_inject(store, est, ctx, costScale);
    double d = delta_cost(before, after);
    if (d >= 0.0) {
      undo_inject(ctx, tok);
      continue;
    }
    if (log)
      log->push_back({AppliedTransform::Inject, d,
                      "inject " + detail::describe_block(src->bgp) +
                          " into optional"});
  }
}

// One level: per block child, the best merge across all sibling unions
// (kept only when it reduces cost), then independent inject decisions for
// each optional to its right. A lone block before a union/optional is left
// alone — runtime pruning handles that shape without rewrite overhead.
inline void single_level_transform(const Store& store, CardEstimator& est,
                                   BeNode* p,
                                   std::vector<AppliedTransform>* log = nullptr,
                                   double costScale = 1.0) {
  auto& kids = p->children;
  if (kids.size() == 2 && kids[0]->kind == BeNode::Kind::Bgp &&
      (kids[1]->kind == BeNode::Kind::Union ||
       kids[1]->kind == BeNode::Kind::Optional))
    return;
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (kids[i]->kind != BeNode::Kind::Bgp || kids[i]->bgp.triples.empty())
      continue;
    double minCost = 0.0;
    std::size_t bestU = npos;
    MergeDecision best;
    for (std::size_t j = 0; j < kids.size(); ++j) {
      if (j == i || kids[j]->kind != BeNode::Kind::Union) continue;
      MergeDecision d = decide_merge(store, est, p, i, j, costScale);
      if (d.delta < minCost) {
        minCost = d.delta;
        bestU = j;
        best = std::move(d);
      }
    }
    if (bestU != npos) {
      std::string note = "merge " + detail::describe_block(kids[i]->bgp) +
                         " into union(" +
                         std::to_string(kids[bestU]->children.size()) +
                         " branches)";
      MergeContext ctx{p, i, bestU, best.choice};
      apply_merge(ctx);
      if (log) log->push_back({AppliedTransform::Merge, minCost, note});
      continue;  // merged away: not considered for injects
    }
    for (std::size_t j = i + 1; j < kids.size(); ++j)
      if (kids[j]->kind == BeNode::Kind::Optional)
        decide_inject(store, est, p, i, j, log, costScale);
  }
}

namespace detail {

inline void post_order_transform(const Store& store, CardEstimator& est,
                                 BeNode* p, std::vector<AppliedTransform>* log,
                                 double costScale) {
  for (const auto& c : p->children) {
    switch (c->kind) {
      case BeNode::Kind::Group:
        post_order_transform(store, est, c.get(), log, costScale);
        break;
      case BeNode::Kind::Union:
        for (const auto& b : c->children)
          post_order_transform(store, est, b.get(), log, costScale);
        break;
      case BeNode::Kind::Optional:
        post_order_transform(store, est, c->children[0].get(), log, costScale);
        break;
      case BeNode::Kind::Bgp:
        break;
    }
  }
  single_level_transform(store, est, p, log, costScale);
}

inline void annotate_estimates(const Store& store, CardEstimator& est,
                               BeNode* n) {
  if (n->kind == BeNode::Kind::Bgp) {
    n->estimatedResultSize = node_result_size(store, est, n);
    return;
  }
  for (const auto& c : n->children) annotate_estimates(store, est, c.get());
}

}  // namespace detail

// Whole-tree pass: children are fully transformed before their parent level
// (deeper rewrites settle first), then every block node is annotated with
// its estimated result size for use by runtime pruning.
inline void multi_level_transform(const Store& store, CardEstimator& est,
                                  BeTree& t,
                                  std::vector<AppliedTransform>* log = nullptr,
                                  double costScale = 1.0) {
  detail::post_order_transform(store, est, t.root.get(), log, costScale);
  detail::annotate_estimates(store, est, t.root.get());
}

}  // namespace beq
