#pragma once

// Evaluation-tree construction (group nodes, BGP leaves, n-ary UNION,
// OPTIONAL), its mapping back to a pattern tree, and the query-shape /
// join-space metrics.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "beq/ast.hpp"

namespace beq {

// A block of triple patterns evaluated as one unit. The empty block is the
// identity (evaluates to the singleton empty-mapping bag); transformations
// leave such markers behind so positions are preserved for undo.
struct Bgp {
  std::vector<TriplePattern> triples;
};

struct BeNode {
  enum class Kind { Group, Bgp, Union, Optional };
  Kind kind = Kind::Group;
  struct Bgp bgp;                                 // Bgp leaves
  std::vector<std::unique_ptr<BeNode>> children;  // Group items / Union
                                                  // branches / Optional's group
  double estimatedResultSize = -1.0;  // optimizer cache; < 0 = unset

  std::unique_ptr<BeNode> clone() const {
    auto out = std::make_unique<BeNode>();
    out->kind = kind;
    out->bgp = bgp;
    out->estimatedResultSize = estimatedResultSize;
    for (const auto& c : children) out->children.push_back(c->clone());
    return out;
  }
};

struct BeTree {
  std::unique_ptr<BeNode> root;     // always a Group
  std::vector<std::string> notes;   // rejected-hoist diagnostics for explain
};

inline std::unique_ptr<BeNode> make_group_node() {
  auto n = std::make_unique<BeNode>();
  n->kind = BeNode::Kind::Group;
  return n;
}
inline std::unique_ptr<BeNode> make_bgp_node(Bgp b) {
  auto n = std::make_unique<BeNode>();
  n->kind = BeNode::Kind::Bgp;
  n->bgp = std::move(b);
  return n;
}
inline std::unique_ptr<BeNode> make_union_node() {
  auto n = std::make_unique<BeNode>();
  n->kind = BeNode::Kind::Union;
  return n;
}
inline std::unique_ptr<BeNode> make_optional_node(std::unique_ptr<BeNode> group) {
  auto n = std::make_unique<BeNode>();
  n->kind = BeNode::Kind::Optional;
  n->children.push_back(std::move(group));
  return n;
}

inline void collect_vars(const BeNode& n, std::vector<Variable>& out) {
  if (n.kind == BeNode::Kind::Bgp) {
    for (const TriplePattern& t : n.bgp.triples) collect_vars(t, out);
  }
  for (const auto& c : n.children) collect_vars(*c, out);
}

inline std::vector<Variable> node_vars(const BeNode& n) {
  std::vector<Variable> out;
  collect_vars(n, out);
  return out;
}

// True when some triple of a and some triple of b share a subject/object
// variable, i.e. merging them keeps one connected component.
inline bool bgps_share_join_var(const Bgp& a, const Bgp& b) {
  for (const TriplePattern& x : a.triples)
    for (const TriplePattern& y : b.triples)
      if (coalescable(x, y)) return true;
  return false;
}

// Whether moving child j leftward to coalesce with child i may cross the
// intervening siblings. Crossing a UNION or OPTIONAL is allowed only when
// every variable the moved BGP shares with the crossed subtree is already
// bound by the coalescing target.
inline bool hoist_is_safe(const std::vector<std::unique_ptr<BeNode>>& children,
                          std::size_t i, std::size_t j) {
  std::vector<Variable> moving = node_vars(*children[j]);
  std::vector<Variable> target = node_vars(*children[i]);
  auto contains = [](const std::vector<Variable>& vs, const Variable& v) {
    for (const Variable& w : vs)
      if (w == v) return true;
    return false;
  };
  for (std::size_t k = i + 1; k < j; ++k) {
    const BeNode& crossed = *children[k];
    if (crossed.kind != BeNode::Kind::Union &&
        crossed.kind != BeNode::Kind::Optional)
      continue;  // joins commute freely with other joined siblings
    std::vector<Variable> crossedVars = node_vars(crossed);
    for (const Variable& v : moving)
      if (contains(crossedVars, v) && !contains(target, v)) return false;
  }
  return true;
}

namespace detail {

inline std::string render_triple(const TriplePattern& t) {
  auto one = [](const PatternTerm& pt) {
    return is_var(pt) ? "?" + as_var(pt).name : to_string(as_term(pt));
  };
  return one(t.s) + " " + one(t.p) + " " + one(t.o);
}

inline std::unique_ptr<BeNode> build_group(const PatternPtr& group,
                                           std::vector<std::string>& notes);

// Splices union branches that are groups holding nothing but another union.
inline void flatten_union_branches(BeNode& u) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t b = 0; b < u.children.size(); ++b) {
      BeNode& branch = *u.children[b];
      if (branch.children.size() == 1 &&
          branch.children[0]->kind == BeNode::Kind::Union) {
        std::vector<std::unique_ptr<BeNode>> grand =
            std::move(branch.children[0]->children);
        u.children.erase(u.children.begin() + b);
        for (std::size_t g = 0; g < grand.size(); ++g)
          u.children.insert(u.children.begin() + b + g, std::move(grand[g]));
        changed = true;
        break;
      }
    }
  }
}

inline void collect_union_branches(const PatternPtr& p,
                                   std::vector<PatternPtr>& out) {
  if (p->kind == GraphPattern::Kind::Union) {
    collect_union_branches(p->left, out);
    out.push_back(p->right);
    return;
  }
  out.push_back(p);
}

inline void flatten_items(const PatternPtr& p, BeNode& group,
                          std::vector<std::string>& notes) {
  switch (p->kind) {
    case GraphPattern::Kind::And:
      flatten_items(p->left, group, notes);
      flatten_items(p->right, group, notes);
      return;
    case GraphPattern::Kind::Optional: {
      flatten_items(p->left, group, notes);
      PatternPtr right = p->right->kind == GraphPattern::Kind::Group
                             ? p->right
                             : make_group(p->right);
      group.children.push_back(make_optional_node(build_group(right, notes)));
      return;
    }
    case GraphPattern::Kind::Union: {
      std::vector<PatternPtr> branches;
      collect_union_branches(p, branches);
      auto u = make_union_node();
      for (const PatternPtr& b : branches) {
        PatternPtr g = b->kind == GraphPattern::Kind::Group ? b : make_group(b);
        u->children.push_back(build_group(g, notes));
      }
      flatten_union_branches(*u);
      group.children.push_back(std::move(u));
      return;
    }
    case GraphPattern::Kind::Group:
      group.children.push_back(build_group(p, notes));
      return;
    case GraphPattern::Kind::Bgp:
      if (!p->triples.empty())
        group.children.push_back(make_bgp_node(Bgp{p->triples}));
      return;
  }
}

// Coalesces sibling BGP leaves into maximal blocks, hoisting later leaves to
// the leftmost constituent's position when the crossing is safe.
inline void coalesce_siblings(BeNode& group, std::vector<std::string>& notes) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < group.children.size() && !changed; ++i) {
      if (group.children[i]->kind != BeNode::Kind::Bgp) continue;
      if (group.children[i]->bgp.triples.empty()) continue;
      for (std::size_t j = i + 1; j < group.children.size() && !changed; ++j) {
        if (group.children[j]->kind != BeNode::Kind::Bgp) continue;
        if (group.children[j]->bgp.triples.empty()) continue;
        if (!bgps_share_join_var(group.children[i]->bgp,
                                 group.children[j]->bgp))
          continue;
        if (!hoist_is_safe(group.children, i, j)) {
          bool crossesOptional = false;
          for (std::size_t k = i + 1; k < j; ++k)
            if (group.children[k]->kind == BeNode::Kind::Optional)
              crossesOptional = true;
          std::string what = crossesOptional ? "OPTIONAL" : "UNION";
          notes.push_back("hoist rejected: " +
                          render_triple(group.children[j]->bgp.triples[0]) +
                          " would cross " + what +
                          " binding a shared variable");
          continue;
        }
        for (const TriplePattern& t : group.children[j]->bgp.triples)
          group.children[i]->bgp.triples.push_back(t);
        group.children.erase(group.children.begin() + j);
        changed = true;
      }
    }
  }
}

inline std::unique_ptr<BeNode> build_group(const PatternPtr& group,
                                           std::vector<std::string>& notes) {
  auto node = make_group_node();
  if (group->left) flatten_items(group->left, *node, notes);
  coalesce_siblings(*node, notes);
  return node;
}

}  // namespace detail

inline BeTree build_betree(const Query& q) {
  BeTree t;
  t.root = detail::build_group(q.body, t.notes);
  return t;
}

inline PatternPtr betree_to_pattern_node(const BeNode& g) {
  PatternPtr acc;
  auto chain = [&](PatternPtr item) {
    acc = acc ? make_and(acc, std::move(item)) : std::move(item);
  };
  for (const auto& child : g.children) {
    switch (child->kind) {
      case BeNode::Kind::Bgp:
        chain(make_bgp(child->bgp.triples));
        break;
      case BeNode::Kind::Group:
        chain(betree_to_pattern_node(*child));
        break;
      case BeNode::Kind::Union: {
        PatternPtr u;
        for (const auto& branch : child->children) {
          PatternPtr b = betree_to_pattern_node(*branch);
          u = u ? make_union(u, b) : b;
        }
        chain(u);
        break;
      }
      case BeNode::Kind::Optional: {
        if (!acc) acc = make_bgp({});
        acc = make_optional(acc, betree_to_pattern_node(*child->children[0]));
        break;
      }
    }
  }
  if (!acc) acc = make_bgp({});
  return make_group(acc);
}

inline PatternPtr betree_to_pattern(const BeTree& t) {
  return betree_to_pattern_node(*t.root);
}

// Number of BGP blocks in the pattern tree (empty markers don't count).
inline int count_bgp(const PatternPtr& p) {
  switch (p->kind) {
    case GraphPattern::Kind::Bgp:
      return p->triples.empty() ? 0 : 1;
    case GraphPattern::Kind::Group:
      return count_bgp(p->left);
    default:
      return count_bgp(p->left) + count_bgp(p->right);
  }
}

// Nesting depth: each brace group adds one level; BGPs are depth 0.
inline int depth(const PatternPtr& p) {
  switch (p->kind) {
    case GraphPattern::Kind::Bgp:
      return 0;
    case GraphPattern::Kind::Group:
      return depth(p->left) + 1;
    default:
      return std::max(depth(p->left), depth(p->right));
  }
}

// Product/sum recursion over the tree with actual BGP result sizes at the
// leaves: groups and OPTIONAL multiply into their level, UNION adds.
inline double join_space_node(const BeNode& n,
                              const std::map<const BeNode*, double>& bgpSizes) {
  switch (n.kind) {
    case BeNode::Kind::Bgp: {
      if (n.bgp.triples.empty()) return 1.0;
      auto it = bgpSizes.find(&n);
      if (it == bgpSizes.end())
        throw std::logic_error("join_space: missing BGP leaf size");
      return it->second;
    }
    case BeNode::Kind::Group: {
      double prod = 1.0;
      for (const auto& c : n.children) prod *= join_space_node(*c, bgpSizes);
      return prod;
    }
    case BeNode::Kind::Union: {
      double sum = 0.0;
      for (const auto& c : n.children) sum += join_space_node(*c, bgpSizes);
      return sum;
    }
    case BeNode::Kind::Optional:
      return join_space_node(*n.children[0], bgpSizes);
  }
  return 0.0;
}

inline double join_space(const BeTree& t,
                         const std::map<const BeNode*, double>& bgpSizes) {
  return join_space_node(*t.root, bgpSizes);
}

namespace detail {

inline void render_node(const BeNode& n, int indent, std::string& out) {
  out.append(std::size_t(indent) * 2, ' ');
  switch (n.kind) {
    case BeNode::Kind::Group:
      out += "GROUP\n";
      break;
    case BeNode::Kind::Bgp: {
      out += "BGP{";
      for (std::size_t i = 0; i < n.bgp.triples.size(); ++i) {
        if (i) out += " . ";
        out += render_triple(n.bgp.triples[i]);
      }
      out += "}\n";
      break;
    }
    case BeNode::Kind::Union:
      out += "UNION(" + std::to_string(n.children.size()) + " branches)\n";
      break;
    case BeNode::Kind::Optional:
      out += "OPTIONAL\n";
      break;
  }
  for (const auto& c : n.children) render_node(*c, indent + 1, out);
}

}  // namespace detail

// Indented one-node-per-line rendering used by explain output.
inline std::string betree_to_text(const BeTree& t) {
  std::string out;
  detail::render_node(*t.root, 0, out);
  return out;
}

}  // namespace beq
