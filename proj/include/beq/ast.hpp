#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "beq/rdf.hpp"

namespace beq {

struct Variable {
  std::string name;  // without the leading '?'
  friend bool operator==(const Variable& a, const Variable& b) {
    return a.name == b.name;
  }
  friend bool operator<(const Variable& a, const Variable& b) {
    return a.name < b.name;
  }
};

// One slot of a triple pattern: a constant term or a variable.
using PatternTerm = std::variant<Term, Variable>;

inline bool is_var(const PatternTerm& t) {
  return std::holds_alternative<Variable>(t);
}
inline const Variable& as_var(const PatternTerm& t) {
  return std::get<Variable>(t);
}
inline const Term& as_term(const PatternTerm& t) { return std::get<Term>(t); }

struct TriplePattern {
  PatternTerm s, p, o;
  friend bool operator==(const TriplePattern& a, const TriplePattern& b) {
    return a.s == b.s && a.p == b.p && a.o == b.o;
  }
};

// Two triple patterns can share one basic graph pattern when their
// subject/object slots share a variable (predicates do not count).
inline bool coalescable(const TriplePattern& a, const TriplePattern& b) {
  const PatternTerm* as[2] = {&a.s, &a.o};
  const PatternTerm* bs[2] = {&b.s, &b.o};
  for (const PatternTerm* x : as)
    for (const PatternTerm* y : bs)
      if (is_var(*x) && is_var(*y) && as_var(*x) == as_var(*y)) return true;
  return false;
}

struct GraphPattern;
using PatternPtr = std::shared_ptr<const GraphPattern>;

// Immutable query pattern tree.
//   Bgp      — a run of triple patterns evaluated as one block
//   Group    — a brace scope { ... } (child in `left`)
//   And      — conjunction of two subpatterns
//   Union    — UNION of two brace groups
//   Optional — left operand extended by an optional brace group
struct GraphPattern {
  enum class Kind { Bgp, Group, And, Union, Optional };
  Kind kind = Kind::Bgp;
  std::vector<TriplePattern> triples;  // Bgp only
  PatternPtr left, right;              // Group uses left only
};

inline PatternPtr make_bgp(std::vector<TriplePattern> ts) {
  auto p = std::make_shared<GraphPattern>();
  p->kind = GraphPattern::Kind::Bgp;
  p->triples = std::move(ts);
  return p;
}
inline PatternPtr make_group(PatternPtr inner) {
  auto p = std::make_shared<GraphPattern>();
  p->kind = GraphPattern::Kind::Group;
  p->left = std::move(inner);
  return p;
}
inline PatternPtr make_binary(GraphPattern::Kind k, PatternPtr l, PatternPtr r) {
  auto p = std::make_shared<GraphPattern>();
  p->kind = k;
  p->left = std::move(l);
  p->right = std::move(r);
  return p;
}
inline PatternPtr make_and(PatternPtr l, PatternPtr r) {
  return make_binary(GraphPattern::Kind::And, std::move(l), std::move(r));
}
inline PatternPtr make_union(PatternPtr l, PatternPtr r) {
  return make_binary(GraphPattern::Kind::Union, std::move(l), std::move(r));
}
inline PatternPtr make_optional(PatternPtr l, PatternPtr r) {
  return make_binary(GraphPattern::Kind::Optional, std::move(l), std::move(r));
}

struct Query {
  bool wildcard = true;
  std::vector<Variable> projection;  // empty when wildcard
  PatternPtr body;                   // always a Group
};

inline bool pattern_equal(const PatternPtr& a, const PatternPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == GraphPattern::Kind::Bgp) return a->triples == b->triples;
  return pattern_equal(a->left, b->left) && pattern_equal(a->right, b->right);
}

namespace detail {
inline void collect_vars(const PatternTerm& t, std::vector<Variable>& out) {
  if (!is_var(t)) return;
  for (const Variable& v : out)
    if (v == as_var(t)) return;
  out.push_back(as_var(t));
}
}  // namespace detail

inline void collect_vars(const TriplePattern& t, std::vector<Variable>& out) {
  detail::collect_vars(t.s, out);
  detail::collect_vars(t.p, out);
  detail::collect_vars(t.o, out);
}

inline void collect_vars(const PatternPtr& p, std::vector<Variable>& out) {
  if (!p) return;
  if (p->kind == GraphPattern::Kind::Bgp) {
    for (const TriplePattern& t : p->triples) collect_vars(t, out);
    return;
  }
  collect_vars(p->left, out);
  collect_vars(p->right, out);
}

// Variables of a pattern in first-appearance order.
inline std::vector<Variable> pattern_vars(const PatternPtr& p) {
  std::vector<Variable> out;
  collect_vars(p, out);
  return out;
}

}  // namespace beq
