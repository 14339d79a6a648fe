#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "beq/ast.hpp"
#include "beq/rdf.hpp"

namespace beq {

// A partial assignment Variable → TermId, kept sorted by variable name.
struct Mapping {
  std::vector<std::pair<std::string, TermId>> b;

  void bind(const Variable& v, TermId id) {
    auto it = std::lower_bound(b.begin(), b.end(), v.name,
                               [](const auto& e, const std::string& n) {
                                 return e.first < n;
                               });
    if (it != b.end() && it->first == v.name) {
      it->second = id;
      return;
    }
    b.insert(it, {v.name, id});
  }

  std::optional<TermId> lookup(const Variable& v) const {
    auto it = std::lower_bound(b.begin(), b.end(), v.name,
                               [](const auto& e, const std::string& n) {
                                 return e.first < n;
                               });
    if (it == b.end() || it->first != v.name) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return b.size(); }

  friend bool operator==(const Mapping& a, const Mapping& b) { return a.b == b.b; }
  friend bool operator<(const Mapping& a, const Mapping& b) { return a.b < b.b; }
};

// Multiset of mappings; multiplicity is row repetition, order carries no meaning.
struct Bag {
  std::vector<Mapping> rows;
};

// True iff the two mappings agree on every shared variable.
inline bool compatible(const Mapping& m1, const Mapping& m2) {
  auto i = m1.b.begin();
  auto j = m2.b.begin();
  while (i != m1.b.end() && j != m2.b.end()) {
    if (i->first < j->first) ++i;
    else if (j->first < i->first) ++j;
    else {
      if (i->second != j->second) return false;
      ++i;
      ++j;
    }
  }
  return true;
}

// Union of two compatible mappings.
inline Mapping merge(const Mapping& m1, const Mapping& m2) {
  Mapping out;
  out.b.reserve(m1.b.size() + m2.b.size());
  auto i = m1.b.begin();
  auto j = m2.b.begin();
  while (i != m1.b.end() || j != m2.b.end()) {
    if (j == m2.b.end() || (i != m1.b.end() && i->first < j->first))
      out.b.push_back(*i++);
    else if (i == m1.b.end() || j->first < i->first)
      out.b.push_back(*j++);
    else {
      out.b.push_back(*i++);
      ++j;
    }
  }
  return out;
}

// Ω1 ⋈ Ω2: all merges of compatible pairs; multiplicities multiply.
inline Bag join(const Bag& l, const Bag& r) {
  Bag out;
  for (const Mapping& m1 : l.rows)
    for (const Mapping& m2 : r.rows)
      if (compatible(m1, m2)) out.rows.push_back(merge(m1, m2));
  return out;
}

// Ω1 ∪ Ω2 under bag semantics: multiplicities add.
inline Bag union_bag(const Bag& l, const Bag& r) {
  Bag out;
  out.rows.reserve(l.rows.size() + r.rows.size());
  out.rows = l.rows;
  out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
  return out;
}

// Ω1 ∖ Ω2: keep each left row (with its multiplicity) iff no right row is
// compatible with it.
inline Bag diff(const Bag& l, const Bag& r) {
  Bag out;
  for (const Mapping& m1 : l.rows) {
    bool matched = false;
    for (const Mapping& m2 : r.rows)
      if (compatible(m1, m2)) {
        matched = true;
        break;
      }
    if (!matched) out.rows.push_back(m1);
  }
  return out;
}

// Ω1 ⟕ Ω2 = (Ω1 ⋈ Ω2) ∪ (Ω1 ∖ Ω2).
inline Bag left_outer_join(const Bag& l, const Bag& r) {
  return union_bag(join(l, r), diff(l, r));
}

inline Bag identity_bag() {
  Bag b;
  b.rows.emplace_back();
  return b;
}

inline void canonicalize(Bag& b) { std::sort(b.rows.begin(), b.rows.end()); }

// Multiset equality via canonical sort.
inline bool bag_equal(Bag a, Bag b) {
  canonicalize(a);
  canonicalize(b);
  return a.rows == b.rows;
}

}  // namespace beq
