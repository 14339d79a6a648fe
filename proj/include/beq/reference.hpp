#pragma once

// Naive bottom-up evaluator over the pattern tree. Slow by design; it is the
// correctness oracle the engine is tested against.

#include <optional>

#include "beq/algebra.hpp"
#include "beq/ast.hpp"
#include "beq/store.hpp"

namespace beq {

// All mappings over t's variables whose substitution into t is in the store.
inline Bag eval_triple_pattern(const TriplePattern& t, const Store& store) {
  Bag out;
  auto resolve = [&](const PatternTerm& pt) -> std::pair<bool, std::optional<TermId>> {
    if (is_var(pt)) return {true, std::nullopt};
    auto id = store.id_of(as_term(pt));
    if (!id) return {false, std::nullopt};  // constant absent from the store
    return {true, id};
  };
  auto [okS, s] = resolve(t.s);
  auto [okP, p] = resolve(t.p);
  auto [okO, o] = resolve(t.o);
  if (!okS || !okP || !okO) return out;
  for (const Triple& tr : store.scan(s, p, o)) {
    Mapping m;
    bool consistent = true;
    auto bind = [&](const PatternTerm& pt, TermId id) {
      if (!is_var(pt)) return;
      auto prev = m.lookup(as_var(pt));
      if (prev && *prev != id) {
        consistent = false;  // same variable used twice in the pattern
        return;
      }
      m.bind(as_var(pt), id);
    };
    bind(t.s, tr.s);
    bind(t.p, tr.p);
    bind(t.o, tr.o);
    if (consistent) out.rows.push_back(std::move(m));
  }
  return out;
}

inline Bag reference_evaluate(const PatternPtr& p, const Store& store) {
  switch (p->kind) {
    case GraphPattern::Kind::Bgp: {
      Bag acc = identity_bag();
      for (const TriplePattern& t : p->triples)
        acc = join(acc, eval_triple_pattern(t, store));
      return acc;
    }
    case GraphPattern::Kind::Group:
      return reference_evaluate(p->left, store);
    case GraphPattern::Kind::And:
      return join(reference_evaluate(p->left, store),
                  reference_evaluate(p->right, store));
    case GraphPattern::Kind::Union:
      return union_bag(reference_evaluate(p->left, store),
                       reference_evaluate(p->right, store));
    case GraphPattern::Kind::Optional:
      return left_outer_join(reference_evaluate(p->left, store),
                             reference_evaluate(p->right, store));
  }
  return {};
}

}  // namespace beq
