#pragma once

// Single-BGP evaluation by worst-case-optimal vertex extension with greedy
// join ordering, candidate-constrained to support pruned execution, plus the
// sampling-based cardinality estimator and step-cost model used by the
// optimizer.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "beq/algebra.hpp"
#include "beq/betree.hpp"
#include "beq/store.hpp"

namespace beq {

// Bindings already known for some variables, used to restrict BGP evaluation.
struct CandidateSet {
  std::vector<Variable> variables;
  Bag rows;  // projected to `variables`; rows may bind only a subset
};

struct BgpPlan {
  std::vector<std::string> vertexOrder;  // "?var" or constant term text
  std::vector<double> perStepCost;
  double estimatedResultSize = 0.0;
  double total_cost() const {
    double s = 0.0;
    for (double c : perStepCost) s += c;
    return s;
  }
};

// Cost of one vertex-extension step: candidate-prefix cardinality times the
// cheapest average fan-out among the connecting edges.
inline double wco_step_cost(double cardPrefix, double minAvgSize) {
  return cardPrefix * minAvgSize;
}

// Hash-join style pairwise cost; reported for comparison only.
inline double binary_join_cost(double c1, double c2) {
  return 2.0 * std::min(c1, c2) + std::max(c1, c2);
}

namespace detail {

inline std::string bgp_signature(const Bgp& b) {
  std::vector<std::string> keys;
  for (const TriplePattern& t : b.triples) keys.push_back(render_triple(t));
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const std::string& k : keys) out += k + "\n";
  return out;
}

struct BgpGraph {
  // One slot per distinct variable (any role), in first-appearance order.
  std::vector<std::string> slotNames;
  struct Vertex {
    bool isVar = false;
    int slot = -1;        // variables
    TermId constId = kNoTerm;  // constants (kNoTerm when absent from store)
    std::string label;
  };
  std::vector<Vertex> vertices;
  struct Edge {
    int sv = -1, ov = -1;      // subject/object vertex index
    bool pIsVar = false;
    int pSlot = -1;
    TermId pId = kNoTerm;
    std::size_t pattern = 0;
  };
  std::vector<Edge> edges;

  int slot_of(const std::string& name) {
    for (std::size_t i = 0; i < slotNames.size(); ++i)
      if (slotNames[i] == name) return int(i);
    slotNames.push_back(name);
    return int(slotNames.size() - 1);
  }

  int vertex_of(const Store& store, const PatternTerm& pt) {
    if (is_var(pt)) {
      for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i].isVar &&
            slotNames[std::size_t(vertices[i].slot)] == as_var(pt).name)
          return int(i);
      Vertex v;
      v.isVar = true;
      v.slot = slot_of(as_var(pt).name);
      v.label = "?" + as_var(pt).name;
      vertices.push_back(v);
    } else {
      for (std::size_t i = 0; i < vertices.size(); ++i)
        if (!vertices[i].isVar && vertices[i].label == to_string(as_term(pt)))
          return int(i);
      Vertex v;
      v.isVar = false;
      auto id = store.id_of(as_term(pt));
      v.constId = id ? *id : kNoTerm;
      v.label = to_string(as_term(pt));
      vertices.push_back(v);
    }
    return int(vertices.size() - 1);
  }
};

inline BgpGraph build_graph(const Store& store, const Bgp& bgp) {
  BgpGraph g;
  for (std::size_t i = 0; i < bgp.triples.size(); ++i) {
    const TriplePattern& t = bgp.triples[i];
    BgpGraph::Edge e;
    e.sv = g.vertex_of(store, t.s);
    e.ov = g.vertex_of(store, t.o);
    if (is_var(t.p)) {
      e.pIsVar = true;
      e.pSlot = g.slot_of(as_var(t.p).name);
    } else {
      auto id = store.id_of(as_term(t.p));
      e.pId = id ? *id : kNoTerm;
    }
    e.pattern = i;
    g.edges.push_back(e);
  }
  return g;
}

// Exact number of store triples matching one pattern (repeated variables
// respected).
inline double exact_pattern_count(const Store& store, const BgpGraph& g,
                                  const BgpGraph::Edge& e) {
  const auto& sv = g.vertices[std::size_t(e.sv)];
  const auto& ov = g.vertices[std::size_t(e.ov)];
  std::optional<TermId> s, p, o;
  if (!sv.isVar) {
    if (sv.constId == kNoTerm) return 0.0;
    s = sv.constId;
  }
  if (!e.pIsVar) {
    if (e.pId == kNoTerm) return 0.0;
    p = e.pId;
  }
  if (!ov.isVar) {
    if (ov.constId == kNoTerm) return 0.0;
    o = ov.constId;
  }
  double n = 0;
  for (const Triple& tr : store.scan(s, p, o)) {
    if (sv.isVar && ov.isVar && sv.slot == ov.slot && tr.s != tr.o) continue;
    if (sv.isVar && e.pIsVar && sv.slot == e.pSlot && tr.s != tr.p) continue;
    if (ov.isVar && e.pIsVar && ov.slot == e.pSlot && tr.o != tr.p) continue;
    n += 1;
  }
  return n;
}

// Average fan-out of edge e when walked from `fromVertex` to the other side.
inline double edge_avg_size(const Store& store, const BgpGraph& g,
                            const BgpGraph::Edge& e, int fromVertex) {
  Direction d =
      fromVertex == e.sv ? Direction::bySubject : Direction::byObject;
  if (e.pIsVar) return store.average_size_any(d);
  if (e.pId == kNoTerm) return 0.0;
  return store.average_size(e.pId, d);
}

struct EngineState {
  std::vector<std::vector<TermId>> rows;  // slot-indexed; kNoTerm unset
  std::vector<bool> vertexCovered;
  std::vector<bool> edgeDone;
};

// Per-slot allowed-value filters derived from a candidate set.
struct SlotFilters {
  std::vector<const std::set<TermId>*> bySlot;  // null = unfiltered
  std::vector<std::set<TermId>> storage;
};

// Extends one row along edge e; appends every consistent completion to `out`.
// Returns the number of completions.
inline std::size_t extend_row_by_edge(const Store& store, const BgpGraph& g,
                                      const BgpGraph::Edge& e,
                                      const SlotFilters* filters,
                                      const std::vector<TermId>& row,
                                      std::vector<std::vector<TermId>>* out) {
  const auto& sv = g.vertices[std::size_t(e.sv)];
  const auto& ov = g.vertices[std::size_t(e.ov)];
  auto bound = [&](const BgpGraph::Vertex& v) -> std::optional<TermId> {
    if (!v.isVar) {
      if (v.constId == kNoTerm) return std::nullopt;  // handled below
      return v.constId;
    }
    TermId val = row[std::size_t(v.slot)];
    return val == kNoTerm ? std::nullopt : std::optional<TermId>(val);
  };
  if ((!sv.isVar && sv.constId == kNoTerm) ||
      (!e.pIsVar && e.pId == kNoTerm) || (!ov.isVar && ov.constId == kNoTerm))
    return 0;  // constant absent from the store: nothing matches
  std::optional<TermId> s = bound(sv);
  std::optional<TermId> o = bound(ov);
  std::optional<TermId> p;
  if (!e.pIsVar) {
    p = e.pId;
  } else {
    TermId val = row[std::size_t(e.pSlot)];
    if (val != kNoTerm) p = val;
  }
  std::size_t produced = 0;
  for (const Triple& tr : store.scan(s, p, o)) {
    std::vector<TermId> r2 = row;
    bool ok = true;
    auto unify = [&](int slot, TermId val) {
      if (slot < 0 || !ok) return;
      TermId& cur = r2[std::size_t(slot)];
      if (cur != kNoTerm) {
        if (cur != val) ok = false;
        return;
      }
      if (filters && filters->bySlot[std::size_t(slot)] &&
          !filters->bySlot[std::size_t(slot)]->count(val)) {
        ok = false;
        return;
      }
      cur = val;
    };
    unify(sv.isVar ? sv.slot : -1, tr.s);
    unify(e.pIsVar ? e.pSlot : -1, tr.p);
    unify(ov.isVar ? ov.slot : -1, tr.o);
    if (!ok) continue;
    ++produced;
    if (out) out->push_back(std::move(r2));
  }
  return produced;
}

// Processes a set of edges for one row (fold: each edge filters/extends).
inline std::size_t complete_row(const Store& store, const BgpGraph& g,
                                const std::vector<const BgpGraph::Edge*>& es,
                                const SlotFilters* filters,
                                const std::vector<TermId>& row,
                                std::vector<std::vector<TermId>>* out) {
  std::vector<std::vector<TermId>> partial{row};
  for (const BgpGraph::Edge* e : es) {
    std::vector<std::vector<TermId>> next;
    for (const std::vector<TermId>& r : partial)
      extend_row_by_edge(store, g, *e, filters, r, &next);
    partial = std::move(next);
    if (partial.empty()) break;
  }
  if (out)
    for (auto& r : partial) out->push_back(std::move(r));
  return partial.size();
}

struct RunOutput {
  Bag bag;
  BgpPlan plan;
};

// Shared driver for evaluation and planning. Evaluation greedily orders by
// actual intermediate sizes; planning orders by running estimates, records
// per-step costs, and updates the estimate from a uniform sample of the
// materialized prefix.
inline RunOutput run_bgp(const Store& store, const Bgp& bgp,
                         const CandidateSet* cand, bool planning,
                         std::uint64_t seed, int sampleSize) {
  RunOutput out;
  if (bgp.triples.empty()) {
    out.bag = identity_bag();
    out.plan.estimatedResultSize = 1.0;
    return out;
  }
  BgpGraph g = build_graph(store, bgp);

  SlotFilters filters;
  bool candEmptyRows = false;
  if (cand) {
    filters.bySlot.assign(g.slotNames.size(), nullptr);
    filters.storage.reserve(g.slotNames.size());
    candEmptyRows = cand->rows.rows.empty();
    for (std::size_t slot = 0; slot < g.slotNames.size(); ++slot) {
      Variable v{g.slotNames[slot]};
      bool shared = false;
      for (const Variable& cv : cand->variables)
        if (cv == v) shared = true;
      if (!shared) continue;
      bool allBound = true;
      std::set<TermId> vals;
      for (const Mapping& m : cand->rows.rows) {
        auto val = m.lookup(v);
        if (!val) {
          allBound = false;
          break;
        }
        vals.insert(*val);
      }
      if (allBound) {
        filters.storage.push_back(std::move(vals));
        filters.bySlot[slot] = &filters.storage.back();
      }
    }
  }
  if (candEmptyRows) return out;  // nothing is compatible with zero rows

  EngineState st;
  st.vertexCovered.assign(g.vertices.size(), false);
  st.edgeDone.assign(g.edges.size(), false);

  // Seed: the pattern with the smallest exact count.
  std::size_t seedEdge = 0;
  double seedCount = -1.0;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    double c = exact_pattern_count(store, g, g.edges[i]);
    if (seedCount < 0 || c < seedCount) {
      seedCount = c;
      seedEdge = i;
    }
  }
  bool baseNonEmpty = seedCount > 0;
  double est = seedCount;

  auto cover = [&](const std::vector<int>& newVertices) -> double {
    // All not-yet-done edges whose endpoints lie in covered ∪ newVertices.
    for (int v : newVertices) st.vertexCovered[std::size_t(v)] = true;
    std::vector<const BgpGraph::Edge*> es;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      if (st.edgeDone[i]) continue;
      const auto& e = g.edges[i];
      if (st.vertexCovered[std::size_t(e.sv)] &&
          st.vertexCovered[std::size_t(e.ov)]) {
        es.push_back(&e);
        st.edgeDone[i] = true;
      }
    }
    // Sampled extension ratio before materializing (planning only).
    double ratio = 0.0;
    if (planning) {
      std::size_t n = st.rows.size();
      std::size_t k = std::min<std::size_t>(std::size_t(sampleSize), n);
      if (k > 0) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::vector<std::size_t> picked;
        std::mt19937_64 rng(seed);
        std::sample(idx.begin(), idx.end(), std::back_inserter(picked), k, rng);
        std::size_t extend = 0;
        for (std::size_t i : picked)
          extend += complete_row(store, g, es,
                                 cand ? &filters : nullptr, st.rows[i], nullptr);
        ratio = double(extend) / double(k);
      }
    }
    std::vector<std::vector<TermId>> next;
    for (const std::vector<TermId>& r : st.rows)
      complete_row(store, g, es, cand ? &filters : nullptr, r, &next);
    st.rows = std::move(next);
    return ratio;
  };

  // Seed step.
  st.rows.push_back(std::vector<TermId>(g.slotNames.size(), kNoTerm));
  {
    const auto& e = g.edges[seedEdge];
    std::vector<int> nv{e.sv};
    out.plan.vertexOrder.push_back(g.vertices[std::size_t(e.sv)].label);
    if (e.ov != e.sv) {
      nv.push_back(e.ov);
      out.plan.vertexOrder.push_back(g.vertices[std::size_t(e.ov)].label);
    }
    cover(nv);
    out.plan.perStepCost.push_back(seedCount);
  }

  // Extension steps.
  while (true) {
    std::vector<int> candidates;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (st.vertexCovered[v]) continue;
      for (const auto& e : g.edges) {
        bool touches =
            (e.sv == int(v) && st.vertexCovered[std::size_t(e.ov)]) ||
            (e.ov == int(v) && st.vertexCovered[std::size_t(e.sv)]);
        if (touches) {
          candidates.push_back(int(v));
          break;
        }
      }
    }
    if (candidates.empty()) {
      bool allCovered = true;
      for (bool c : st.vertexCovered) allCovered = allCovered && c;
      if (!allCovered)
        throw std::logic_error(
            "evaluate_bgp: disconnected basic graph pattern");
      break;
    }
    double cardBasis = planning ? est : double(st.rows.size());
    int best = -1;
    double bestCost = 0.0, bestAvg = 0.0;
    for (int v : candidates) {
      double minAvg = -1.0;
      for (const auto& e : g.edges) {
        int other = -1;
        if (e.sv == v && st.vertexCovered[std::size_t(e.ov)]) other = e.ov;
        if (e.ov == v && st.vertexCovered[std::size_t(e.sv)]) other = e.sv;
        if (other < 0) continue;
        double avg = edge_avg_size(store, g, e, other);
        if (minAvg < 0 || avg < minAvg) minAvg = avg;
      }
      double cost = wco_step_cost(cardBasis, minAvg);
      if (best < 0 || cost < bestCost) {
        best = v;
        bestCost = cost;
        bestAvg = minAvg;
      }
    }
    out.plan.vertexOrder.push_back(g.vertices[std::size_t(best)].label);
    if (planning) out.plan.perStepCost.push_back(wco_step_cost(est, bestAvg));
    double ratio = cover({best});
    if (planning)
      est = baseNonEmpty ? std::max(ratio * est, 1.0) : 0.0;
  }
  out.plan.estimatedResultSize = planning ? est : double(st.rows.size());

  // Assemble mappings.
  for (const std::vector<TermId>& r : st.rows) {
    Mapping m;
    for (std::size_t slot = 0; slot < g.slotNames.size(); ++slot)
      if (r[slot] != kNoTerm) m.bind(Variable{g.slotNames[slot]}, r[slot]);
    out.bag.rows.push_back(std::move(m));
  }

  // Final contract filter: rows must be compatible with some candidate row.
  if (cand) {
    Bag dedup = cand->rows;
    canonicalize(dedup);
    dedup.rows.erase(std::unique(dedup.rows.begin(), dedup.rows.end()),
                     dedup.rows.end());
    Bag kept;
    for (const Mapping& m : out.bag.rows) {
      for (const Mapping& c : dedup.rows) {
        if (compatible(m, c)) {
          kept.rows.push_back(m);
          break;
        }
      }
    }
    out.bag = std::move(kept);
  }
  return out;
}

}  // namespace detail

// Sampling-based cardinality estimator with a content-keyed result cache.
class CardEstimator {
 public:
  explicit CardEstimator(std::uint64_t seed = 1, int sampleSize = 100)
      : seed(seed), sampleSize(sampleSize) {}

  double estimate(const Store& store, const Bgp& bgp) {
    std::string key = detail::bgp_signature(bgp);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double v = plan(store, bgp).estimatedResultSize;
    cache.emplace(std::move(key), v);
    return v;
  }

  BgpPlan plan(const Store& store, const Bgp& bgp) const {
    std::uint64_t s =
        seed ^ std::hash<std::string>{}(detail::bgp_signature(bgp));
    return detail::run_bgp(store, bgp, nullptr, true, s, sampleSize).plan;
  }

  std::uint64_t seed;
  int sampleSize;
  std::map<std::string, double> cache;
};

// All mappings over the block's variables whose substitution lies in the
// store, optionally restricted to rows compatible with some candidate row.
inline Bag evaluate_bgp(const Store& store, const Bgp& bgp,
                        const CandidateSet* cand) {
  return detail::run_bgp(store, bgp, cand, false, 0, 0).bag;
}

inline BgpPlan plan_bgp(const Store& store, const Bgp& bgp,
                        CardEstimator& est) {
  return est.plan(store, bgp);
}

inline double estimate_cardinality(const Store& store, const Bgp& bgp,
                                   CardEstimator& est) {
  return est.estimate(store, bgp);
}

}  // namespace beq
