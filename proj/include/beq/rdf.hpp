#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <tuple>

namespace beq {

// Integer handle into a store's term catalog, assigned in first-seen order.
using TermId = std::uint32_t;
inline constexpr TermId kNoTerm = static_cast<TermId>(-1);

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

// An RDF term: IRI, blank node, or literal (plain, tagged, or typed).
// A literal carries at most one of lang / datatype.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string lexical;   // IRI text, blank node label, or literal value
  std::string lang;      // language tag, literals only
  std::string datatype;  // datatype IRI, literals only

  static Term iri(std::string v) { return {TermKind::Iri, std::move(v), {}, {}}; }
  static Term blank(std::string v) { return {TermKind::Blank, std::move(v), {}, {}}; }
  static Term literal(std::string v, std::string lang = {}) {
    return {TermKind::Literal, std::move(v), std::move(lang), {}};
  }
  static Term typed_literal(std::string v, std::string datatype) {
    return {TermKind::Literal, std::move(v), {}, std::move(datatype)};
  }

  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.lexical == b.lexical && a.lang == b.lang &&
           a.datatype == b.datatype;
  }
  friend bool operator<(const Term& a, const Term& b) {
    return std::tie(a.kind, a.lexical, a.lang, a.datatype) <
           std::tie(b.kind, b.lexical, b.lang, b.datatype);
  }
};

struct TermHash {
  std::size_t operator()(const Term& t) const {
    std::size_t h = std::hash<std::string>{}(t.lexical);
    h ^= std::hash<std::string>{}(t.lang) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>{}(t.datatype) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(t.kind) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// A dictionary-encoded triple.
struct Triple {
  TermId s = kNoTerm;
  TermId p = kNoTerm;
  TermId o = kNoTerm;

  friend bool operator==(const Triple& a, const Triple& b) {
    return a.s == b.s && a.p == b.p && a.o == b.o;
  }
};

// Renders a term in N-Triples-like surface form (used by diagnostics).
inline std::string to_string(const Term& t) {
  switch (t.kind) {
    case TermKind::Iri:
      return "<" + t.lexical + ">";
    case TermKind::Blank:
      return "_:" + t.lexical;
    case TermKind::Literal: {
      std::string out = "\"";
      for (char c : t.lexical) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\r': out += "\\r"; break;
          case '\t': out += "\\t"; break;
          default: out += c;
        }
      }
      out += "\"";
      if (!t.lang.empty()) out += "@" + t.lang;
      if (!t.datatype.empty()) out += "^^<" + t.datatype + ">";
      return out;
    }
  }
  return {};
}

}  // namespace beq
