#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "beq/rdf.hpp"

namespace beq {

enum class Direction : std::uint8_t { bySubject, byObject };

// Raised by load_ntriples on malformed input; carries the 1-based line number.
struct LoadError : std::runtime_error {
  std::size_t line;
  LoadError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line(line) {}
};

// In-memory triple store: term catalog, three sorted index permutations
// (SPO, POS, OSP) serving every bound-prefix scan, and the per-predicate
// statistics the cost model reads.
class Store {
 public:
  TermId intern(const Term& t) {
    auto it = ids_.find(t);
    if (it != ids_.end()) return it->second;
    TermId id = static_cast<TermId>(terms_.size());
    terms_.push_back(t);
    ids_.emplace(t, id);
    return id;
  }

  std::optional<TermId> id_of(const Term& t) const {
    auto it = ids_.find(t);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const Term& term(TermId id) const {
    if (id >= terms_.size()) throw std::out_of_range("unknown term id");
    return terms_[id];
  }

  void insert(const Term& s, const Term& p, const Term& o) {
    spo_.push_back({intern(s), intern(p), intern(o)});
    dirty_ = true;
  }

  std::size_t size() const {
    ensure_built();
    return spo_.size();
  }
  std::size_t term_count() const { return terms_.size(); }

  // All triples that match the given bound components, each exactly once.
  std::vector<Triple> scan(std::optional<TermId> s, std::optional<TermId> p,
                           std::optional<TermId> o) const {
    ensure_built();
    std::vector<Triple> out;
    auto emit_if = [&](const Triple& t) {
      if (s && t.s != *s) return;
      if (p && t.p != *p) return;
      if (o && t.o != *o) return;
      out.push_back(t);
    };
    if (s) {
      // SPO serves s, s+p, s+p+o prefixes; s+o filters within the s run.
      for (auto [lo, hi] = run(spo_, spoKey, *s, p); lo != hi; ++lo) emit_if(spo_[lo]);
    } else if (p) {
      for (auto [lo, hi] = run(pos_, posKey, *p, o); lo != hi; ++lo) emit_if(pos_[lo]);
    } else if (o) {
      for (auto [lo, hi] = run(osp_, ospKey, *o, std::nullopt); lo != hi; ++lo)
        emit_if(osp_[lo]);
    } else {
      out = spo_;
    }
    return out;
  }

  std::uint64_t predicate_count(TermId p) const {
    ensure_built();
    auto it = predStats_.find(p);
    return it == predStats_.end() ? 0 : it->second.count;
  }

  // Average fan-out of predicate p: triples / distinct subjects (or objects).
  // Absent predicates yield 0.
  double average_size(TermId p, Direction d) const {
    ensure_built();
    auto it = predStats_.find(p);
    if (it == predStats_.end() || it->second.count == 0) return 0.0;
    const PredStat& st = it->second;
    std::uint64_t denom =
        d == Direction::bySubject ? st.distinctSubjects : st.distinctObjects;
    return denom == 0 ? 0.0 : double(st.count) / double(denom);
  }

  // Whole-store fan-out, used when the predicate itself is unknown.
  double average_size_any(Direction d) const {
    ensure_built();
    std::uint64_t denom =
        d == Direction::bySubject ? distinctSubjects_ : distinctObjects_;
    return denom == 0 ? 0.0 : double(spo_.size()) / double(denom);
  }

 private:
  struct PredStat {
    std::uint64_t count = 0;
    std::uint64_t distinctSubjects = 0;
    std::uint64_t distinctObjects = 0;
  };

  static std::tuple<TermId, TermId, TermId> spoKey(const Triple& t) {
    return {t.s, t.p, t.o};
  }
  static std::tuple<TermId, TermId, TermId> posKey(const Triple& t) {
    return {t.p, t.o, t.s};
  }
  static std::tuple<TermId, TermId, TermId> ospKey(const Triple& t) {
    return {t.o, t.s, t.p};
  }

  // [lo, hi) range of rows whose first key equals k1 (and second equals *k2).
  template <typename Key>
  std::pair<std::size_t, std::size_t> run(const std::vector<Triple>& idx, Key key,
                                          TermId k1,
                                          std::optional<TermId> k2) const {
    auto lessFirst = [&](const Triple& t, TermId v) { return std::get<0>(key(t)) < v; };
    auto lo = std::lower_bound(idx.begin(), idx.end(), k1, lessFirst);
    auto hi = std::lower_bound(lo, idx.end(), k1 + 1, lessFirst);
    if (k2) {
      auto lessSecond = [&](const Triple& t, TermId v) {
        return std::get<1>(key(t)) < v;
      };
      auto lo2 = std::lower_bound(lo, hi, *k2, lessSecond);
      auto hi2 = std::lower_bound(lo2, hi, *k2 + 1, lessSecond);
      lo = lo2;
      hi = hi2;
    }
    return {std::size_t(lo - idx.begin()), std::size_t(hi - idx.begin())};
  }

  void ensure_built() const {
    if (!dirty_) return;
    auto& self = const_cast<Store&>(*this);
    auto sortBy = [](std::vector<Triple>& v, auto key) {
      std::sort(v.begin(), v.end(),
                [&](const Triple& a, const Triple& b) { return key(a) < key(b); });
    };
    sortBy(self.spo_, spoKey);
    self.spo_.erase(std::unique(self.spo_.begin(), self.spo_.end()), self.spo_.end());
    self.pos_ = self.spo_;
    sortBy(self.pos_, posKey);
    self.osp_ = self.spo_;
    sortBy(self.osp_, ospKey);

    self.predStats_.clear();
    for (std::size_t i = 0; i < pos_.size();) {
      std::size_t j = i;
      PredStat st;
      std::vector<TermId> subjects;
      while (j < pos_.size() && pos_[j].p == pos_[i].p) {
        ++st.count;
        if (j == i || pos_[j].o != pos_[j - 1].o) ++st.distinctObjects;
        subjects.push_back(pos_[j].s);
        ++j;
      }
      std::sort(subjects.begin(), subjects.end());
      st.distinctSubjects =
          std::unique(subjects.begin(), subjects.end()) - subjects.begin();
      self.predStats_.emplace(pos_[i].p, st);
      i = j;
    }
    self.distinctSubjects_ = 0;
    for (std::size_t i = 0; i < spo_.size(); ++i)
      if (i == 0 || spo_[i].s != spo_[i - 1].s) ++self.distinctSubjects_;
    self.distinctObjects_ = 0;
    for (std::size_t i = 0; i < osp_.size(); ++i)
      if (i == 0 || osp_[i].o != osp_[i - 1].o) ++self.distinctObjects_;
    self.dirty_ = false;
  }

  std::vector<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> ids_;
  std::vector<Triple> spo_, pos_, osp_;
  std::unordered_map<TermId, PredStat> predStats_;
  std::uint64_t distinctSubjects_ = 0, distinctObjects_ = 0;
  bool dirty_ = false;
};

namespace detail {

// One-statement-per-line N-Triples reader.
class NtLineParser {
 public:
  NtLineParser(const std::string& line, std::size_t lineNo)
      : s_(line), line_(lineNo) {}

  // Returns false for blank / comment-only lines.
  bool parse(Term& subj, Term& pred, Term& obj) {
    skip_ws();
    if (done()) return false;
    subj = parse_subject();
    skip_ws();
    pred = parse_iri_term();
    skip_ws();
    obj = parse_object();
    skip_ws();
    expect('.', "expected '.' after object");
    skip_ws();
    if (!done()) fail("trailing content after '.'");
    return true;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw LoadError(line_, msg); }
  bool done() const { return i_ >= s_.size() || s_[i_] == '#'; }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  char take() {
    if (i_ >= s_.size()) fail("unexpected end of line");
    return s_[i_++];
  }
  void expect(char c, const std::string& msg) {
    if (peek() != c) fail(msg);
    ++i_;
  }
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  Term parse_subject() {
    if (peek() == '<') return parse_iri_term();
    if (peek() == '_') return parse_blank();
    fail("expected IRI or blank node subject");
  }

  Term parse_object() {
    if (peek() == '<') return parse_iri_term();
    if (peek() == '_') return parse_blank();
    if (peek() == '"') return parse_literal();
    fail("expected IRI, blank node, or literal object");
  }

  Term parse_iri_term() {
    expect('<', "expected '<'");
    std::string v;
    while (peek() != '>') {
      if (i_ >= s_.size()) fail("unterminated IRI");
      char c = take();
      if (c == '\\') v += unescape();
      else v += c;
    }
    ++i_;
    return Term::iri(std::move(v));
  }

  Term parse_blank() {
    expect('_', "expected blank node");
    expect(':', "expected ':' in blank node");
    std::string v;
    while (i_ < s_.size() && (std::isalnum((unsigned char)peek()) || peek() == '_' ||
                              peek() == '-' || peek() == '.'))
      v += take();
    if (v.empty()) fail("empty blank node label");
    if (v.back() == '.') {  // final dot belongs to the statement
      v.pop_back();
      --i_;
      if (v.empty()) fail("empty blank node label");
    }
    return Term::blank(std::move(v));
  }

  Term parse_literal() {
    expect('"', "expected '\"'");
    std::string v;
    for (;;) {
      if (i_ >= s_.size()) fail("unterminated literal");
      char c = take();
      if (c == '"') break;
      if (c == '\\') v += unescape();
      else v += c;
    }
    if (peek() == '@') {
      ++i_;
      std::string lang;
      while (i_ < s_.size() && (std::isalnum((unsigned char)peek()) || peek() == '-'))
        lang += take();
      if (lang.empty()) fail("empty language tag");
      return Term::literal(std::move(v), std::move(lang));
    }
    if (peek() == '^') {
      ++i_;
      expect('^', "expected '^^'");
      Term dt = parse_iri_term();
      return Term::typed_literal(std::move(v), std::move(dt.lexical));
    }
    return Term::literal(std::move(v));
  }

  // Handles the escape after a consumed backslash; returns the decoded bytes.
  std::string unescape() {
    char c = take();
    switch (c) {
      case 't': return "\t";
      case 'b': return "\b";
      case 'n': return "\n";
      case 'r': return "\r";
      case 'f': return "\f";
      case '"': return "\"";
      case '\'': return "'";
      case '\\': return "\\";
      case 'u': return utf8(hex(4));
      case 'U': return utf8(hex(8));
      default: fail(std::string("unknown escape \\") + c);
    }
  }

  std::uint32_t hex(int n) {
    std::uint32_t v = 0;
    for (int k = 0; k < n; ++k) {
      char c = take();
      v <<= 4;
      if (c >= '0' && c <= '9') v |= c - '0';
      else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
      else fail("bad hex digit in escape");
    }
    return v;
  }

  static std::string utf8(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
      out += char(cp);
    } else if (cp < 0x800) {
      out += char(0xC0 | (cp >> 6));
      out += char(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += char(0xE0 | (cp >> 12));
      out += char(0x80 | ((cp >> 6) & 0x3F));
      out += char(0x80 | (cp & 0x3F));
    } else {
      out += char(0xF0 | (cp >> 18));
      out += char(0x80 | ((cp >> 12) & 0x3F));
      out += char(0x80 | ((cp >> 6) & 0x3F));
      out += char(0x80 | (cp & 0x3F));
    }
    return out;
  }

  const std::string& s_;
  std::size_t i_ = 0;
  std::size_t line_;
};

}  // namespace detail

// Reads N-Triples text into a Store. Duplicate statements are stored once.
inline Store load_ntriples(std::istream& in) {
  Store st;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    detail::NtLineParser p(line, lineNo);
    Term s, pr, o;
    if (p.parse(s, pr, o)) st.insert(s, pr, o);
  }
  return st;
}

}  // namespace beq
