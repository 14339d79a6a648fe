#pragma once

// Recursive-descent parser for the supported SPARQL subset:
// PREFIX headers, SELECT (list | *), WHERE, brace groups, `.`-conjunction,
// UNION, OPTIONAL, `a` shorthand, IRIs, prefixed names, literals.
// Precedence: {} binds tightest, then UNION, then conjunction, then OPTIONAL;
// OPTIONAL is left-associative and extends everything accumulated so far.

#include <cctype>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "beq/ast.hpp"

namespace beq {

struct ParseError : std::runtime_error {
  std::size_t line, col;
  ParseError(std::size_t line, std::size_t col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

namespace detail {

enum class Tok {
  End, LBrace, RBrace, Dot, Star, Var, Iri, PName, Ident, Literal, Blank
};

struct Token {
  Tok kind = Tok::End;
  std::string text;    // var name, ident, raw pname, or IRI value
  Term literal;        // Literal tokens
  std::size_t line = 1, col = 1;
};

inline std::string upper(std::string s) {
  for (char& c : s) c = char(std::toupper((unsigned char)c));
  return s;
}

inline bool is_unsupported_keyword(const std::string& ident) {
  static const char* kw[] = {
      "FILTER", "BIND",  "VALUES",   "MINUS",  "SERVICE", "GRAPH",  "ORDER",
      "GROUP",  "LIMIT", "OFFSET",   "HAVING", "ASK",     "CONSTRUCT",
      "DESCRIBE", "DISTINCT", "REDUCED", "FROM", "EXISTS", "NOT", "BASE"};
  std::string u = upper(ident);
  for (const char* k : kw)
    if (u == k) return true;
  return false;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (i_ >= s_.size()) return t;
    char c = s_[i_];
    if (c == '{') return take_simple(t, Tok::LBrace);
    if (c == '}') return take_simple(t, Tok::RBrace);
    if (c == '.') return take_simple(t, Tok::Dot);
    if (c == '*') return take_simple(t, Tok::Star);
    if (c == '?' || c == '$') return lex_var(t);
    if (c == '<') return lex_iri(t);
    if (c == '"') return lex_literal(t);
    if (c == '_' && i_ + 1 < s_.size() && s_[i_ + 1] == ':') return lex_blank(t);
    if (std::isalnum((unsigned char)c) || c == ':') return lex_name(t);
    fail(t, std::string("unexpected character '") + c + "'");
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(at.line, at.col, msg);
  }

  void advance() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_ws() {
    while (i_ < s_.size()) {
      if (std::isspace((unsigned char)s_[i_])) {
        advance();
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token take_simple(Token& t, Tok kind) {
    t.kind = kind;
    t.text = s_[i_];
    advance();
    return t;
  }

  Token lex_var(Token& t) {
    advance();  // '?'
    while (i_ < s_.size() &&
           (std::isalnum((unsigned char)s_[i_]) || s_[i_] == '_')) {
      t.text += s_[i_];
      advance();
    }
    if (t.text.empty()) fail(t, "empty variable name");
    t.kind = Tok::Var;
    return t;
  }

  Token lex_iri(Token& t) {
    advance();  // '<'
    while (i_ < s_.size() && s_[i_] != '>') {
      if (s_[i_] == '\n') fail(t, "unterminated IRI");
      t.text += s_[i_];
      advance();
    }
    if (i_ >= s_.size()) fail(t, "unterminated IRI");
    advance();  // '>'
    t.kind = Tok::Iri;
    return t;
  }

  Token lex_blank(Token& t) {
    t.kind = Tok::Blank;
    advance();
    advance();
    while (i_ < s_.size() &&
           (std::isalnum((unsigned char)s_[i_]) || s_[i_] == '_')) {
      t.text += s_[i_];
      advance();
    }
    return t;
  }

  Token lex_literal(Token& t) {
    advance();  // '"'
    std::string v;
    while (true) {
      if (i_ >= s_.size() || s_[i_] == '\n') fail(t, "unterminated literal");
      char c = s_[i_];
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (i_ >= s_.size()) fail(t, "bad escape");
        char e = s_[i_];
        advance();
        switch (e) {
          case 't': v += '\t'; break;
          case 'n': v += '\n'; break;
          case 'r': v += '\r'; break;
          case '"': v += '"'; break;
          case '\\': v += '\\'; break;
          default: fail(t, std::string("unknown escape \\") + e);
        }
      } else {
        v += c;
      }
    }
    if (i_ < s_.size() && s_[i_] == '@') {
      advance();
      std::string lang;
      while (i_ < s_.size() &&
             (std::isalnum((unsigned char)s_[i_]) || s_[i_] == '-')) {
        lang += s_[i_];
        advance();
      }
      if (lang.empty()) fail(t, "empty language tag");
      t.literal = Term::literal(std::move(v), std::move(lang));
    } else if (i_ + 1 < s_.size() && s_[i_] == '^' && s_[i_ + 1] == '^') {
      advance();
      advance();
      if (i_ >= s_.size() || s_[i_] != '<') fail(t, "expected datatype IRI");
      Token dt;
      dt.line = line_;
      dt.col = col_;
      lex_iri(dt);
      t.literal = Term::typed_literal(std::move(v), std::move(dt.text));
    } else {
      t.literal = Term::literal(std::move(v));
    }
    t.kind = Tok::Literal;
    return t;
  }

  // Bare identifier (keyword or `a`) or prefixed name `prefix:local`.
  Token lex_name(Token& t) {
    std::string head;
    while (i_ < s_.size() &&
           (std::isalnum((unsigned char)s_[i_]) || s_[i_] == '_' ||
            s_[i_] == '-')) {
      head += s_[i_];
      advance();
    }
    if (i_ < s_.size() && s_[i_] == ':') {
      head += ':';
      advance();
      // Local part; ':' allowed inside, '.' only when more local chars follow.
      while (i_ < s_.size()) {
        char c = s_[i_];
        bool plain = std::isalnum((unsigned char)c) || c == '_' || c == '-' ||
                     c == ':' || c == '%';
        if (plain) {
          head += c;
          advance();
        } else if (c == '.' && i_ + 1 < s_.size() &&
                   (std::isalnum((unsigned char)s_[i_ + 1]) ||
                    s_[i_ + 1] == '_' || s_[i_ + 1] == '-' ||
                    s_[i_ + 1] == ':' || s_[i_ + 1] == '%')) {
          head += c;
          advance();
        } else {
          break;
        }
      }
      t.kind = Tok::PName;
      t.text = std::move(head);
      return t;
    }
    if (head.empty()) fail(t, "unexpected ':'");
    t.kind = Tok::Ident;
    t.text = std::move(head);
    return t;
  }

  const std::string& s_;
  std::size_t i_ = 0, line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) { bump(); }

  Query parse() {
    parse_prologue();
    expect_keyword("SELECT");
    Query q;
    if (tok_.kind == Tok::Star) {
      q.wildcard = true;
      bump();
    } else {
      q.wildcard = false;
      while (tok_.kind == Tok::Var) {
        q.projection.push_back(Variable{tok_.text});
        bump();
      }
      if (q.projection.empty()) fail("expected '*' or variables after SELECT");
    }
    expect_keyword("WHERE");
    if (tok_.kind != Tok::LBrace) fail("expected '{' to open the query body");
    q.body = parse_group();
    if (tok_.kind != Tok::End) {
      if (tok_.kind == Tok::Ident && is_unsupported_keyword(tok_.text))
        fail("unsupported keyword " + upper(tok_.text));
      fail("trailing content after query body");
    }
    if (!q.wildcard) {
      std::vector<Variable> vars = pattern_vars(q.body);
      for (const Variable& v : q.projection) {
        bool found = false;
        for (const Variable& w : vars)
          if (v == w) found = true;
        if (!found) fail("projected variable ?" + v.name + " not in body");
      }
    }
    return q;
  }

 private:
  void bump() { tok_ = lex_.next(); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

  bool at_keyword(const char* kw) const {
    return tok_.kind == Tok::Ident && upper(tok_.text) == kw;
  }
  void expect_keyword(const char* kw) {
    if (!at_keyword(kw)) {
      if (tok_.kind == Tok::Ident && is_unsupported_keyword(tok_.text))
        fail("unsupported keyword " + upper(tok_.text));
      fail(std::string("expected ") + kw);
    }
    bump();
  }

  void parse_prologue() {
    while (at_keyword("PREFIX")) {
      bump();
      if (tok_.kind != Tok::PName) fail("expected prefix name");
      std::string raw = tok_.text;
      if (raw.empty() || raw.back() != ':')
        fail("prefix declaration must end with ':'");
      bump();
      if (tok_.kind != Tok::Iri) fail("expected IRI in PREFIX declaration");
      prefixes_[raw.substr(0, raw.size() - 1)] = tok_.text;
      bump();
    }
  }

  Term resolve_pname(const Token& t) const {
    std::size_t c = t.text.find(':');
    std::string prefix = t.text.substr(0, c);
    std::string local = t.text.substr(c + 1);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end())
      throw ParseError(t.line, t.col, "unknown prefix '" + prefix + ":'");
    return Term::iri(it->second + local);
  }

  enum class Slot { Subject, Predicate, Object };

  PatternTerm parse_term(Slot slot) {
    switch (tok_.kind) {
      case Tok::Var: {
        Variable v{tok_.text};
        bump();
        return v;
      }
      case Tok::Iri: {
        Term t = Term::iri(tok_.text);
        bump();
        return t;
      }
      case Tok::PName: {
        Term t = resolve_pname(tok_);
        bump();
        return t;
      }
      case Tok::Literal: {
        if (slot != Slot::Object) fail("literals may only appear as objects");
        Term t = tok_.literal;
        bump();
        return t;
      }
      case Tok::Ident: {
        if (slot == Slot::Predicate && tok_.text == "a") {
          bump();
          return Term::iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
        }
        if (is_unsupported_keyword(tok_.text))
          fail("unsupported keyword " + upper(tok_.text));
        fail("unexpected identifier '" + tok_.text + "'");
      }
      case Tok::Blank:
        fail("blank nodes are not allowed in triple patterns");
      default:
        fail("expected term");
    }
  }

  TriplePattern parse_triple() {
    TriplePattern t;
    t.s = parse_term(Slot::Subject);
    t.p = parse_term(Slot::Predicate);
    t.o = parse_term(Slot::Object);
    return t;
  }

  // `{ ... }`; the closing brace is consumed.
  PatternPtr parse_group() {
    bump();  // '{'
    PatternPtr acc;
    std::vector<TriplePattern> run;

    auto flush = [&] {
      for (PatternPtr chunk : split_components(run)) {
        acc = acc ? make_and(acc, chunk) : chunk;
      }
      run.clear();
    };

    while (true) {
      if (tok_.kind == Tok::RBrace) {
        bump();
        break;
      }
      if (tok_.kind == Tok::End) fail("unbalanced braces: expected '}'");
      if (tok_.kind == Tok::Dot) {
        bump();
        continue;
      }
      if (tok_.kind == Tok::LBrace) {
        PatternPtr g = parse_group();
        while (at_keyword("UNION")) {
          bump();
          if (tok_.kind != Tok::LBrace) fail("expected '{' after UNION");
          g = make_union(g, parse_group());
        }
        flush();
        acc = acc ? make_and(acc, g) : g;
        continue;
      }
      if (at_keyword("OPTIONAL")) {
        bump();
        if (tok_.kind != Tok::LBrace) fail("expected '{' after OPTIONAL");
        PatternPtr right = parse_group();
        flush();
        if (!acc) acc = make_bgp({});
        acc = make_optional(acc, right);
        continue;
      }
      if (at_keyword("UNION")) fail("UNION without a preceding group");
      if (tok_.kind == Tok::Ident && tok_.text != "a" &&
          is_unsupported_keyword(tok_.text))
        fail("unsupported keyword " + upper(tok_.text));
      run.push_back(parse_triple());
    }
    flush();
    if (!acc) acc = make_bgp({});
    return make_group(acc);
  }

  // Splits a contiguous run of triple patterns into connected components
  // (connectivity = coalescability), ordered by first appearance.
  static std::vector<PatternPtr> split_components(
      const std::vector<TriplePattern>& run) {
    std::vector<PatternPtr> out;
    if (run.empty()) return out;
    std::vector<std::size_t> parent(run.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (std::size_t i = 0; i < run.size(); ++i)
      for (std::size_t j = i + 1; j < run.size(); ++j)
        if (coalescable(run[i], run[j])) parent[find(i)] = find(j);
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < run.size(); ++i) {
      std::size_t r = find(i);
      bool seen = false;
      for (std::size_t s : roots)
        if (s == r) seen = true;
      if (!seen) roots.push_back(r);
    }
    for (std::size_t r : roots) {
      std::vector<TriplePattern> ts;
      for (std::size_t i = 0; i < run.size(); ++i)
        if (find(i) == r) ts.push_back(run[i]);
      out.push_back(make_bgp(std::move(ts)));
    }
    return out;
  }

  Lexer lex_;
  Token tok_;
  std::map<std::string, std::string> prefixes_;
};

inline std::string render_pattern_term(const PatternTerm& t) {
  if (is_var(t)) return "?" + as_var(t).name;
  return to_string(as_term(t));
}

inline std::string render_pattern(const PatternPtr& p) {
  switch (p->kind) {
    case GraphPattern::Kind::Bgp: {
      std::string out;
      for (const TriplePattern& t : p->triples) {
        if (!out.empty()) out += " ";
        out += render_pattern_term(t.s) + " " + render_pattern_term(t.p) + " " +
               render_pattern_term(t.o) + " .";
      }
      return out;
    }
    case GraphPattern::Kind::Group: {
      std::string inner = render_pattern(p->left);
      return inner.empty() ? "{ }" : "{ " + inner + " }";
    }
    case GraphPattern::Kind::And: {
      std::string l = render_pattern(p->left);
      std::string r = render_pattern(p->right);
      if (l.empty()) return r;
      if (r.empty()) return l;
      return l + " " + r;
    }
    case GraphPattern::Kind::Union:
      return render_pattern(p->left) + " UNION " + render_pattern(p->right);
    case GraphPattern::Kind::Optional: {
      std::string l = render_pattern(p->left);
      std::string r = "OPTIONAL " + render_pattern(p->right);
      return l.empty() ? r : l + " " + r;
    }
  }
  return {};
}

}  // namespace detail

inline Query parse_query(const std::string& text) {
  return detail::Parser(text).parse();
}

// Prints a query that re-parses to a structurally identical tree.
inline std::string pattern_to_text(const Query& q) {
  std::string out = "SELECT";
  if (q.wildcard) {
    out += " *";
  } else {
    for (const Variable& v : q.projection) out += " ?" + v.name;
  }
  out += " WHERE " + detail::render_pattern(q.body);
  return out;
}

}  // namespace beq
