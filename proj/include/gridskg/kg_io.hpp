#pragma once

// N-Triples and Turtle-subset reading and writing. Blank nodes, language
// tags and collections are rejected with UnsupportedFeatureError.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridskg/error.hpp"
#include "gridskg/kg_graph.hpp"

namespace gridskg::kg {

enum class Format { ntriples, turtle };

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline void append_uchar(std::string& out, unsigned char c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "\\u%04X", static_cast<unsigned>(c));
  out += buf;
}

inline std::string escape_iri(std::string_view iri) {
  std::string out;
  out.reserve(iri.size() + 2);
  for (char ch : iri) {
    const auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`' ||
        c == '\\')
      append_uchar(out, c);
    else
      out += ch;
  }
  return out;
}

// Canonical N-Triples string escaping.
inline std::string escape_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\b': out += "\\b"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\f': out += "\\f"; break;
      case '\r': out += "\\r"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default:
        if (c < 0x20 || c == 0x7F) append_uchar(out, c);
        else out += ch;
    }
  }
  return out;
}

inline std::string nt_term(const Term& t) {
  if (t.is_iri()) return "<" + escape_iri(t.value) + ">";
  std::string out = "\"" + escape_string(t.value) + "\"";
  if (!t.datatype.empty()) out += "^^<" + escape_iri(t.datatype) + ">";
  return out;
}

inline bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

// Cursor over the whole document with line tracking.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }
  void skip(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) get();
  }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }
  [[noreturn]] void unsupported(const std::string& what) const { throw UnsupportedFeatureError(line_, what); }

  // Skips spaces and tabs; with `newlines` also line breaks and comments.
  void skip_ws(bool newlines) {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') get();
      else if (newlines && c == '\n') get();
      else if (newlines && c == '#') {
        while (!eof() && peek() != '\n') get();
      } else break;
    }
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    get();
  }

  std::uint32_t read_hex(int digits) {
    std::uint32_t cp = 0;
    for (int i = 0; i < digits; ++i) {
      const char h = peek();
      if (!is_hex(h)) fail("bad unicode escape");
      get();
      cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h)) ? h - '0'
                                                                                              : (std::tolower(h) - 'a' + 10));
    }
    if (cp > 0x10FFFF) fail("unicode escape out of range");
    return cp;
  }

  // <...> with \u escapes.
  std::string read_iriref() {
    expect('<', "'<'");
    std::string out;
    while (true) {
      if (eof()) fail("unterminated IRI");
      const char c = get();
      if (c == '>') break;
      if (c == '\\') {
        const char e = eof() ? '\0' : get();
        if (e == 'u') append_utf8(out, read_hex(4));
        else if (e == 'U') append_utf8(out, read_hex(8));
        else fail("bad escape in IRI");
      } else {
        if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' ||
            c == '^' || c == '`')
          fail("illegal character in IRI");
        out += c;
      }
    }
    return out;
  }

  // Quoted string; `quote` is ' or ", `long_form` for triple quotes.
  std::string read_string(char quote, bool long_form) {
    skip(long_form ? 3 : 1);
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string literal");
      if (long_form ? (peek() == quote && peek(1) == quote && peek(2) == quote && peek(3) != quote)
                    : peek() == quote) {
        skip(long_form ? 3 : 1);
        return out;
      }
      const char c = get();
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case 't': out += '\t'; break;
          case 'b': out += '\b'; break;
          case 'n': out += '\n'; break;
          case 'r': out += '\r'; break;
          case 'f': out += '\f'; break;
          case '"': out += '"'; break;
          case '\'': out += '\''; break;
          case '\\': out += '\\'; break;
          case 'u': append_utf8(out, read_hex(4)); break;
          case 'U': append_utf8(out, read_hex(8)); break;
          default: fail(std::string("bad escape \\") + e);
        }
      } else {
        if (!long_form && (c == '\n' || c == '\r')) fail("line break in string literal");
        out += c;
      }
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

/// One N-Triples line without the trailing newline.
inline std::string to_ntriples_line(const Triple& t) {
  return detail::nt_term(t.subject) + " " + detail::nt_term(t.predicate) + " " + detail::nt_term(t.object) + " .";
}

/// Canonical N-Triples: one triple per line, lines sorted bytewise, LF endings.
inline std::string to_ntriples(const TripleGraph& g) {
  std::vector<std::string> enc;
  enc.reserve(g.term_count());
  for (TermId i = 0; i < g.term_count(); ++i) enc.push_back(detail::nt_term(g.term(i)));
  // Escaped IRIs never contain '>', and a literal that prefixes another is
  // followed by ' ' where the longer one has '^', so comparing term by term
  // orders the same as comparing whole lines.
  std::vector<TripleIds> order = g.triple_ids();
  std::sort(order.begin(), order.end(), [&](const TripleIds& a, const TripleIds& b) {
    if (a.s != b.s) return enc[a.s] < enc[b.s];
    if (a.p != b.p) return enc[a.p] < enc[b.p];
    return enc[a.o] < enc[b.o];
  });
  std::size_t total = 0;
  for (const auto& t : order) total += enc[t.s].size() + enc[t.p].size() + enc[t.o].size() + 5;
  std::string out;
  out.reserve(total);
  for (const auto& t : order) {
    out += enc[t.s];
    out += ' ';
    out += enc[t.p];
    out += ' ';
    out += enc[t.o];
    out += " .\n";
  }
  return out;
}

inline TripleGraph parse_ntriples(std::string_view text, const IndexPredicates& idx) {
  TripleGraph g(idx);
  detail::Cursor cur(text);
  auto read_iri_term = [&](const char* role) {
    cur.skip_ws(false);
    if (cur.starts_with("_:")) cur.unsupported("blank nodes are not supported");
    if (cur.peek() != '<') cur.fail(std::string("expected IRI as ") + role);
    std::string iri = cur.read_iriref();
    if (!is_absolute_iri(iri)) cur.fail("relative IRI <" + iri + ">");
    return Term{Term::Kind::iri, std::move(iri), {}};
  };
  while (true) {
    cur.skip_ws(true);
    if (cur.eof()) break;
    Term s = read_iri_term("subject");
    Term p = read_iri_term("predicate");
    cur.skip_ws(false);
    Term o;
    if (cur.peek() == '"') {
      std::string lex = cur.read_string('"', false);
      std::string dt;
      if (cur.peek() == '@') cur.unsupported("language-tagged literals are not supported");
      if (cur.starts_with("^^")) {
        cur.skip(2);
        dt = cur.read_iriref();
      }
      o = Term{Term::Kind::literal, std::move(lex), std::move(dt)};
    } else {
      o = read_iri_term("object");
    }
    cur.skip_ws(false);
    cur.expect('.', "'.' at end of triple");
    cur.skip_ws(false);
    if (cur.peek() == '#')
      while (!cur.eof() && cur.peek() != '\n') cur.get();
    if (!cur.eof() && cur.peek() != '\n') cur.fail("trailing characters after triple");
    g.add(Triple{std::move(s), std::move(p), std::move(o)});
  }
  return g;
}

namespace detail {

inline bool is_pn_local_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

inline bool simple_local_name(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), is_pn_local_char);
}

}  // namespace detail

/// Turtle with prefix declarations, one subject block per subject.
/// `prefixes` maps prefix label to namespace IRI.
inline std::string to_turtle(const TripleGraph& g, const std::map<std::string, std::string>& prefixes) {
  auto term = [&](const Term& t) -> std::string {
    auto shorten = [&](const std::string& iri) -> std::string {
      std::string best;
      for (const auto& [label, nsiri] : prefixes)
        if (iri.size() > nsiri.size() && iri.starts_with(nsiri) &&
            detail::simple_local_name(std::string_view(iri).substr(nsiri.size())))
          if (best.empty() || nsiri.size() > prefixes.at(best).size()) best = label;
      if (best.empty()) return "<" + detail::escape_iri(iri) + ">";
      return best + ":" + iri.substr(prefixes.at(best).size());
    };
    if (t.is_iri()) return shorten(t.value);
    std::string out = "\"" + detail::escape_string(t.value) + "\"";
    if (!t.datatype.empty()) out += "^^" + shorten(t.datatype);
    return out;
  };
  std::string out;
  for (const auto& [label, nsiri] : prefixes) out += "@prefix " + label + ": <" + detail::escape_iri(nsiri) + "> .\n";
  std::vector<Triple> sorted = g.triples();
  std::sort(sorted.begin(), sorted.end());
  const std::string type = rdf_type();
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].subject == sorted[i].subject) ++j;
    out += "\n" + term(sorted[i].subject);
    for (std::size_t k = i; k < j; ++k) {
      const auto& t = sorted[k];
      out += k == i ? " " : " ;\n    ";
      out += t.predicate.value == type ? std::string("a") : term(t.predicate);
      out += " " + term(t.object);
    }
    out += " .\n";
    i = j;
  }
  return out;
}

/// Turtle subset: @prefix/@base/PREFIX/BASE, IRIs, prefixed names, 'a',
/// ';' and ',' lists, quoted literals with ^^datatype, numbers and booleans.
inline TripleGraph parse_turtle(std::string_view text, const IndexPredicates& idx) {
  TripleGraph g(idx);
  detail::Cursor cur(text);
  std::map<std::string, std::string> prefixes;
  std::string base;

  auto resolve = [&](std::string iri) {
    if (is_absolute_iri(iri)) return iri;
    if (base.empty()) cur.fail("relative IRI <" + iri + "> without @base");
    return base + iri;
  };
  auto read_prefix_label = [&]() {
    std::string label;
    while (!cur.eof() && cur.peek() != ':') {
      const char c = cur.peek();
      if (!detail::is_pn_local_char(c) && c != '.') cur.fail("bad prefix label");
      label += cur.get();
    }
    cur.expect(':', "':' after prefix label");
    return label;
  };
  auto read_iri = [&]() -> std::string {
    if (cur.peek() == '<') return resolve(cur.read_iriref());
    const std::string label = read_prefix_label();
    auto it = prefixes.find(label);
    if (it == prefixes.end()) cur.fail("undeclared prefix '" + label + ":'");
    std::string local;
    while (!cur.eof()) {
      const char c = cur.peek();
      if (c == '\\') {
        cur.get();
        local += cur.get();
      } else if (detail::is_pn_local_char(c) || c == ':' || c == '%') {
        local += cur.get();
      } else if (c == '.' && (detail::is_pn_local_char(cur.peek(1)) || cur.peek(1) == ':')) {
        local += cur.get();
      } else {
        break;
      }
    }
    return it->second + local;
  };
  auto reject_unsupported = [&]() {
    const char c = cur.peek();
    if (cur.starts_with("_:") || c == '[') cur.unsupported("blank nodes are not supported");
    if (c == '(') cur.unsupported("collections are not supported");
  };
  auto read_object = [&]() -> Term {
    reject_unsupported();
    const char c = cur.peek();
    if (c == '"' || c == '\'') {
      const bool long_form = cur.peek(1) == c && cur.peek(2) == c;
      std::string lex = cur.read_string(c, long_form);
      if (cur.peek() == '@') cur.unsupported("language-tagged literals are not supported");
      std::string dt;
      if (cur.starts_with("^^")) {
        cur.skip(2);
        dt = read_iri();
      }
      return Term{Term::Kind::literal, std::move(lex), std::move(dt)};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
      std::string lex;
      bool dot = false, exp = false;
      if (c == '+' || c == '-') lex += cur.get();
      while (!cur.eof()) {
        const char d = cur.peek();
        if (std::isdigit(static_cast<unsigned char>(d))) lex += cur.get();
        else if (d == '.' && !dot && !exp && std::isdigit(static_cast<unsigned char>(cur.peek(1)))) {
          dot = true;
          lex += cur.get();
        } else if ((d == 'e' || d == 'E') && !exp) {
          exp = true;
          lex += cur.get();
          if (cur.peek() == '+' || cur.peek() == '-') lex += cur.get();
        } else break;
      }
      if (lex.empty() || lex == "+" || lex == "-") cur.fail("malformed number");
      const std::string dt = std::string(ns::xsd) + (exp ? "double" : dot ? "decimal" : "integer");
      return Term{Term::Kind::literal, std::move(lex), dt};
    }
    for (std::string_view kw : {"true", "false"})
      if (cur.starts_with(kw) && !detail::is_pn_local_char(cur.peek(kw.size())) && cur.peek(kw.size()) != ':') {
        cur.skip(kw.size());
        return Term{Term::Kind::literal, std::string(kw), std::string(ns::xsd) + "boolean"};
      }
    return Term{Term::Kind::iri, read_iri(), {}};
  };
  // Directive keyword followed by whitespace, so "prefix:x" stays a name.
  auto directive = [&](std::string_view kw) {
    if (!cur.starts_with(kw)) return false;
    const char next = cur.peek(kw.size());
    return next == ' ' || next == '\t' || next == '\n' || next == '\r' || next == '<';
  };

  while (true) {
    cur.skip_ws(true);
    if (cur.eof()) break;
    if (directive("@prefix") || directive("PREFIX") || directive("prefix")) {
      const bool at = cur.peek() == '@';
      cur.skip(at ? 7 : 6);
      cur.skip_ws(true);
      const std::string label = read_prefix_label();
      cur.skip_ws(true);
      prefixes[label] = resolve(cur.read_iriref());
      if (at) {
        cur.skip_ws(true);
        cur.expect('.', "'.' after @prefix");
      }
      continue;
    }
    if (directive("@base") || directive("BASE") || directive("base")) {
      const bool at = cur.peek() == '@';
      cur.skip(at ? 5 : 4);
      cur.skip_ws(true);
      base = resolve(cur.read_iriref());
      if (at) {
        cur.skip_ws(true);
        cur.expect('.', "'.' after @base");
      }
      continue;
    }
    reject_unsupported();
    Term subject{Term::Kind::iri, read_iri(), {}};
    while (true) {
      cur.skip_ws(true);
      Term predicate;
      if (cur.peek() == 'a' && !detail::is_pn_local_char(cur.peek(1)) && cur.peek(1) != ':') {
        cur.get();
        predicate = Term{Term::Kind::iri, rdf_type(), {}};
      } else {
        predicate = Term{Term::Kind::iri, read_iri(), {}};
      }
      while (true) {
        cur.skip_ws(true);
        g.add(Triple{subject, predicate, read_object()});
        cur.skip_ws(true);
        if (cur.peek() != ',') break;
        cur.get();
      }
      if (cur.peek() != ';') break;
      while (cur.peek() == ';') {
        cur.get();
        cur.skip_ws(true);
      }
      if (cur.peek() == '.') break;
    }
    cur.skip_ws(true);
    cur.expect('.', "'.' at end of statement");
  }
  return g;
}

inline std::string serialize(const TripleGraph& g, Format f, const std::map<std::string, std::string>& prefixes = {}) {
  return f == Format::ntriples ? to_ntriples(g) : to_turtle(g, prefixes);
}

inline TripleGraph parse(std::string_view text, Format f, const IndexPredicates& idx) {
  return f == Format::ntriples ? parse_ntriples(text, idx) : parse_turtle(text, idx);
}

}  // namespace gridskg::kg
