#pragma once

// In-memory RDF graph restricted to IRIs and literals, with subject,
// predicate and object indexes plus an ordered (level, row, col) index
// over cell subjects.

#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gridskg/error.hpp"
#include "gridskg/format.hpp"
#include "gridskg/grid.hpp"

namespace gridskg::kg {

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sosa = "http://www.w3.org/ns/sosa/";
inline constexpr std::string_view geo = "http://www.opengis.net/ont/geosparql#";
}  // namespace ns

inline std::string rdf_type() { return std::string(ns::rdf) + "type"; }
inline std::string xsd_integer() { return std::string(ns::xsd) + "integer"; }
inline std::string xsd_double() { return std::string(ns::xsd) + "double"; }
inline std::string xsd_datetime() { return std::string(ns::xsd) + "dateTime"; }

/// True when `iri` starts with a URI scheme ("http:", "urn:", ...).
inline bool is_absolute_iri(std::string_view iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (std::size_t i = 1; i < iri.size(); ++i) {
    const char c = iri[i];
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
  }
  return false;
}

/// IRI, typed literal, or plain literal (empty datatype).
struct Term {
  enum class Kind : std::uint8_t { iri, literal };

  Kind kind = Kind::iri;
  std::string value;     // IRI text or literal lexical form
  std::string datatype;  // literal datatype IRI; empty for plain literals

  static Term iri(std::string v) {
    if (!is_absolute_iri(v)) throw InvalidInputError("IRI is not absolute: '" + v + "'");
    return {Kind::iri, std::move(v), {}};
  }
  static Term literal(std::string lexical, std::string datatype) {
    return {Kind::literal, std::move(lexical), std::move(datatype)};
  }
  static Term plain(std::string lexical) { return {Kind::literal, std::move(lexical), {}}; }
  static Term integer(std::int64_t v) { return literal(fmt::format_int(v), xsd_integer()); }
  static Term dbl(double v) { return literal(fmt::format_double(v), xsd_double()); }

  bool is_iri() const { return kind == Kind::iri; }
  bool is_literal() const { return kind == Kind::literal; }

  std::optional<double> as_double() const { return is_literal() ? fmt::parse_double(value) : std::nullopt; }
  std::optional<std::int64_t> as_int() const { return is_literal() ? fmt::parse_int(value) : std::nullopt; }

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.value);
    h ^= std::hash<std::string>{}(t.datatype) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h ^ static_cast<std::size_t>(t.kind);
  }
};

/// Work done by one cells_by_range call.
struct RangeScanStats {
  std::size_t entries_scanned = 0;  // cell entries examined
  std::size_t rows_visited = 0;     // row buckets inside the row range
};

/// Predicates feeding the cell index.
struct IndexPredicates {
  std::string row_order;
  std::string col_order;
  std::string level;
};

using TermId = std::uint32_t;

/// A triple as positions in the graph's term table.
struct TripleIds {
  TermId s = 0;
  TermId p = 0;
  TermId o = 0;

  friend bool operator==(const TripleIds&, const TripleIds&) = default;
};

struct TripleIdsHash {
  std::size_t operator()(const TripleIds& t) const noexcept {
    std::uint64_t h = (std::uint64_t{t.s} << 32 | t.p) * 0x9e3779b97f4a7c15ULL;
    h ^= (std::uint64_t{t.o} + 0x632be59bd9b4e019ULL) * 0xc2b2ae3d27d4eb4fULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Set of triples over an interned term table. One writer or many
/// concurrent readers.
class TripleGraph {
 public:
  explicit TripleGraph(IndexPredicates idx) : idx_(std::move(idx)) {}

  /// Inserts unless already present. Subject and predicate must be IRIs.
  bool add(Triple t) {
    if (!t.subject.is_iri() || !t.predicate.is_iri()) throw InvalidInputError("subject and predicate must be IRIs");
    const TripleIds ids{intern(std::move(t.subject)), intern(std::move(t.predicate)), intern(std::move(t.object))};
    if (!lookup_.insert(ids).second) return false;
    if (triples_.size() >= std::numeric_limits<std::uint32_t>::max()) throw InvalidInputError("graph is full");
    const auto pos = static_cast<std::uint32_t>(triples_.size());
    triples_.push_back(ids);
    postings_[ids.s].as_subject.push_back(pos);
    postings_[ids.p].as_predicate.push_back(pos);
    postings_[ids.o].as_object.push_back(pos);
    index_cell(ids);
    return true;
  }

  template <class Range>
  std::size_t add_all(Range&& triples) {
    std::size_t added = 0;
    for (auto& t : triples) added += add(t) ? 1 : 0;
    return added;
  }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  bool contains(const Triple& t) const {
    const auto s = find(t.subject), p = find(t.predicate), o = find(t.object);
    return s && p && o && lookup_.count({*s, *p, *o}) != 0;
  }

  bool has_subject(const std::string& iri) const {
    const auto id = find(Term{Term::Kind::iri, iri, {}});
    return id && !postings_[*id].as_subject.empty();
  }

  const Term& term(TermId id) const { return terms_.at(id); }
  std::size_t term_count() const { return terms_.size(); }

  /// Insertion order.
  const std::vector<TripleIds>& triple_ids() const { return triples_; }
  Triple triple(std::size_t i) const {
    const TripleIds& t = triples_.at(i);
    return {terms_[t.s], terms_[t.p], terms_[t.o]};
  }
  /// Materialized copy in insertion order.
  std::vector<Triple> triples() const {
    std::vector<Triple> out;
    out.reserve(triples_.size());
    for (std::size_t i = 0; i < triples_.size(); ++i) out.push_back(triple(i));
    return out;
  }

  const IndexPredicates& index_predicates() const { return idx_; }

  /// Triples matching every bound position.
  std::vector<Triple> match(const std::optional<Term>& s, const std::optional<Term>& p,
                            const std::optional<Term>& o) const {
    std::optional<TermId> sid, pid, oid;
    const std::vector<std::uint32_t>* candidates = nullptr;
    auto narrow = [&](const std::optional<Term>& bound, std::optional<TermId>& id,
                      std::vector<std::uint32_t> Postings::*list) {
      if (!bound) return true;
      id = find(*bound);
      if (!id) return false;
      const auto& l = postings_[*id].*list;
      if (!candidates || l.size() < candidates->size()) candidates = &l;
      return true;
    };
    if (!narrow(s, sid, &Postings::as_subject) || !narrow(p, pid, &Postings::as_predicate) ||
        !narrow(o, oid, &Postings::as_object))
      return {};
    if (!candidates) return triples();
    std::vector<Triple> out;
    for (std::uint32_t i : *candidates) {
      const TripleIds& t = triples_[i];
      if ((!sid || t.s == *sid) && (!pid || t.p == *pid) && (!oid || t.o == *oid)) out.push_back(triple(i));
    }
    return out;
  }

  /// Objects of (subject, predicate, ?).
  std::vector<Term> objects(const std::string& subject, const std::string& predicate) const {
    std::vector<Term> out;
    const auto s = find(Term{Term::Kind::iri, subject, {}}), p = find(Term{Term::Kind::iri, predicate, {}});
    if (!s || !p) return out;
    for (std::uint32_t i : postings_[*s].as_subject)
      if (triples_[i].p == *p) out.push_back(terms_[triples_[i].o]);
    return out;
  }

  /// Subjects of (?, predicate, object), in insertion order without repeats.
  std::vector<std::string> subjects(const std::string& predicate, const Term& object) const {
    std::vector<std::string> out;
    const auto p = find(Term{Term::Kind::iri, predicate, {}}), o = find(object);
    if (!p || !o) return out;
    std::unordered_set<TermId> seen;
    const auto& by_p = postings_[*p].as_predicate;
    const auto& by_o = postings_[*o].as_object;
    for (std::uint32_t i : by_p.size() < by_o.size() ? by_p : by_o) {
      const TripleIds& t = triples_[i];
      if (t.p == *p && t.o == *o && seen.insert(t.s).second) out.push_back(terms_[t.s].value);
    }
    return out;
  }

  /// Cell subjects whose row/col literals fall inside `r`, optionally
  /// restricted to one level. Ordered by (level, row, col, iri).
  std::vector<std::string> cells_by_range(const CellRange& r, std::optional<int> level = std::nullopt,
                                          RangeScanStats* stats = nullptr) const {
    RangeScanStats local;
    RangeScanStats& st = stats ? *stats : local;
    std::vector<std::string> out;
    auto scan_level = [&](const RowMap& rows) {
      for (auto row = rows.lower_bound(r.row_min); row != rows.end() && row->first <= r.row_max; ++row) {
        ++st.rows_visited;
        const ColMap& cols = row->second;
        for (auto col = cols.lower_bound(r.col_min); col != cols.end() && col->first <= r.col_max; ++col) {
          ++st.entries_scanned;
          out.insert(out.end(), col->second.begin(), col->second.end());
        }
      }
    };
    if (level) {
      auto it = cell_index_.find(*level);
      if (it != cell_index_.end()) scan_level(it->second);
    } else {
      for (const auto& [lvl, rows] : cell_index_) scan_level(rows);
    }
    return out;
  }

 private:
  using ColMap = std::map<std::int64_t, std::set<std::string>>;
  using RowMap = std::map<std::int64_t, ColMap>;

  struct Postings {
    std::vector<std::uint32_t> as_subject, as_predicate, as_object;
  };

  struct CellKeys {
    std::set<std::int64_t> rows, cols;
    std::set<int> levels;
  };

  std::optional<TermId> find(const Term& t) const {
    auto [it, end] = term_index_.equal_range(TermHash{}(t));
    for (; it != end; ++it)
      if (terms_[it->second] == t) return it->second;
    return std::nullopt;
  }

  TermId intern(Term t) {
    const std::size_t h = TermHash{}(t);
    auto [it, end] = term_index_.equal_range(h);
    for (; it != end; ++it)
      if (terms_[it->second] == t) return it->second;
    const auto id = static_cast<TermId>(terms_.size());
    terms_.push_back(std::move(t));
    postings_.emplace_back();
    term_index_.emplace(h, id);
    return id;
  }

  void index_cell(const TripleIds& ids) {
    const auto& pred = terms_[ids.p].value;
    const bool is_row = pred == idx_.row_order, is_col = pred == idx_.col_order, is_level = pred == idx_.level;
    if (!is_row && !is_col && !is_level) return;
    const auto v = terms_[ids.o].as_int();
    if (!v) return;
    const std::string& subject = terms_[ids.s].value;
    CellKeys& keys = cell_keys_[ids.s];
    // Remove the subject's old combinations, extend, re-insert.
    for_each_key(keys, [&](int l, std::int64_t row, std::int64_t col) {
      auto& cols = cell_index_[l][row];
      auto& subs = cols[col];
      subs.erase(subject);
      if (subs.empty()) cols.erase(col);
      if (cols.empty()) cell_index_[l].erase(row);
    });
    if (is_row) keys.rows.insert(*v);
    if (is_col) keys.cols.insert(*v);
    if (is_level) keys.levels.insert(static_cast<int>(*v));
    for_each_key(keys, [&](int l, std::int64_t row, std::int64_t col) { cell_index_[l][row][col].insert(subject); });
  }

  template <class F>
  static void for_each_key(const CellKeys& k, F&& f) {
    static const std::set<int> kNoLevel{0};
    const auto& levels = k.levels.empty() ? kNoLevel : k.levels;
    for (int l : levels)
      for (auto row : k.rows)
        for (auto col : k.cols) f(l, row, col);
  }

  IndexPredicates idx_;
  std::vector<Term> terms_;
  std::vector<Postings> postings_;  // parallel to terms_
  std::unordered_multimap<std::size_t, TermId> term_index_;
  std::vector<TripleIds> triples_;
  std::unordered_set<TripleIds, TripleIdsHash> lookup_;
  std::unordered_map<TermId, CellKeys> cell_keys_;
  std::map<int, RowMap> cell_index_;  // level 0 = subjects without a level triple
};

}  // namespace gridskg::kg
