#include "triplesum/triple.hpp"

#include <array>
#include <charconv>
#include <utility>

#include "triplesum/error.hpp"
#include "triplesum/text.hpp"

namespace triplesum {
namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 11> kPrefixes{{
    {"http://dbpedia.org/resource/", "dbr:"},
    {"http://dbpedia.org/ontology/", "dbo:"},
    {"http://dbpedia.org/property/", "dbp:"},
    {"http://www.wikidata.org/prop/direct/", "wikidata:"},
    {"http://www.wikidata.org/entity/", "wikidata:"},
    {"http://xmlns.com/foaf/0.1/", "foaf:"},
    {"http://www.w3.org/1999/02/22-rdf-syntax-ns#", "rdf:"},
    {"http://www.w3.org/2000/01/rdf-schema#", "rdfs:"},
    {"http://www.w3.org/2002/07/owl#", "owl:"},
    {"http://www.w3.org/2001/XMLSchema#", "xsd:"},
    {"http://schema.org/", "schema:"},
}};

struct Term {
  enum class Kind { iri, literal, bare } kind = Kind::bare;
  std::string value;
  std::string datatype;  // literals only, compacted
};

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view line, std::string_view what) {
  throw DataError("malformed triple line (" + std::string(what) + "): " + std::string(line));
}

Term read_term(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && is_ws(line[pos])) ++pos;
  if (pos >= line.size()) fail(line, "missing term");
  Term t;
  const char c = line[pos];
  if (c == '<') {
    const auto close = line.find('>', pos);
    if (close == std::string_view::npos) fail(line, "unterminated IRI");
    t.kind = Term::Kind::iri;
    t.value = compact_iri(line.substr(pos, close - pos + 1));
    pos = close + 1;
  } else if (c == '"') {
    t.kind = Term::Kind::literal;
    ++pos;
    bool closed = false;
    while (pos < line.size()) {
      const char d = line[pos++];
      if (d == '\\' && pos < line.size()) {
        const char e = line[pos++];
        t.value.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
      } else if (d == '"') {
        closed = true;
        break;
      } else {
        t.value.push_back(d);
      }
    }
    if (!closed) fail(line, "unterminated literal");
    if (line.substr(pos, 2) == "^^") {
      pos += 2;
      Term dt = read_term(line, pos);
      t.datatype = dt.value;
    } else if (pos < line.size() && line[pos] == '@') {
      while (pos < line.size() && !is_ws(line[pos])) ++pos;
    }
  } else {
    const auto start = pos;
    while (pos < line.size() && !is_ws(line[pos])) ++pos;
    t.value = std::string(line.substr(start, pos - start));
  }
  return t;
}

bool is_numeric_datatype(std::string_view dt) {
  constexpr std::array<std::string_view, 14> numeric{
      "xsd:integer", "xsd:int", "xsd:long", "xsd:short", "xsd:decimal", "xsd:double", "xsd:float",
      "xsd:nonNegativeInteger", "xsd:positiveInteger", "xsd:negativeInteger", "xsd:nonPositiveInteger",
      "xsd:unsignedInt", "xsd:unsignedLong", "xsd:byte"};
  for (auto n : numeric)
    if (dt == n) return true;
  return false;
}

ObjectKind classify_literal(const Term& t) {
  if (!t.datatype.empty()) {
    if (t.datatype == "xsd:date" || t.datatype == "xsd:dateTime") return ObjectKind::date;
    if (t.datatype == "xsd:gYear") return text::is_numeral(t.value) ? ObjectKind::year : ObjectKind::other_literal;
    if (is_numeric_datatype(t.datatype)) return ObjectKind::number;
    return ObjectKind::other_literal;
  }
  if (parse_date(t.value)) return ObjectKind::date;
  if (text::is_numeral(t.value)) return ObjectKind::number;
  return ObjectKind::other_literal;
}

bool needs_quotes(const Triple& t) {
  return t.object_kind == ObjectKind::date || t.object_kind == ObjectKind::other_literal;
}

}  // namespace

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::entity: return "entity";
    case ObjectKind::number: return "number";
    case ObjectKind::year: return "year";
    case ObjectKind::month: return "month";
    case ObjectKind::date: return "date";
    case ObjectKind::other_literal: return "other_literal";
  }
  return "entity";
}

ObjectKind object_kind_from_string(std::string_view name) {
  for (auto k : {ObjectKind::entity, ObjectKind::number, ObjectKind::year, ObjectKind::month, ObjectKind::date,
                 ObjectKind::other_literal})
    if (to_string(k) == name) return k;
  throw DataError("unknown object kind: " + std::string(name));
}

std::string compact_iri(std::string_view iri) {
  std::string_view inner = iri;
  if (inner.size() >= 2 && inner.front() == '<' && inner.back() == '>') inner = inner.substr(1, inner.size() - 2);
  for (const auto& [ns, prefix] : kPrefixes) {
    if (inner.substr(0, ns.size()) == ns) return std::string(prefix) + std::string(inner.substr(ns.size()));
  }
  return std::string(iri);
}

std::optional<CalendarDate> parse_date(std::string_view literal) {
  std::string_view s = literal;
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  // YYYY-MM-DD, optionally followed by a time part or timezone.
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  CalendarDate d;
  auto num = [](std::string_view part, int& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && p == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), d.year) || !num(s.substr(5, 2), d.month) || !num(s.substr(8, 2), d.day))
    return std::nullopt;
  if (s.size() > 10) {
    const char next = s[10];
    if (next != 'T' && next != 'Z' && next != '+' && next != '-' && next != ' ') return std::nullopt;
  }
  if (negative) d.year = -d.year;
  return d;
}

std::optional<Triple> parse_triple_line(std::string_view line, const YearRange& /*years*/) {
  const std::string_view body = trim(line);
  if (body.empty() || body.front() == '#') return std::nullopt;
  std::size_t pos = 0;
  Term s = read_term(body, pos);
  Term p = read_term(body, pos);
  Term o = read_term(body, pos);
  const std::string_view rest = trim(body.substr(pos));
  if (!rest.empty() && rest != ".") fail(line, "trailing content");
  if (s.kind == Term::Kind::literal || p.kind == Term::Kind::literal) fail(line, "literal in subject/predicate");
  if (rest.empty() && o.kind == Term::Kind::bare && o.value == ".") fail(line, "missing object");
  // A bare object glued to the statement terminator.
  if (rest.empty() && o.kind == Term::Kind::bare && o.value.size() > 1 && o.value.back() == '.')
    o.value.pop_back();
  if (s.value.empty() || p.value.empty()) fail(line, "empty subject/predicate");

  Triple t;
  t.subject = std::move(s.value);
  t.predicate = std::move(p.value);
  switch (o.kind) {
    case Term::Kind::iri:
      t.object_kind = ObjectKind::entity;
      break;
    case Term::Kind::literal:
      t.object_kind = classify_literal(o);
      break;
    case Term::Kind::bare:
      t.object_kind = text::is_numeral(o.value) ? ObjectKind::number : ObjectKind::entity;
      if (o.value == kYearToken) t.object_kind = ObjectKind::year;
      break;
  }
  t.object = std::move(o.value);
  return t;
}

std::vector<Triple> read_triples(std::istream& in, const YearRange& years) {
  std::vector<Triple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      if (auto t = parse_triple_line(line, years)) out.push_back(std::move(*t));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_triple_line(const Triple& t) {
  std::string out = t.subject + " " + t.predicate + " ";
  if (needs_quotes(t)) {
    out.push_back('"');
    for (char c : t.object) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
    if (t.object_kind == ObjectKind::date) out += "^^xsd:date";
  } else {
    out += t.object;
  }
  out += " .";
  return out;
}

}  // namespace triplesum
