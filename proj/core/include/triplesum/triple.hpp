#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triplesum/special_tokens.hpp"

namespace triplesum {

// `date` is a raw-stage kind: the pipeline always rewrites date objects into
// a month triple and a year triple before anything downstream sees them.
enum class ObjectKind { entity, number, year, month, date, other_literal };

std::string_view to_string(ObjectKind kind);
ObjectKind object_kind_from_string(std::string_view name);

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  ObjectKind object_kind = ObjectKind::entity;
  // Instance type of the triple's non-<item> entity, when one is known.
  std::string type;

  bool same_statement(const Triple& other) const {
    return subject == other.subject && predicate == other.predicate && object == other.object;
  }
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct YearRange {
  int min = 1000;
  int max = 2100;
};

// Rewrites full IRIs of well-known namespaces into prefixed form
// (http://dbpedia.org/resource/X -> dbr:X). Unknown IRIs keep their brackets.
std::string compact_iri(std::string_view iri);

// Parses one `subject predicate object .` line. Returns nullopt for blank
// and comment lines; throws DataError on malformed input. The returned
// triple has its object kind assigned but is not yet normalized.
std::optional<Triple> parse_triple_line(std::string_view line, const YearRange& years = {});

std::vector<Triple> read_triples(std::istream& in, const YearRange& years = {});

// Writes `subject predicate object .` with literals quoted.
std::string format_triple_line(const Triple& t);

struct CalendarDate {
  int year = 0;
  int month = 0;
  int day = 0;
};

// Accepts YYYY-MM-DD with an optional time suffix (xsd:date / xsd:dateTime).
std::optional<CalendarDate> parse_date(std::string_view literal);

}  // namespace triplesum
