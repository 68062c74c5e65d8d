#include <istream>
#include <ostream>

#include "json.hpp"
#include "triplesum/corpus.hpp"
#include "triplesum/error.hpp"

namespace triplesum {

using nlohmann::json;

namespace {

template <class Fn>
void for_each_json_line(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

json triple_to_json(const Triple& t) {
  json j = {{"s", t.subject}, {"p", t.predicate}, {"o", t.object}, {"kind", std::string(to_string(t.object_kind))}};
  if (!t.type.empty()) j["type"] = t.type;
  return j;
}

Triple triple_from_json(const json& j) {
  Triple t;
  t.subject = j.at("s").get<std::string>();
  t.predicate = j.at("p").get<std::string>();
  t.object = j.at("o").get<std::string>();
  t.object_kind = object_kind_from_string(j.at("kind").get<std::string>());
  t.type = j.value("type", std::string());
  if (t.subject.empty() || t.predicate.empty()) throw DataError("triple with empty subject or predicate");
  return t;
}

}  // namespace

std::vector<AnnotatedSummary> read_summaries_jsonl(std::istream& in) {
  std::vector<AnnotatedSummary> out;
  for_each_json_line(in, "summaries", [&](const json& j) {
    AnnotatedSummary s;
    s.main_entity = compact_iri(j.at("main_entity").get<std::string>());
    s.id = j.value("id", s.main_entity);
    s.sentences = j.at("sentences").get<std::vector<std::vector<std::string>>>();
    for (const auto& a : j.value("annotations", json::array())) {
      Annotation ann;
      ann.sentence = a.at("sentence_idx").get<std::size_t>();
      ann.start = a.at("start").get<std::size_t>();
      ann.end = a.at("end").get<std::size_t>();
      ann.uri = compact_iri(a.at("uri").get<std::string>());
      ann.surface = a.at("surface").get<std::string>();
      s.annotations.push_back(std::move(ann));
    }
    if (j.contains("confidence")) s.confidence = j["confidence"].get<double>();
    if (j.contains("support")) s.support = j["support"].get<double>();
    out.push_back(std::move(s));
  });
  return out;
}

void write_summary_jsonl(std::ostream& out, const AnnotatedSummary& s) {
  json anns = json::array();
  for (const auto& a : s.annotations)
    anns.push_back({{"sentence_idx", a.sentence}, {"start", a.start}, {"end", a.end}, {"uri", a.uri}, {"surface", a.surface}});
  json j = {{"id", s.id}, {"main_entity", s.main_entity}, {"sentences", s.sentences}, {"annotations", anns}};
  if (s.confidence) j["confidence"] = *s.confidence;
  if (s.support) j["support"] = *s.support;
  out << j.dump() << '\n';
}

void write_example_jsonl(std::ostream& out, const AlignedExample& e) {
  json triples = json::array();
  for (const auto& t : e.triples) triples.push_back(triple_to_json(t));
  json tokens = json::array();
  for (const auto& t : e.summary) {
    json tok = {{"kind", std::string(to_string(t.kind))}, {"text", t.text}};
    if (t.uri) tok["uri"] = *t.uri;
    if (t.surface) tok["surface"] = *t.surface;
    tokens.push_back(std::move(tok));
  }
  json j = {{"id", e.id},
            {"main_entity", e.main_entity},
            {"item_surface", e.item_surface},
            {"mode", std::string(to_string(e.mode))},
            {"triples", triples},
            {"summary", tokens},
            {"reference", e.reference}};
  out << j.dump() << '\n';
}

std::vector<AlignedExample> read_examples_jsonl(std::istream& in) {
  std::vector<AlignedExample> out;
  for_each_json_line(in, "corpus", [&](const json& j) {
    AlignedExample e;
    e.id = j.at("id").get<std::string>();
    e.main_entity = j.value("main_entity", std::string());
    e.item_surface = j.value("item_surface", std::string());
    e.mode = summary_mode_from_string(j.at("mode").get<std::string>());
    for (const auto& t : j.at("triples")) e.triples.push_back(triple_from_json(t));
    for (const auto& t : j.at("summary")) {
      SummaryToken tok;
      tok.kind = token_kind_from_string(t.at("kind").get<std::string>());
      tok.text = t.at("text").get<std::string>();
      if (t.contains("uri")) tok.uri = t["uri"].get<std::string>();
      if (t.contains("surface")) tok.surface = t["surface"].get<std::string>();
      if (tok.kind == TokenKind::surface_tuple && (!tok.uri || !tok.surface))
        throw DataError("surface tuple without uri and surface in " + e.id);
      e.summary.push_back(std::move(tok));
    }
    if (e.summary.empty() || e.summary.front().text != kStartToken || e.summary.back().text != kEndToken)
      throw DataError("summary of " + e.id + " is not wrapped in <start> ... <end>");
    e.reference = j.value("reference", std::vector<std::string>());
    out.push_back(std::move(e));
  });
  return out;
}

namespace {

json stats_to_json(const CorpusStats& s) {
  return {{"e_min", s.e_min},
          {"e_mean", s.e_mean},
          {"e_std", s.e_std},
          {"lower_bound", s.lower_bound()},
          {"upper_bound", s.upper_bound()},
          {"articles", s.articles},
          {"entities", s.entities},
          {"predicates", s.predicates},
          {"words", s.words},
          {"annotated_entities", s.annotated_entities}};
}

}  // namespace

std::string stats_json(const CorpusStats& stats) { return stats_to_json(stats).dump(2); }

std::string corpus_report_json(const CorpusBuild& build) {
  json excluded = json::object();
  for (const auto& [reason, n] : build.exclusion_counts()) excluded[reason] = n;
  json list = json::array();
  for (const auto& e : build.exclusions) list.push_back({{"id", e.article_id}, {"reason", e.reason}});
  json j = {{"stats", stats_to_json(build.stats)},
            {"examples", build.examples.size()},
            {"trimmed", build.trimmed},
            {"dropped_malformed_dates", build.dropped_malformed_dates},
            {"exclusion_counts", excluded},
            {"exclusions", list},
            {"in_vocab_size", build.in_vocab.size()}};
  return j.dump(2);
}

CorpusStats read_stats_json(std::istream& in) {
  try {
    json j = json::parse(in);
    if (j.contains("stats")) j = j["stats"];
    CorpusStats s;
    s.e_min = j.at("e_min").get<std::size_t>();
    s.e_mean = j.at("e_mean").get<double>();
    s.e_std = j.at("e_std").get<double>();
    s.articles = j.value("articles", std::size_t{0});
    s.entities = j.value("entities", std::size_t{0});
    s.predicates = j.value("predicates", std::size_t{0});
    s.words = j.value("words", std::size_t{0});
    s.annotated_entities = j.value("annotated_entities", std::size_t{0});
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("stats document: ") + e.what());
  }
}

}  // namespace triplesum
