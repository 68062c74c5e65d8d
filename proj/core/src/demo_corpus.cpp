#include "triplesum/demo_corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "triplesum/error.hpp"

namespace triplesum {

namespace {

struct Country {
  std::string_view uri;
  std::string_view adjective;
};

constexpr std::array<Country, 12> kCountries{{
    {"dbr:United_States", "American"}, {"dbr:United_Kingdom", "British"}, {"dbr:France", "French"},
    {"dbr:Germany", "German"},         {"dbr:Italy", "Italian"},          {"dbr:Spain", "Spanish"},
    {"dbr:Norway", "Norwegian"},       {"dbr:Sweden", "Swedish"},         {"dbr:Canada", "Canadian"},
    {"dbr:Brazil", "Brazilian"},       {"dbr:Japan", "Japanese"},         {"dbr:Poland", "Polish"},
}};

struct Occupation {
  std::string_view uri;
  std::string_view word;
  std::string_view work_word;
  bool performer;  // performers' obituaries lead with the life span
};

constexpr std::array<Occupation, 7> kOccupations{{
    {"dbr:Writer", "writer", "novel", false},
    {"dbr:Poet", "poet", "collection", false},
    {"dbr:Musician", "musician", "album", true},
    {"dbr:Singer", "singer", "song", true},
    {"dbr:Film_director", "director", "film", false},
    {"dbr:Architect", "architect", "building", false},
    {"dbr:Painter", "painter", "painting", true},
}};

constexpr std::array<std::string_view, 8> kAwards{
    "Golden Quill Prize", "Aurora Medal", "Meridian Award", "Silver Lantern Prize",
    "Halvorsen Prize",    "Crescent Medal", "Northern Star Award", "Vantage Prize"};

// Free paraphrases with skewed frequencies; not derivable from the triples.
constexpr std::array<std::string_view, 5> kFromPhrases{"from", "based in", "living in", "settled in", "resident in"};
constexpr std::array<std::string_view, 5> kBornPhrases{"born in", "raised in", "brought up in", "educated in",
                                                       "trained in"};
constexpr std::array<std::string_view, 5> kKnownPhrases{"is known for", "is best known for", "is famous for",
                                                        "is celebrated for", "is remembered for"};
constexpr std::array<double, 5> kPhraseWeights{6, 1, 1, 1, 1};

// Town names are prefix + suffix; each person gets a fresh one until the
// pool runs out, so towns stay rare and surface as placeholders.
constexpr std::array<std::string_view, 20> kTownPrefixes{
    "North", "East", "West", "South", "Silver", "Red",  "Oak",   "Raven", "Stone", "Bell",
    "Ash",   "Glen", "High", "King",   "Linden", "Mill", "New",   "Pine",  "Rose",  "Thorn"};
constexpr std::array<std::string_view, 15> kTownSuffixes{"bridge", "wick", "ton",  "ford", "mere", "haven", "holm", "gate",
                                                         "mont",   "by",   "more", "combe", "port", "hurst", "dale"};

constexpr std::array<std::string_view, 16> kFemaleNames{"Anna",  "Maria", "Clara", "Elena", "Sofia", "Ingrid",
                                                        "Laura", "Nora",  "Helena", "Julia", "Marta", "Alice",
                                                        "Greta", "Irene", "Lucia", "Vera"};
constexpr std::array<std::string_view, 16> kMaleNames{"Erik",   "Paul",  "Jonas", "Marco", "Lukas", "Daniel",
                                                      "Victor", "Oscar", "Hugo",  "Felix", "Anton", "Bruno",
                                                      "Carl",   "Emil",  "Leon",  "Tomas"};
constexpr std::array<std::string_view, 32> kSurnames{
    "Berg",   "Lindqvist", "Moreau",  "Rossi",   "Novak",   "Keller",  "Hansen", "Alvarez", "Brandt",  "Costa",
    "Duval",  "Eriksen",   "Fischer", "Garcia",  "Holm",    "Ito",     "Jensen", "Kowalski", "Larsen", "Marino",
    "Nilsen", "Olsen",     "Petit",   "Quinn",   "Richter", "Santos",  "Tanaka", "Ulrich",  "Vogel",   "Weber",
    "Young",  "Zeller"};

constexpr std::array<std::string_view, 20> kTitleAdjectives{
    "Silent", "Golden", "Broken", "Hidden", "Quiet", "Distant", "Burning", "Frozen", "Endless", "Wild",
    "Pale",   "Hollow", "Bright", "Lonely", "Secret", "Crimson", "Gentle", "Restless", "Open", "Last"};
constexpr std::array<std::string_view, 20> kTitleNouns{
    "River", "Garden", "Harbor", "Winter", "Mirror", "Road",   "Summer", "Tower", "Forest", "Shore",
    "Bridge", "Window", "Season", "Valley", "Light", "Orchard", "Island", "Letter", "Hours", "Field"};

std::string uri_of(std::string_view surface) {
  std::string out = "dbr:";
  for (char c : surface) out.push_back(c == ' ' ? '_' : c);
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto sp = s.find(' ', pos);
    out.emplace_back(s.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos));
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  return out;
}

// Appends tokens to the current sentence, annotating them when `uri` is set.
struct SentenceBuilder {
  AnnotatedSummary& summary;
  std::vector<std::string> tokens;

  void text(std::string_view s) {
    for (auto& w : words(s)) tokens.push_back(std::move(w));
  }
  void mention(std::string_view surface, const std::string& uri) {
    const std::size_t start = tokens.size();
    text(surface);
    summary.annotations.push_back({summary.sentences.size(), start, tokens.size(), uri, std::string(surface)});
  }
  void finish() {
    tokens.push_back(".");
    summary.sentences.push_back(std::move(tokens));
    tokens.clear();
  }
};

}  // namespace

DemoCorpus make_demo_corpus(std::uint64_t seed, std::size_t size) {
  if (size < 10) throw DataError("demo corpus size must be at least 10");
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  // Nationalities and occupations follow a Zipf law, as biographies do.
  auto zipf = [](std::size_t n) {
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(1.0 / static_cast<double>(i + 1));
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  };
  auto country_dist = zipf(kCountries.size());
  auto occupation_dist = zipf(kOccupations.size());

  std::discrete_distribution<std::size_t> phrase_dist(kPhraseWeights.begin(), kPhraseWeights.end());

  std::vector<std::string> towns;
  for (auto p : kTownPrefixes)
    for (auto s : kTownSuffixes) towns.push_back(std::string(p) + std::string(s));
  std::shuffle(towns.begin(), towns.end(), rng);

  // A quarter each of (alive, dead) x (no award, award), cycling so that the
  // extremes come first and every triple count stays inside
  // floor(mean + 1.5 sigma) for any size >= 10.
  constexpr std::array<int, 4> kCycle{0, 3, 1, 2};
  std::vector<int> category(size);
  for (std::size_t i = 0; i < size; ++i) category[i] = kCycle[i % 4];
  std::shuffle(category.begin(), category.end(), rng);

  DemoCorpus out;
  std::set<std::string> used_people, used_titles, typed;
  auto add_type = [&](const std::string& uri, std::string_view type) {
    if (typed.insert(uri).second) out.types.emplace_back(uri, std::string(type));
  };

  for (std::size_t i = 0; i < size; ++i) {
    const bool has_death = category[i] >= 2;
    const bool has_award = category[i] % 2 == 1;
    const bool female = pick(4) == 0;  // three in four biographies are of men
    const std::string first(female ? kFemaleNames[pick(kFemaleNames.size())] : kMaleNames[pick(kMaleNames.size())]);
    const std::string name = first + " " + std::string(kSurnames[pick(kSurnames.size())]);
    std::string person = uri_of(name);
    for (int k = 2; !used_people.insert(person).second; ++k) person = uri_of(name) + "_" + std::to_string(k);

    const Country& country = kCountries[country_dist(rng)];
    const Occupation& occ = kOccupations[occupation_dist(rng)];
    const std::string& city = towns[i % towns.size()];
    const std::string award(kAwards[pick(kAwards.size())]);
    const std::string from(kFromPhrases[phrase_dist(rng)]);
    const std::string born(kBornPhrases[phrase_dist(rng)]);
    const std::string known(kKnownPhrases[phrase_dist(rng)]);
    const int birth_year = 1890 + static_cast<int>(pick(100));
    const int birth_month = 1 + static_cast<int>(pick(12));
    const int death_year = birth_year + 40 + static_cast<int>(pick(50));
    const int death_month = 1 + static_cast<int>(pick(12));
    std::string title;
    do {
      title = "The " + std::string(kTitleAdjectives[pick(kTitleAdjectives.size())]) + " " +
              std::string(kTitleNouns[pick(kTitleNouns.size())]);
      if (used_titles.count(title)) title += " " + std::string(kTitleNouns[pick(kTitleNouns.size())]);
    } while (!used_titles.insert(title).second);

    auto date = [](int y, int m) { return fmt::format("{:04d}-{:02d}-01", y, m); };
    out.triples.push_back({person, "dbo:birthDate", date(birth_year, birth_month), ObjectKind::date, {}});
    out.triples.push_back({person, "dbo:birthPlace", uri_of(city), ObjectKind::entity, {}});
    out.triples.push_back({person, "dbo:nationality", std::string(country.uri), ObjectKind::entity, {}});
    out.triples.push_back({person, "dbo:occupation", std::string(occ.uri), ObjectKind::entity, {}});
    if (has_death)
      out.triples.push_back({person, "dbo:deathDate", date(death_year, death_month), ObjectKind::date, {}});
    out.triples.push_back({person, "dbo:notableWork", uri_of(title), ObjectKind::entity, {}});

    add_type(person, "dbo:Person");
    add_type(uri_of(city), "dbo:City");
    add_type(std::string(country.uri), "dbo:Country");
    add_type(std::string(occ.uri), "dbo:PersonFunction");
    add_type(uri_of(title), "dbo:Work");
    if (has_award) {
      out.triples.push_back({person, "dbo:award", uri_of(award), ObjectKind::entity, {}});
      add_type(uri_of(award), "dbo:Award");
    }
    out.genders.emplace_back(person, female ? "female" : "male");

    AnnotatedSummary s;
    s.id = fmt::format("demo-{:05d}", i);
    s.main_entity = person;
    SentenceBuilder b{s, {}};
    auto close_first = [&] {
      if (has_award) {
        b.text(", winner of the");
        b.mention(award, uri_of(award));
      }
      b.finish();
    };
    const std::string pronoun = female ? "She" : "He";
    if (!has_death) {
      b.mention(name, person);
      b.text("is a");
      b.mention(country.adjective, std::string(country.uri));
      b.mention(occ.word, std::string(occ.uri));
      b.text(from);
      b.mention(city, uri_of(city));
      close_first();
      b.text(pronoun + " was born in " + std::to_string(birth_year) + " and " + known + " the " + std::string(occ.work_word));
      b.mention(title, uri_of(title));
      b.finish();
    } else if (occ.performer) {
      b.mention(name, person);
      b.text("( " + std::to_string(birth_year) + " - " + std::to_string(death_year) + " ) was a");
      b.mention(country.adjective, std::string(country.uri));
      b.mention(occ.word, std::string(occ.uri));
      b.text(born);
      b.mention(city, uri_of(city));
      close_first();
      b.text(pronoun + " " + known + " the " + std::string(occ.work_word));
      b.mention(title, uri_of(title));
      b.finish();
    } else {
      b.mention(name, person);
      b.text("was a");
      b.mention(country.adjective, std::string(country.uri));
      b.mention(occ.word, std::string(occ.uri));
      b.text(born);
      b.mention(city, uri_of(city));
      b.text("in " + std::to_string(birth_year));
      close_first();
      b.text(pronoun + " died in " + std::to_string(death_year) + " and " + known + " the " + std::string(occ.work_word));
      b.mention(title, uri_of(title));
      b.finish();
    }
    out.summaries.push_back(std::move(s));
  }
  return out;
}

void write_demo_corpus(const DemoCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw DataError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("triples.nt");
    for (const auto& t : corpus.triples) f << format_triple_line(t) << '\n';
  }
  {
    auto f = open("summaries.jsonl");
    for (const auto& s : corpus.summaries) write_summary_jsonl(f, s);
  }
  {
    auto f = open("types.tsv");
    for (const auto& [k, v] : corpus.types) f << k << '\t' << v << '\n';
  }
  {
    auto f = open("genders.tsv");
    for (const auto& [k, v] : corpus.genders) f << k << '\t' << v << '\n';
  }
}

}  // namespace triplesum
