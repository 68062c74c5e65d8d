#include <spdlog/spdlog.h>

#include <memory>

#include "cli/commands.hpp"
#include "cli/config_file.hpp"
#include "triplesum/demo_corpus.hpp"
#include "triplesum/triple.hpp"

namespace triplesum::cli {

namespace {

struct DemoOptions {
  std::string out;
  std::size_t size = 200;
  std::uint64_t seed = 1;
};

void run_demo(const DemoOptions& o) {
  const auto demo = make_demo_corpus(o.seed, o.size);
  write_demo_corpus(demo, o.out);
  spdlog::info("demo-corpus articles={} triples={} dir={}", demo.summaries.size(), demo.triples.size(), o.out);
}

struct BuildCorpusOptions {
  std::string triples, summaries, types, genders;
  std::string out;
  std::string mode = "uri";
  double valid_fraction = 0.0;
  double test_fraction = 0.0;
  std::uint64_t seed = 1;
  std::size_t max_sentences = 2;
  std::size_t target_vocab_size = 30000;
  std::size_t target_min_count = 1;
  int year_min = 1000;
  int year_max = 2100;
  unsigned threads = 1;
};

void write_split(const std::string& path, const CorpusBuild& build) {
  {
    auto out = open_output(path);
    for (const auto& e : build.examples) write_example_jsonl(out, e);
  }
  auto report = open_output(sibling(path, ".report.json"));
  report << corpus_report_json(build) << '\n';
  for (const auto& [reason, n] : build.exclusion_counts()) spdlog::info("excluded reason={} count={}", reason, n);
}

void run_build_corpus(const BuildCorpusOptions& o) {
  const bool split = o.valid_fraction > 0.0 || o.test_fraction > 0.0;
  if (o.valid_fraction < 0.0 || o.test_fraction < 0.0 || o.valid_fraction + o.test_fraction >= 1.0)
    throw UsageError("split fractions must be non-negative and sum to less than 1");
  const std::string lexicon_path = sibling(o.out, ".lexicon.tsv");
  std::vector<std::string> outputs{o.out, sibling(o.out, ".report.json"), lexicon_path};
  if (split) {
    outputs.push_back(sibling(o.out, ".valid.jsonl"));
    outputs.push_back(sibling(o.out, ".test.jsonl"));
  }
  check_outputs({o.triples, o.summaries, o.types, o.genders}, outputs);

  PipelineConfig cfg;
  cfg.mode = summary_mode_from_string(o.mode);
  cfg.years = {o.year_min, o.year_max};
  cfg.max_sentences = o.max_sentences;
  cfg.target_vocab_size = o.target_vocab_size;
  cfg.target_min_count = o.target_min_count;
  cfg.threads = o.threads;

  std::vector<Triple> triples;
  {
    auto in = open_input(o.triples);
    triples = read_triples(in, cfg.years);
  }
  std::vector<AnnotatedSummary> summaries;
  {
    auto in = open_input(o.summaries);
    summaries = read_summaries_jsonl(in);
  }
  InstanceTypeMap types;
  if (!o.types.empty()) {
    auto in = open_input(o.types);
    types = InstanceTypeMap::read_tsv(in);
  }
  std::unique_ptr<EntityLexicon> genders;
  if (!o.genders.empty()) {
    auto in = open_input(o.genders);
    genders = std::make_unique<EntityLexicon>(EntityLexicon::read_tsv(in));
  }

  auto articles = assemble_articles(triples, std::move(summaries));
  spdlog::info("build-corpus articles={} triples={} mode={}", articles.size(), triples.size(), o.mode);

  ArticleSplit parts;
  if (split)
    parts = split_articles(articles, o.valid_fraction, o.test_fraction, o.seed);
  else
    parts.train = std::move(articles);

  const CorpusBuild train = build_corpus(parts.train, types, genders.get(), cfg);
  write_split(o.out, train);
  {
    auto lex = open_output(lexicon_path);
    train.lexicon.write_tsv(lex);
  }
  spdlog::info("corpus examples={} bounds=[{}, {}] trimmed={} out={}", train.examples.size(),
               train.stats.lower_bound(), train.stats.upper_bound(), train.trimmed, o.out);
  if (!split) return;

  // Held-out splits reuse the training statistics and in-vocabulary set.
  PipelineConfig held = cfg;
  held.fixed_stats = train.stats;
  held.fixed_in_vocab = train.in_vocab;
  for (const auto& [articles_of, suffix] : {std::pair{&parts.valid, ".valid.jsonl"}, std::pair{&parts.test, ".test.jsonl"}}) {
    const CorpusBuild b = build_corpus(*articles_of, types, genders.get(), held);
    write_split(sibling(o.out, suffix), b);
    spdlog::info("corpus examples={} out={}", b.examples.size(), sibling(o.out, suffix));
  }
}

struct BuildVocabOptions {
  std::string corpus;
  std::string source_out, target_out;
  std::size_t source_min_count = 20;
  std::size_t target_size = 30000;
  std::size_t target_min_count = 1;
};

void run_build_vocab(const BuildVocabOptions& o) {
  check_outputs({o.corpus}, {o.source_out, o.target_out});
  const auto corpus = load_corpus(o.corpus);
  const Vocabulary source = build_source_vocab(corpus, o.source_min_count);
  const Vocabulary target = build_target_vocab(corpus, o.target_size, o.target_min_count);
  {
    auto out = open_output(o.source_out);
    source.save(out);
  }
  auto out = open_output(o.target_out);
  target.save(out);
  spdlog::info("build-vocab source={} target={}", source.size(), target.size());
}

}  // namespace

void add_corpus_commands(CLI::App& root, std::vector<Command>& out) {
  {
    auto o = std::make_shared<DemoOptions>();
    auto* sub = root.add_subcommand("demo-corpus", "Write a synthetic biography corpus for offline runs");
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->add_option("--size", o->size, "Number of articles (>= 10)")->capture_default_str();
    sub->add_option("--seed", o->seed, "Random seed")->capture_default_str();
    out.push_back({sub, [o] { run_demo(*o); }});
  }
  {
    auto o = std::make_shared<BuildCorpusOptions>();
    auto* sub = root.add_subcommand("build-corpus", "Align triples with summaries into a training corpus");
    sub->add_option("--triples", o->triples, "N-Triples file")->required()->check(CLI::ExistingFile);
    sub->add_option("--summaries", o->summaries, "Annotated summaries (JSON Lines)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--types", o->types, "entity<TAB>instance type")->check(CLI::ExistingFile);
    sub->add_option("--genders", o->genders, "entity<TAB>gender")->check(CLI::ExistingFile);
    sub->add_option("--out", o->out,
                    "Corpus file; also writes <stem>.report.json, <stem>.lexicon.tsv and, when splitting, "
                    "<stem>.valid.jsonl and <stem>.test.jsonl")
        ->required();
    sub->add_option("--mode", o->mode, "Target representation")
        ->check(CLI::IsMember({"uri", "tuples"}))
        ->capture_default_str();
    sub->add_option("--valid-fraction", o->valid_fraction, "Share of articles held out for validation")
        ->capture_default_str();
    sub->add_option("--test-fraction", o->test_fraction, "Share of articles held out for testing")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed")->capture_default_str();
    sub->add_option("--max-sentences", o->max_sentences, "Sentences kept per summary")->capture_default_str();
    sub->add_option("--target-vocab-size", o->target_vocab_size, "Words and entities kept verbatim")
        ->capture_default_str();
    sub->add_option("--target-min-count", o->target_min_count, "Minimum count to stay verbatim")
        ->capture_default_str();
    sub->add_option("--year-min", o->year_min, "Smallest number read as a year")->capture_default_str();
    sub->add_option("--year-max", o->year_max, "Largest number read as a year")->capture_default_str();
    sub->add_option("--threads", o->threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    out.push_back({sub, [o] { run_build_corpus(*o); }});
  }
  {
    auto o = std::make_shared<BuildVocabOptions>();
    auto* sub = root.add_subcommand("build-vocab", "Build source and target vocabularies from a corpus");
    sub->add_option("--corpus", o->corpus, "Training corpus (JSON Lines)")->required()->check(CLI::ExistingFile);
    sub->add_option("--source-out", o->source_out, "Source vocabulary file")->required();
    sub->add_option("--target-out", o->target_out, "Target vocabulary file")->required();
    sub->add_option("--source-min-count", o->source_min_count, "Rarer entities fall back to their type")
        ->capture_default_str();
    sub->add_option("--target-size", o->target_size, "Target tokens kept, 0 for all")->capture_default_str();
    sub->add_option("--target-min-count", o->target_min_count, "Minimum target token count")->capture_default_str();
    out.push_back({sub, [o] { run_build_vocab(*o); }});
  }
}

}  // namespace triplesum::cli
