#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <map>
#include <memory>

#include "cli/commands.hpp"
#include "cli/config_file.hpp"
#include "json.hpp"
#include "triplesum/baselines.hpp"
#include "triplesum/checkpoint.hpp"
#include "triplesum/error.hpp"
#include "triplesum/metrics.hpp"
#include "triplesum/text.hpp"
#include "triplesum/training.hpp"

namespace triplesum::cli {

namespace {

using nlohmann::json;

void write_report(const std::string& path, const std::string& body) {
  if (path.empty()) return;
  auto out = open_output(path);
  out << body << '\n';
}

struct EvaluateOptions {
  std::string generated, reference;
  std::string checkpoint, source_vocab, target_vocab;
  std::string out, curve;
  double beta = 1.2;
  unsigned threads = 1;
};

// Rank-0 final text per id, re-tokenized the way references are.
std::map<std::string, Tokens> read_generations(const std::string& path) {
  std::map<std::string, Tokens> out;
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("rank", std::size_t{0}) != 0) continue;
      const auto id = j.at("id").get<std::string>();
      if (!out.emplace(id, text::tokenize(j.at("final_text").get<std::string>())).second)
        throw DataError("duplicate rank-0 output for " + id);
    } catch (const json::exception& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void run_evaluate(const EvaluateOptions& o) {
  check_outputs({o.generated, o.reference, o.checkpoint, o.source_vocab, o.target_vocab}, {o.out, o.curve});
  const bool with_model = !o.checkpoint.empty();
  if (with_model && (o.source_vocab.empty() || o.target_vocab.empty()))
    throw UsageError("--checkpoint needs --source-vocab and --target-vocab");

  const auto references = load_corpus(o.reference);
  const auto generations = read_generations(o.generated);
  std::vector<Tokens> cand, ref;
  std::vector<std::size_t> counts;
  for (const auto& e : references) {
    auto it = generations.find(e.id);
    if (it == generations.end()) throw DataError("no generated summary for " + e.id);
    cand.push_back(it->second);
    ref.push_back(e.reference);
    counts.push_back(e.triples.size());
  }
  MetricReport report = score_corpus(cand, ref, counts, o.beta, o.threads);

  if (with_model) {
    const Vocabulary source = load_vocabulary(o.source_vocab, VocabSide::source);
    const Vocabulary target = load_vocabulary(o.target_vocab, VocabSide::target);
    const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint, {&source, &target, std::nullopt});
    std::vector<EncodedExample> data;
    for (const auto& e : references) data.push_back(encode_example(e, source, target));
    report.perplexity = perplexity(*ckpt.model, data);
  }
  write_report(o.out, report_json(report));
  write_report(o.curve, curve_csv(report.curve));
  std::cout << report_table(report);
}

struct BaselineOptions {
  std::string kind = "kn";
  std::string train, eval, lexicon;
  std::string source_vocab, target_vocab;
  std::string out;
  std::size_t samples = 10;
  std::size_t order = 5;
  std::size_t beam = 10;
  std::size_t max_length = 60;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

json bleu_json(const std::array<double, 4>& b) { return json::array({b[0], b[1], b[2], b[3]}); }

void run_baseline(const BaselineOptions& o) {
  check_outputs({o.train, o.eval, o.lexicon, o.source_vocab, o.target_vocab}, {o.out});
  const auto train = load_corpus(o.train);
  const auto eval = load_corpus(o.eval);
  const SurfaceLexicon lexicon = load_lexicon(o.lexicon);

  json j;
  if (o.kind == "random") {
    const SampledReport r = random_baseline(train, eval, lexicon, o.samples, o.seed, o.threads);
    j = {{"kind", "random"},
         {"samples", r.samples},
         {"bleu_mean", bleu_json(r.bleu_mean)},
         {"bleu_std", bleu_json(r.bleu_std)},
         {"rouge_l_mean", r.rouge_mean},
         {"rouge_l_std", r.rouge_std}};
    std::cout << fmt::format("random baseline over {} draws: BLEU-4 {:.2f} +- {:.2f}, ROUGE-L {:.2f} +- {:.2f}\n",
                             r.samples, r.bleu_mean[3], r.bleu_std[3], r.rouge_mean, r.rouge_std);
    if (!o.source_vocab.empty() && !o.target_vocab.empty()) {
      const Vocabulary source = load_vocabulary(o.source_vocab, VocabSide::source);
      const Vocabulary target = load_vocabulary(o.target_vocab, VocabSide::target);
      std::vector<EncodedExample> tr, ev;
      for (const auto& e : train) tr.push_back(encode_example(e, source, target));
      for (const auto& e : eval) ev.push_back(encode_example(e, source, target));
      j["perplexity_proxy"] = unigram_perplexity(tr, ev, target.size());
      std::cout << fmt::format("implied perplexity proxy {:.4f}\n", j["perplexity_proxy"].get<double>());
    }
  } else {
    BeamConfig beam;
    beam.beam_width = o.beam;
    beam.max_length = o.max_length;
    const KnBaselineResult r = kn_baseline(train, eval, lexicon, o.order, beam, o.threads);
    j = json::parse(report_json(r.report));
    j["kind"] = "kn";
    j["order"] = o.order;
    j["output"] = r.tokens;
    std::cout << report_table(r.report);
  }
  write_report(o.out, j.dump(2));
  spdlog::info("baseline kind={} train={} eval={}", o.kind, train.size(), eval.size());
}

}  // namespace

void add_eval_commands(CLI::App& root, std::vector<Command>& out) {
  {
    auto o = std::make_shared<EvaluateOptions>();
    auto* sub = root.add_subcommand("evaluate", "Score generated summaries against references");
    sub->add_option("--generated", o->generated, "Output of generate")->required()->check(CLI::ExistingFile);
    sub->add_option("--reference", o->reference, "Corpus holding the references")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--checkpoint", o->checkpoint, "Also report the model's perplexity on the references")
        ->check(CLI::ExistingFile);
    sub->add_option("--source-vocab", o->source_vocab, "Source vocabulary, with --checkpoint")
        ->check(CLI::ExistingFile);
    sub->add_option("--target-vocab", o->target_vocab, "Target vocabulary, with --checkpoint")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "JSON report");
    sub->add_option("--curve", o->curve, "BLEU-4 by triple count (CSV)");
    sub->add_option("--beta", o->beta, "ROUGE-L recall weight")->capture_default_str();
    sub->add_option("--threads", o->threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    out.push_back({sub, [o] { run_evaluate(*o); }});
  }
  {
    auto o = std::make_shared<BaselineOptions>();
    auto* sub = root.add_subcommand("baseline", "Random-retrieval or Kneser-Ney baseline");
    sub->add_option("--kind", o->kind, "random or kn")->check(CLI::IsMember({"random", "kn"}))->capture_default_str();
    sub->add_option("--train", o->train, "Training corpus")->required()->check(CLI::ExistingFile);
    sub->add_option("--eval", o->eval, "Evaluation corpus")->required()->check(CLI::ExistingFile);
    sub->add_option("--lexicon", o->lexicon, "Surface lexicon")->required()->check(CLI::ExistingFile);
    sub->add_option("--source-vocab", o->source_vocab, "With --target-vocab, adds the random perplexity proxy")
        ->check(CLI::ExistingFile);
    sub->add_option("--target-vocab", o->target_vocab, "Target vocabulary")->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "JSON report");
    sub->add_option("--samples", o->samples, "Random draws")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--order", o->order, "n-gram order")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--beam", o->beam, "Beam width")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-length", o->max_length, "Generated tokens, <end> included")->capture_default_str();
    sub->add_option("--seed", o->seed, "Sampling seed")->capture_default_str();
    sub->add_option("--threads", o->threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    out.push_back({sub, [o] { run_baseline(*o); }});
  }
}

}  // namespace triplesum::cli
