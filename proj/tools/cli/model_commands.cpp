#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <memory>

#include "cli/commands.hpp"
#include "cli/config_file.hpp"
#include "json.hpp"
#include "triplesum/checkpoint.hpp"
#include "triplesum/error.hpp"
#include "triplesum/generation.hpp"
#include "triplesum/gradcheck.hpp"
#include "triplesum/neighbors.hpp"
#include "triplesum/training.hpp"
#include "triplesum/triple.hpp"

namespace triplesum::cli {

namespace {

using nlohmann::json;

struct TrainOptions {
  std::string corpus, valid, stats;
  std::string source_vocab, target_vocab;
  std::string out, best_out, log;
  std::string cell = "gru";
  std::size_t m = 64;
  std::size_t layers = 1;
  bool sigmoid_candidate = false;
  bool no_batch_norm = false;
  std::size_t norm_steps = 64;
  double init_range = 0.001;
  bool keep_final = false;
  TrainConfig train;
};

std::vector<EncodedExample> encode_all(std::span<const AlignedExample> corpus, const Vocabulary& source,
                                       const Vocabulary& target, std::size_t max_timestep) {
  std::vector<EncodedExample> out;
  out.reserve(corpus.size());
  for (const auto& e : corpus) out.push_back(encode_example(e, source, target, max_timestep));
  return out;
}

CorpusStats resolve_stats(const std::string& explicit_path, const std::string& corpus_path,
                          std::span<const AlignedExample> corpus) {
  std::string path = explicit_path;
  if (path.empty() && std::filesystem::exists(sibling(corpus_path, ".report.json")))
    path = sibling(corpus_path, ".report.json");
  if (!path.empty()) {
    auto in = open_input(path);
    return read_stats_json(in);
  }
  spdlog::warn("no corpus report next to {}; bounds recomputed from its triple counts", corpus_path);
  std::vector<std::size_t> counts;
  for (const auto& e : corpus) counts.push_back(e.triples.size());
  return stats_from_counts(counts);
}

void run_train(const TrainOptions& o) {
  check_outputs({o.corpus, o.valid, o.stats, o.source_vocab, o.target_vocab}, {o.out, o.best_out, o.log});
  const auto corpus = load_corpus(o.corpus);
  if (corpus.empty()) throw DataError(o.corpus + " holds no examples");
  const auto valid_corpus = o.valid.empty() ? std::vector<AlignedExample>{} : load_corpus(o.valid);
  const Vocabulary source = load_vocabulary(o.source_vocab, VocabSide::source);
  const Vocabulary target = load_vocabulary(o.target_vocab, VocabSide::target);
  const CorpusStats stats = resolve_stats(o.stats, o.corpus, corpus);

  const auto train_data = encode_all(corpus, source, target, o.train.max_timestep);
  const auto valid_data = encode_all(valid_corpus, source, target, 0);

  ModelConfig mc;
  mc.cell = cell_kind_from_string(o.cell);
  mc.m = o.m;
  mc.layers = o.layers;
  mc.e_max = stats.upper_bound();
  mc.source_size = source.size();
  mc.target_size = target.size();
  mc.sigmoid_candidate = o.sigmoid_candidate;
  mc.batch_norm = !o.no_batch_norm;
  mc.norm_steps = o.norm_steps;
  Triples2Seq model(mc);
  model.initialize(o.train.seed, -o.init_range, o.init_range);

  CheckpointMeta meta;
  meta.model = mc;
  meta.stats = stats;
  meta.mode = corpus.front().mode;
  meta.source_hash = source.content_hash();
  meta.target_hash = target.content_hash();

  std::ofstream log_file;
  if (!o.log.empty()) log_file = open_output(o.log);
  TrainHooks hooks;
  hooks.log = o.log.empty() ? nullptr : &log_file;
  if (!o.best_out.empty()) {
    hooks.on_best = [&](Triples2Seq& m, const EpochRecord& rec) {
      CheckpointMeta best = meta;
      best.epoch = rec.epoch;
      best.validation_perplexity = rec.validation_perplexity;
      save_checkpoint(o.best_out, m, best);
    };
  }

  TrainConfig cfg = o.train;
  cfg.restore_best = !o.keep_final;
  spdlog::info("train cell={} m={} |N|={} |X|={} e_max={} examples={} valid={}", o.cell, mc.m, mc.source_size,
               mc.target_size, mc.e_max, train_data.size(), valid_data.size());
  const TrainResult result = train(model, train_data, valid_data, cfg, hooks);

  meta.epoch = result.epochs.empty() ? 0 : result.epochs.back().epoch;
  if (!valid_data.empty()) {
    meta.validation_perplexity = perplexity(model, valid_data);
    if (cfg.restore_best && !result.epochs.empty()) meta.epoch = result.best_epoch;
  }
  save_checkpoint(o.out, model, meta);

  json summary = {{"epochs", result.epochs.size()},
                  {"updates", result.updates},
                  {"early_stopped", result.early_stopped},
                  {"checkpoint_epoch", meta.epoch},
                  {"validation_perplexity", meta.validation_perplexity},
                  {"train_perplexity", perplexity(model, train_data)}};
  if (!valid_data.empty()) {
    summary["best_epoch"] = result.best_epoch;
    summary["best_validation_perplexity"] = result.best_perplexity;
  }
  std::cout << summary.dump() << '\n';
  spdlog::info("train done checkpoint={} validation_perplexity={:.4f}", o.out, meta.validation_perplexity);
}

struct GenerateOptions {
  std::string checkpoint, source_vocab, target_vocab, lexicon;
  std::string input;
  std::string triples, main_entity, types, item_surface, id;
  std::string out;
  std::size_t beam = 10;
  std::size_t max_length = 60;
  std::size_t n_best = 1;
};

void run_generate(const GenerateOptions& o) {
  check_outputs({o.checkpoint, o.source_vocab, o.target_vocab, o.lexicon, o.input, o.triples, o.types}, {o.out});
  if (o.input.empty() == o.triples.empty()) throw UsageError("give exactly one of --input and --triples");
  if (!o.triples.empty() && o.main_entity.empty()) throw UsageError("--triples needs --main");
  if (o.n_best == 0 || o.n_best > o.beam) throw UsageError("--n-best must lie in [1, beam]");

  const Vocabulary source = load_vocabulary(o.source_vocab, VocabSide::source);
  const Vocabulary target = load_vocabulary(o.target_vocab, VocabSide::target);
  const SurfaceLexicon lexicon = load_lexicon(o.lexicon);
  const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint, {&source, &target, std::nullopt});

  std::vector<GenerationInput> inputs;
  if (!o.input.empty()) {
    for (auto& e : load_corpus(o.input)) inputs.push_back({e.id, std::move(e.triples), e.item_surface});
  } else {
    auto in = open_input(o.triples);
    const auto raw = read_triples(in);
    InstanceTypeMap types;
    if (!o.types.empty()) {
      auto tin = open_input(o.types);
      types = InstanceTypeMap::read_tsv(tin);
    }
    const std::string main = compact_iri(o.main_entity);
    const std::string surface = o.item_surface.empty() ? lexicon.resolve(main) : o.item_surface;
    inputs.push_back({o.id.empty() ? main : o.id, prepare_input_triples(raw, main, types), surface});
  }

  BeamConfig beam;
  beam.beam_width = o.beam;
  beam.max_length = o.max_length;

  std::ofstream file;
  if (!o.out.empty()) file = open_output(o.out);
  std::ostream& out = o.out.empty() ? std::cout : file;
  std::size_t capped = 0;
  for (const auto& input : inputs) {
    const auto results = generate(*ckpt.model, source, target, ckpt.meta.stats, input, lexicon, beam);
    for (std::size_t r = 0; r < std::min(o.n_best, results.size()); ++r) {
      const auto& g = results[r];
      if (g.length_capped) ++capped;
      out << json{{"id", input.id},
                  {"rank", g.rank},
                  {"log_prob", g.log_prob},
                  {"tokens", g.tokens},
                  {"final_text", g.text}}
                 .dump()
          << '\n';
    }
  }
  spdlog::info("generate inputs={} beam={} length_capped={}", inputs.size(), o.beam, capped);
}

struct NeighborOptions {
  std::string checkpoint, source_vocab;
  std::vector<std::string> queries;
  std::size_t k = 10;
};

void run_neighbors(const NeighborOptions& o) {
  const Vocabulary source = load_vocabulary(o.source_vocab, VocabSide::source);
  const LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint, {&source, nullptr, std::nullopt});
  for (const auto& q : o.queries) {
    const auto list = nearest_neighbors(ckpt.model->encoder.embedding.value, source, compact_iri(q), o.k);
    for (std::size_t r = 0; r < list.size(); ++r)
      std::cout << fmt::format("{}\t{}\t{}\t{:.6f}\n", compact_iri(q), r + 1, list[r].token, list[r].cosine);
  }
}

struct GradcheckOptions {
  std::string cell = "gru";
  double tolerance = 1e-4;
  GradcheckConfig cfg;
};

void run_gradcheck(const GradcheckOptions& o) {
  GradcheckConfig cfg = o.cfg;
  cfg.cell = cell_kind_from_string(o.cell);
  const GradcheckResult r = gradient_check(cfg);
  std::cout << json{{"cell", o.cell},
                    {"max_relative_error", r.max_relative_error},
                    {"worst_parameter", r.worst_parameter},
                    {"worst_index", r.worst_index},
                    {"analytic", r.analytic},
                    {"numeric", r.numeric},
                    {"checked", r.checked}}
                   .dump()
            << '\n';
  if (!(r.max_relative_error < o.tolerance))
    throw NumericError(fmt::format("max relative gradient error {:.3e} at {}[{}] exceeds {:.1e}",
                                   r.max_relative_error, r.worst_parameter, r.worst_index, o.tolerance));
  spdlog::info("gradcheck max_relative_error={:.3e} entries={}", r.max_relative_error, r.checked);
}

void add_model_options(CLI::App* sub, TrainOptions& o) {
  sub->add_option("--cell", o.cell, "Decoder cell")->check(CLI::IsMember({"gru", "lstm"}))->capture_default_str();
  sub->add_option("--m", o.m, "Hidden width")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--layers", o.layers, "Decoder layers")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_flag("--sigmoid-candidate", o.sigmoid_candidate, "Sigmoid on the LSTM cell candidate");
  sub->add_flag("--no-batch-norm", o.no_batch_norm, "Disable batch normalization");
  sub->add_option("--norm-steps", o.norm_steps, "Decoder steps with their own normalization statistics")
      ->capture_default_str();
  sub->add_option("--init-range", o.init_range, "Weights start uniform in [-r, r)")->capture_default_str();
}

void add_schedule_options(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--batch-size", t.batch_size, "Examples per update")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--max-timestep", t.max_timestep, "Target truncation, 0 keeps full summaries")->capture_default_str();
  sub->add_option("--lr", t.initial_lr, "Initial learning rate")->capture_default_str();
  sub->add_option("--decay-factor", t.decay_factor, "Learning-rate decay factor")->capture_default_str();
  sub->add_option("--decay-start", t.decay_start_epoch, "Epoch of the first decay")->capture_default_str();
  sub->add_option("--decay-period", t.decay_period, "Epochs between decays")->capture_default_str();
  sub->add_option("--epochs", t.epochs, "Maximum epochs")->capture_default_str();
  sub->add_option("--patience", t.patience, "Epochs without validation gain before stopping, 0 never stops")
      ->capture_default_str();
  sub->add_option("--clip", t.clip_norm, "Gradient norm cap, <= 0 disables")->capture_default_str();
  sub->add_option("--freeze-norm-epoch", t.freeze_norm_epoch,
                  "Epoch from which batch norm trains on running statistics, 0 never")
      ->capture_default_str();
  sub->add_option("--l2", t.rmsprop.l2, "L2 penalty")->capture_default_str();
  sub->add_option("--rho", t.rmsprop.rho, "RMSProp decay")->capture_default_str();
  sub->add_option("--seed", t.seed, "Initialization and shuffling seed")->capture_default_str();
}

}  // namespace

void add_model_commands(CLI::App& root, std::vector<Command>& out) {
  {
    auto o = std::make_shared<TrainOptions>();
    auto* sub = root.add_subcommand("train", "Train an encoder-decoder model");
    sub->add_option("--corpus", o->corpus, "Training corpus")->required()->check(CLI::ExistingFile);
    sub->add_option("--valid", o->valid, "Validation corpus")->check(CLI::ExistingFile);
    sub->add_option("--stats", o->stats, "Corpus report with the triple-count statistics "
                                         "(default <corpus stem>.report.json)")
        ->check(CLI::ExistingFile);
    sub->add_option("--source-vocab", o->source_vocab, "Source vocabulary")->required()->check(CLI::ExistingFile);
    sub->add_option("--target-vocab", o->target_vocab, "Target vocabulary")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "Checkpoint written at the end")->required();
    sub->add_option("--best-out", o->best_out, "Checkpoint rewritten whenever validation improves");
    sub->add_option("--log", o->log, "Training log (JSON Lines)");
    sub->add_flag("--keep-final", o->keep_final, "Keep the last state instead of the best by validation");
    add_model_options(sub, *o);
    add_schedule_options(sub, o->train);
    out.push_back({sub, [o] { run_train(*o); }});
  }
  {
    auto o = std::make_shared<GenerateOptions>();
    auto* sub = root.add_subcommand("generate", "Generate summaries with beam search");
    sub->add_option("--checkpoint", o->checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--source-vocab", o->source_vocab, "Source vocabulary")->required()->check(CLI::ExistingFile);
    sub->add_option("--target-vocab", o->target_vocab, "Target vocabulary")->required()->check(CLI::ExistingFile);
    sub->add_option("--lexicon", o->lexicon, "Surface lexicon")->required()->check(CLI::ExistingFile);
    sub->add_option("--input", o->input, "Corpus whose triple sets are summarized")->check(CLI::ExistingFile);
    sub->add_option("--triples", o->triples, "Raw N-Triples for one main entity")->check(CLI::ExistingFile);
    sub->add_option("--main", o->main_entity, "Main entity of --triples");
    sub->add_option("--types", o->types, "entity<TAB>instance type, for --triples")->check(CLI::ExistingFile);
    sub->add_option("--item-surface", o->item_surface, "Surface of the main entity, for --triples");
    sub->add_option("--id", o->id, "Output id for --triples");
    sub->add_option("--out", o->out, "Output file (JSON Lines), default standard output");
    sub->add_option("--beam", o->beam, "Beam width")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-length", o->max_length, "Generated tokens, <end> included")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--n-best", o->n_best, "Hypotheses written per input")->capture_default_str();
    out.push_back({sub, [o] { run_generate(*o); }});
  }
  {
    auto o = std::make_shared<NeighborOptions>();
    auto* sub = root.add_subcommand("neighbors", "Nearest entities in the source embedding");
    sub->add_option("--checkpoint", o->checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--source-vocab", o->source_vocab, "Source vocabulary")->required()->check(CLI::ExistingFile);
    sub->add_option("--query", o->queries, "Entity or type token (repeatable)")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--k", o->k, "Neighbors per query")->capture_default_str();
    out.push_back({sub, [o] { run_neighbors(*o); }});
  }
  {
    auto o = std::make_shared<GradcheckOptions>();
    auto* sub = root.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    sub->add_option("--cell", o->cell, "Decoder cell")->check(CLI::IsMember({"gru", "lstm"}))->capture_default_str();
    sub->add_option("--m", o->cfg.m, "Hidden width")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--layers", o->cfg.layers, "Decoder layers")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--source-size", o->cfg.source_size, "|N|")->capture_default_str();
    sub->add_option("--target-size", o->cfg.target_size, "|X|")->capture_default_str();
    sub->add_option("--e-max", o->cfg.e_max, "Triples per input")->capture_default_str();
    sub->add_option("--batch", o->cfg.batch, "Batch size")->capture_default_str();
    sub->add_option("--max-length", o->cfg.max_length, "Target length")->capture_default_str();
    sub->add_flag("--sigmoid-candidate", o->cfg.sigmoid_candidate, "Sigmoid on the LSTM cell candidate");
    sub->add_option("--seed", o->cfg.seed, "Model and data seed")->capture_default_str();
    sub->add_option("--tolerance", o->tolerance, "Largest accepted relative error")->capture_default_str();
    out.push_back({sub, [o] { run_gradcheck(*o); }});
  }
}

}  // namespace triplesum::cli
