// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. `--quick` skips the desk-scale training runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "triplesum/baselines.hpp"
#include "triplesum/beam_search.hpp"
#include "triplesum/demo_corpus.hpp"
#include "triplesum/generation.hpp"
#include "triplesum/gradcheck.hpp"
#include "triplesum/kneser_ney.hpp"
#include "triplesum/metrics.hpp"
#include "triplesum/text.hpp"
#include "triplesum/training.hpp"

using namespace triplesum;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

int failures = 0;

void report(const std::string& name, const Verdict& v) {
  std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  failures += !v.pass;
}

// ---------------------------------------------------------------------------

Verdict gradient_fidelity() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  for (CellKind cell : {CellKind::lstm, CellKind::gru}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      GradcheckConfig g;
      g.cell = cell;
      g.m = 8;
      g.target_size = 20;
      g.source_size = 16;
      g.e_max = 3;
      g.batch = 4;
      g.seed = seed;
      const GradcheckResult r = gradient_check(g);
      worst = std::max(worst, r.max_relative_error);
      checked += r.checked;
      v.require(r.max_relative_error < 1e-4, std::string(to_string(cell)) + " seed " + std::to_string(seed) +
                                                 " error " + fmt(r.max_relative_error) + " at " + r.worst_parameter);
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "runtime " + fmt(secs) + " s");
  v.note("max relative error " + fmt(worst, 3) + " over " + std::to_string(checked) + " entries, both cells, " +
         fmt(secs, 3) + " s");
  return v;
}

std::vector<std::string> texts(const std::vector<SummaryToken>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

Verdict rule_exactness() {
  Verdict v;
  const Triple agassi{"dbr:Andre_Agassi", "dbo:birthDate", "1970-04-29", ObjectKind::date, {}};
  const auto pair = encode_date_triple(agassi);
  v.require(pair.size() == 2 && pair[0].subject == "dbr:Andre_Agassi" && pair[0].predicate == "dbo:birthDateMonth" &&
                pair[0].object == "4" && pair[1].predicate == "dbo:birthDateYear" && pair[1].object == "<year>",
            "date encoding");

  InstanceTypeMap types;
  types.insert("dbr:The_Adventures_of_Roderick_Random", "dbo:Book");
  types.insert("dbr:Morpeth,_Northumberland", "dbo:Settlement");
  const std::unordered_set<std::string> vocab{"He", "wrote", "was", "born", "in", "."};
  AnnotatedSummary s;
  s.main_entity = "<item>";
  s.sentences = {{"He", "wrote", "Roderick", "Random", "."}};
  s.annotations = {{0, 2, 4, "dbr:The_Adventures_of_Roderick_Random", "Roderick Random"}};
  std::vector<Triple> t{fixtures::entity_triple("dbr:The_Adventures_of_Roderick_Random", "dbo:author", "<item>")};
  auto out = assign_placeholders(s, t, types, vocab);
  v.require(out.size() > 3 && out[3].text == "dbo:author__subj__dbo:Book", "subject placeholder");
  s.sentences = {{"He", "was", "born", "in", "Morpeth", "."}};
  s.annotations = {{0, 4, 5, "dbr:Morpeth,_Northumberland", "Morpeth"}};
  t = {fixtures::entity_triple("<item>", "dbo:birthPlace", "dbr:Morpeth,_Northumberland")};
  out = assign_placeholders(s, t, types, vocab);
  v.require(out.size() > 5 && out[5].text == "dbo:birthPlace__obj__dbo:Settlement", "object placeholder");

  const auto pr = fixtures::papa_roach();
  PipelineConfig cfg;
  cfg.fixed_in_vocab = pr.in_vocab;
  auto build = build_corpus(std::vector<Article>{pr.article}, pr.types, nullptr, cfg);
  v.require(build.examples.size() == 1 && texts(build.examples[0].summary) == pr.uri_tokens, "Papa Roach URI mode");
  cfg.mode = SummaryMode::surface_form_tuple;
  build = build_corpus(std::vector<Article>{pr.article}, pr.types, nullptr, cfg);
  v.require(build.examples.size() == 1 && texts(build.examples[0].summary) == pr.tuple_tokens,
            "Papa Roach tuple mode");
  if (v.pass)
    v.note("Agassi date pair, both placeholders and the " + std::to_string(pr.uri_tokens.size()) +
           "-token Papa Roach sequences in URI and tuple mode match");
  return v;
}

Verdict beam_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::size_t models = 24;
  std::size_t sequences = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= models; ++seed) {
    ModelConfig c;
    c.cell = seed % 2 ? CellKind::gru : CellKind::lstm;
    c.m = 2 + seed % 4;
    c.layers = 1 + seed % 3 / 2;
    c.e_max = 2;
    c.source_size = 10;
    c.target_size = 6;
    Triples2Seq model(c);
    model.initialize(seed, -1.0, 1.0);
    const std::vector<EncodedTriple> triples{{static_cast<int>(seed % 10), 2, 3}, {4, 5, static_cast<int>(seed % 7)}};
    ModelScorer scorer(model, triples);
    BeamConfig cfg;
    cfg.max_length = 4;
    cfg.beam_width = 6 * 6 * 6 * 6;
    const auto hyps = beam_search(scorer, cfg);
    const auto all = fixtures::enumerate_sequences(scorer, cfg);
    if (hyps.size() != all.size()) {
      v.require(false, "model " + std::to_string(seed) + " ranking length");
      continue;
    }
    bool same_order = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
      same_order = same_order && hyps[i].tokens == all[i].first;
      worst = std::max(worst, std::abs(hyps[i].log_prob - all[i].second));
    }
    v.require(same_order, "model " + std::to_string(seed) + " ranking order");
    sequences += all.size();
  }
  const double secs = seconds_since(t0);
  v.require(worst < 1e-9, "log-prob gap " + fmt(worst));
  v.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  v.note(std::to_string(models) + " models, |X| = 6, T_max = 4, " + std::to_string(sequences) +
         " ranked sequences, max log-prob gap " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s");
  return v;
}

Tokens words(const std::string& s) { return text::split_whitespace(s); }

Verdict metric_oracles() {
  Verdict v;
  const BleuStats s = bleu_stats(words("the the the the"), words("the cat sat"));
  v.require(s.matches[0] == 1 && s.totals[0] == 4, "clipped unigram counts");
  v.require(std::abs(bleu(s, 1) - 25.0) < 1e-12, "BLEU-1 of the clipped case");

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 12), tok(0, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tokens> cand(10), ref(10);
    for (auto* side : {&cand, &ref})
      for (auto& sent : *side) {
        const int k = len(rng);
        for (int i = 0; i < k; ++i) sent.push_back("w" + std::to_string(tok(rng)));
      }
    for (int n = 1; n <= 4; ++n) worst = std::max(worst, std::abs(bleu(cand, ref, n) - fixtures::reference_bleu(cand, ref, n)));
  }
  v.require(worst < 1e-12, "BLEU against the n-gram oracle, gap " + fmt(worst));

  const double b2 = 1.2 * 1.2;
  const double want = 100.0 * (1 + b2) * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + b2 * 0.5);
  const std::vector<Tokens> c1{words("a b c d")}, r1{words("a c e")};
  v.require(std::abs(rouge_l(c1, r1).score - want) < 1e-12, "ROUGE-L hand case");
  const std::vector<Tokens> c2{words("x y")}, r2{words("x q y r")};
  v.require(std::abs(rouge_l(c2, r2, 1.0).score - 200.0 / 3.0) < 1e-12, "ROUGE-L beta 1 hand case");

  const std::vector<Tokens> same{words("Ronnie Barker was an English actor ."), words("he was born in Bedford")};
  bool hundred = rouge_l(same, same).score == 100.0;
  for (int n = 1; n <= 4; ++n) hundred = hundred && bleu(same, same, n) == 100.0;
  v.require(hundred, "identical pairs score 100");

  // A model whose output layer is zero predicts uniformly over the unmasked
  // vocabulary (everything but <pad>).
  ModelConfig c;
  c.m = 8;
  c.e_max = 2;
  c.source_size = 12;
  c.target_size = 40;
  Triples2Seq model(c);
  model.initialize(3, -0.5, 0.5);
  model.decoder.output.value.setZero();
  model.decoder.output_bias.value.setZero();
  std::vector<EncodedExample> data;
  std::uniform_int_distribution<int> word(9, 39);
  for (int i = 0; i < 12; ++i) {
    EncodedExample e{{{1 + i % 11, 2, 3}}, {kStartIndex}};
    for (int k = 0; k < 3 + i % 5; ++k) e.tokens.push_back(word(rng));
    e.tokens.push_back(kEndIndex);
    data.push_back(e);
  }
  const double ppl = perplexity(model, data);
  v.require(std::abs(ppl / 39.0 - 1.0) < 1e-9, "uniform perplexity " + fmt(ppl, 12));
  if (v.pass)
    v.note("clipped BLEU and ROUGE-L hand cases exact, random BLEU gap " + fmt(worst, 3) +
           ", identical = 100, uniform perplexity " + fmt(ppl, 12) + " for 39 unmasked ids");
  return v;
}

Verdict kn_checks() {
  Verdict v;
  const std::vector<std::vector<std::string>> corpus{{"a", "b", "a"}, {"b", "a", "c"}};
  const KneserNey lm(corpus, 2);
  struct Row {
    std::vector<std::string> history;
    std::array<double, 4> p;  // <end>, a, b, c
  };
  // Hand-derived from the counts; see the unit test for the arithmetic.
  const std::vector<Row> table{
      {{}, {2.0 / 7, 2.0 / 7, 2.0 / 7, 1.0 / 7}},
      {{"<start>"}, {12.0 / 56, 19.0 / 56, 19.0 / 56, 6.0 / 56}},
      {{"a"}, {25.0 / 84, 18.0 / 84, 25.0 / 84, 16.0 / 84}},
      {{"b"}, {6.0 / 56, 41.0 / 56, 6.0 / 56, 3.0 / 56}},
      {{"c"}, {13.0 / 28, 6.0 / 28, 6.0 / 28, 3.0 / 28}},
  };
  const std::array<std::string, 4> names{"<end>", "a", "b", "c"};
  double worst_table = 0.0;
  for (const auto& row : table)
    for (std::size_t w = 0; w < 4; ++w)
      worst_table = std::max(worst_table, std::abs(lm.probability(row.history, names[w]) - row.p[w]));
  v.require(worst_table < 1e-9, "bigram table gap " + fmt(worst_table));

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 12), tok(0, 8);
  std::vector<std::vector<std::string>> sents(80);
  for (auto& s : sents) {
    const int k = len(rng);
    for (int i = 0; i < k; ++i) s.push_back("w" + std::to_string(tok(rng)));
  }
  double worst_sum = 0.0;
  std::size_t tested = 0;
  for (std::size_t order = 1; order <= 5; ++order) {
    const KneserNey big(sents, order);
    std::uniform_int_distribution<int> id(0, static_cast<int>(big.vocab_size()) - 1);
    for (const auto& s : sents) {
      // Every prefix of a training sentence, plus a random history.
      std::vector<int> h{big.start_id()};
      for (const auto& w : s) {
        const auto p = big.distribution(h);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
        ++tested;
        h.push_back(big.id(w));
      }
      std::vector<int> r;
      for (int i = 0; i < 4; ++i) r.push_back(id(rng));
      const auto p = big.distribution(r);
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
      ++tested;
    }
  }
  v.require(worst_sum < 1e-9, "normalization gap " + fmt(worst_sum));
  v.note(std::to_string(tested) + " distributions at orders 1-5 sum to 1 within " + fmt(worst_sum, 3) +
         "; bigram hand table within " + fmt(worst_table, 3));
  return v;
}

Verdict schedule_check() {
  Verdict v;
  // Default schedule, tiny model: only the logged learning rates matter.
  std::vector<EncodedExample> data;
  for (int i = 0; i < 20; ++i) data.push_back({{{1 + i % 5, 2, 3}}, {kStartIndex, 9 + i % 3, kEndIndex}});
  ModelConfig c;
  c.m = 4;
  c.e_max = 1;
  c.source_size = 8;
  c.target_size = 12;
  Triples2Seq model(c);
  model.initialize(1);
  TrainConfig cfg;
  cfg.epochs = 9;
  cfg.batch_size = 5;
  std::ostringstream log;
  train(model, data, {}, cfg, {&log, {}});

  std::istringstream lines(log.str());
  std::string line;
  std::size_t checked = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("event") != "epoch_start") continue;
    const auto e = j.at("epoch").get<long>();
    const double lr = j.at("lr").get<double>();
    if (e < 3) {
      v.require(lr == 0.002, "epoch " + std::to_string(e) + " lr " + fmt(lr, 17));
      continue;
    }
    const double want = 0.002 * std::pow(0.8, 2.0 * static_cast<double>(e - 3));
    v.require(lr == want, "epoch " + std::to_string(e) + " lr " + fmt(lr, 17) + " != " + fmt(want, 17));
    ++checked;
  }
  v.require(checked == 6, "epoch boundaries 3..8 logged");
  v.note("logged lr equals 0.002*0.8^(2(e-3)) bit for bit at " + std::to_string(checked) + " epoch boundaries");
  return v;
}

// ---------------------------------------------------------------------------
// Desk scale

struct DeskResult {
  double train_bleu4 = 0.0;
  double test_bleu4 = 0.0;
  double valid_perplexity = 0.0;
  double proxy_perplexity = 0.0;
  std::size_t target_size = 0;
  double kn_bleu4 = 0.0;
  double random_bleu4 = 0.0;
  double seconds = 0.0;
  std::size_t epochs = 0;
};

struct DeskData {
  std::vector<AlignedExample> train, valid, test;
  SurfaceLexicon lexicon;
  CorpusStats stats;
};

DeskData desk_data(std::uint64_t seed) {
  const DemoCorpus demo = make_demo_corpus(seed, 200);
  InstanceTypeMap types;
  for (const auto& [uri, type] : demo.types) types.insert(uri, type);
  EntityLexicon genders;
  for (const auto& [uri, g] : demo.genders) genders.insert(uri, g);
  const auto articles = assemble_articles(demo.triples, demo.summaries);
  const ArticleSplit parts = split_articles(articles, 0.1, 0.25, seed);
  PipelineConfig cfg;
  cfg.target_min_count = 2;
  const CorpusBuild train = build_corpus(parts.train, types, &genders, cfg);
  PipelineConfig held = cfg;
  held.fixed_stats = train.stats;
  held.fixed_in_vocab = train.in_vocab;
  DeskData d;
  d.train = train.examples;
  d.valid = build_corpus(parts.valid, types, &genders, held).examples;
  d.test = build_corpus(parts.test, types, &genders, held).examples;
  d.lexicon = train.lexicon;
  d.stats = train.stats;
  return d;
}

double model_bleu4(const Triples2Seq& model, const Vocabulary& source, const Vocabulary& target,
                   const DeskData& d, const std::vector<AlignedExample>& eval) {
  BeamConfig beam;
  beam.beam_width = 10;
  beam.max_length = 60;
  std::vector<Tokens> cand, ref;
  for (const auto& e : eval) {
    const GenerationInput input{e.id, e.triples, e.item_surface};
    const auto out = generate(model, source, target, d.stats, input, d.lexicon, beam);
    cand.push_back(text::tokenize(out.front().text));
    ref.push_back(e.reference);
  }
  return bleu(cand, ref, 4);
}

DeskResult desk_run(std::uint64_t seed, CellKind cell, bool baselines) {
  const auto t0 = Clock::now();
  const DeskData d = desk_data(seed);
  const Vocabulary source = build_source_vocab(d.train, 2);
  const Vocabulary target = build_target_vocab(d.train, 0, 1);
  std::vector<EncodedExample> tr, va;
  for (const auto& e : d.train) tr.push_back(encode_example(e, source, target));
  for (const auto& e : d.valid) va.push_back(encode_example(e, source, target));

  ModelConfig mc;
  mc.cell = cell;
  mc.m = 64;
  mc.e_max = d.stats.upper_bound();
  mc.source_size = source.size();
  mc.target_size = target.size();
  Triples2Seq model(mc);
  model.initialize(seed);

  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 300;
  cfg.initial_lr = 0.002;
  cfg.decay_factor = 0.8;
  cfg.decay_start_epoch = 150;
  cfg.decay_period = 25;
  cfg.freeze_norm_epoch = 150;
  cfg.patience = 0;
  cfg.restore_best = false;
  cfg.seed = seed;
  const TrainResult r = train(model, tr, va, cfg);

  DeskResult out;
  out.epochs = r.epochs.size();
  out.valid_perplexity = perplexity(model, va);
  out.proxy_perplexity = unigram_perplexity(tr, va, target.size());
  out.target_size = target.size();
  out.train_bleu4 = model_bleu4(model, source, target, d, d.train);
  if (baselines) {
    out.test_bleu4 = model_bleu4(model, source, target, d, d.test);
    BeamConfig beam;
    beam.beam_width = 10;
    beam.max_length = 60;
    out.kn_bleu4 = kn_baseline(d.train, d.test, d.lexicon, 5, beam).report.bleu[3];
    out.random_bleu4 = random_baseline(d.train, d.test, d.lexicon, 10, seed).bleu_mean[3];
  }
  out.seconds = seconds_since(t0);
  return out;
}

Verdict desk_end_to_end(const DeskResult& gru, const DeskResult& lstm) {
  Verdict v;
  for (const auto& [name, r] : {std::pair<const char*, const DeskResult*>{"GRU", &gru}, {"LSTM", &lstm}}) {
    v.require(r->train_bleu4 >= 90.0, std::string(name) + " training BLEU-4 " + fmt(r->train_bleu4));
    v.require(r->valid_perplexity < r->proxy_perplexity,
              std::string(name) + " validation perplexity " + fmt(r->valid_perplexity) + " >= proxy " +
                  fmt(r->proxy_perplexity));
    v.require(r->valid_perplexity < static_cast<double>(r->target_size),
              std::string(name) + " validation perplexity not below |X|");
    v.note(std::string(name) + " train BLEU-4 " + fmt(r->train_bleu4) + ", valid ppl " + fmt(r->valid_perplexity) +
           " (proxy " + fmt(r->proxy_perplexity) + ", |X| " + std::to_string(r->target_size) + "), " +
           std::to_string(r->epochs) + " epochs in " + fmt(r->seconds, 3) + " s");
  }
  const double total = gru.seconds + lstm.seconds;
  v.require(total < 900.0, "runtime " + fmt(total) + " s");
  return v;
}

Verdict baseline_ordering(const std::vector<DeskResult>& runs) {
  Verdict v;
  double model = 0.0, kn = 0.0, rnd = 0.0;
  for (const auto& r : runs) {
    model += r.test_bleu4;
    kn += r.kn_bleu4;
    rnd += r.random_bleu4;
  }
  const double n = static_cast<double>(runs.size());
  model /= n;
  kn /= n;
  rnd /= n;
  v.require(model - kn > 2.0, "model - KN gap " + fmt(model - kn));
  v.require(kn - rnd > 2.0, "KN - random gap " + fmt(kn - rnd));
  std::ostringstream per;
  for (std::size_t i = 0; i < runs.size(); ++i)
    per << (i ? ", " : "") << "seed " << i + 1 << " " << fmt(runs[i].test_bleu4) << "/" << fmt(runs[i].kn_bleu4)
        << "/" << fmt(runs[i].random_bleu4);
  v.note("test BLEU-4 model " + fmt(model) + " > KN " + fmt(kn) + " > random " + fmt(rnd) + " (" + per.str() + ")");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  report("gradient-fidelity", gradient_fidelity());
  report("rule-exactness", rule_exactness());
  report("beam-oracle-equivalence", beam_oracle());
  report("metric-oracles", metric_oracles());
  report("kn-normalization", kn_checks());
  report("schedule-check", schedule_check());
  if (!quick) {
    std::vector<DeskResult> gru;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) gru.push_back(desk_run(seed, CellKind::gru, true));
    const DeskResult lstm = desk_run(1, CellKind::lstm, false);
    report("desk-end-to-end", desk_end_to_end(gru.front(), lstm));
    report("baseline-ordering", baseline_ordering(gru));
  }
  return failures ? 1 : 0;
}
