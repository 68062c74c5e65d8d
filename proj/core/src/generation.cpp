#include "triplesum/generation.hpp"

#include <map>

#include "triplesum/error.hpp"
#include "triplesum/text.hpp"

namespace triplesum {

ModelScorer::ModelScorer(const Triples2Seq& model, std::span<const EncodedTriple> triples)
    : model_(model), triples_(triples.begin(), triples.end()) {}

ModelScorer::State ModelScorer::initial() {
  nn::Tape tape(false);
  const std::vector<std::vector<EncodedTriple>> batch{triples_};
  DecoderVars vars = model_.decoder.initial(tape, model_.encoder.forward(tape, batch, false));
  State s;
  for (nn::Var h : vars.h) s.h.push_back(tape.value(h).row(0));
  for (nn::Var c : vars.c) s.c.push_back(tape.value(c).row(0));
  return s;
}

std::pair<std::vector<ModelScorer::State>, nn::Matrix> ModelScorer::advance(std::span<const State> states,
                                                                           std::span<const int> tokens) {
  const auto n = static_cast<Eigen::Index>(states.size());
  const std::size_t layers = model_.config().layers;
  const auto m = static_cast<Eigen::Index>(model_.config().m);
  nn::Tape tape(false);
  DecoderVars prev;
  for (std::size_t l = 0; l < layers; ++l) {
    nn::Matrix h(n, m);
    for (Eigen::Index i = 0; i < n; ++i) h.row(i) = states[static_cast<std::size_t>(i)].h[l];
    prev.h.push_back(tape.constant(std::move(h)));
    if (!states.empty() && !states[0].c.empty()) {
      nn::Matrix c(n, m);
      for (Eigen::Index i = 0; i < n; ++i) c.row(i) = states[static_cast<std::size_t>(i)].c[l];
      prev.c.push_back(tape.constant(std::move(c)));
    }
  }
  const std::size_t t = states.empty() ? 0 : states[0].step;
  DecoderVars next = model_.decoder.step(tape, prev, tokens, false, t);
  nn::Matrix logp = nn::log_softmax_rows(tape.value(model_.decoder.logits(tape, next.h.back())), kPadIndex);
  std::vector<State> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out[i].step = t + 1;
    for (nn::Var h : next.h) out[i].h.push_back(tape.value(h).row(static_cast<Eigen::Index>(i)));
    for (nn::Var c : next.c) out[i].c.push_back(tape.value(c).row(static_cast<Eigen::Index>(i)));
  }
  return {std::move(out), std::move(logp)};
}

namespace {

void append_surface(std::vector<std::string>& out, std::string_view surface) {
  for (auto& w : text::tokenize(surface)) out.push_back(std::move(w));
}

std::string entity_surface(const PostprocessContext& ctx, std::string_view uri) {
  if (uri == kItemToken) return ctx.item_surface;
  if (ctx.lexicon) return ctx.lexicon->resolve(uri);
  return text::surface_from_uri(uri);
}

}  // namespace

std::vector<std::string> postprocess_tokens(std::span<const std::string> tokens, const PostprocessContext& ctx) {
  std::vector<std::string> out;
  std::map<std::string, std::size_t> uses;
  for (const auto& tok : tokens) {
    if (tok == kStartToken || tok == kEndToken || tok == kPadToken) continue;
    if (tok == kItemToken) {
      append_surface(out, ctx.item_surface);
      continue;
    }
    switch (classify_target_token(tok)) {
      case TokenKind::placeholder: {
        const Placeholder p = *parse_placeholder(tok);
        std::vector<const std::string*> matches;
        for (const auto& t : ctx.triples) {
          if (t.predicate != p.predicate) continue;
          if (p.role == PlaceholderRole::subject && t.subject != kItemToken)
            matches.push_back(&t.subject);
          else if (p.role == PlaceholderRole::object && t.object_kind == ObjectKind::entity && t.object != kItemToken)
            matches.push_back(&t.object);
        }
        if (matches.empty()) {
          out.push_back(p.type);
        } else {
          const std::size_t k = uses[tok]++ % matches.size();
          append_surface(out, entity_surface(ctx, *matches[k]));
        }
        break;
      }
      case TokenKind::surface_tuple:
        append_surface(out, parse_tuple_token(tok)->second);
        break;
      case TokenKind::entity_uri:
        if (ctx.lexicon && ctx.lexicon->find(tok))
          append_surface(out, *ctx.lexicon->find(tok));
        else
          out.push_back(tok);
        break;
      default:
        out.push_back(tok);
    }
  }
  return out;
}

std::string postprocess(std::span<const std::string> tokens, const PostprocessContext& ctx) {
  return text::detokenize(postprocess_tokens(tokens, ctx));
}

std::vector<Triple> prepare_input_triples(std::span<const Triple> raw, std::string_view main,
                                          const InstanceTypeMap& types, const YearRange& years) {
  std::vector<Triple> triples;
  for (auto& t : filter_triples(raw)) {
    if (t.object_kind == ObjectKind::date) {
      for (auto& e : encode_date_triple(t)) triples.push_back(std::move(e));
    } else {
      triples.push_back(std::move(t));
    }
  }
  normalize_triples(triples, years);
  triples = dedup_triples(substitute_item(triples, main));
  attach_instance_types(triples, types);
  return triples;
}

std::vector<GeneratedSummary> generate(const Triples2Seq& model, const Vocabulary& source, const Vocabulary& target,
                                       const CorpusStats& bounds, const GenerationInput& input,
                                       const SurfaceLexicon& lexicon, const BeamConfig& beam) {
  const std::size_t n = input.triples.size();
  if (n == 0) throw DataError("input " + input.id + " has an empty triple set");
  if (n < bounds.lower_bound() || n > bounds.upper_bound())
    throw DataError("input " + input.id + " has " + std::to_string(n) +
                    " triples, outside the triple-count bound [floor(E_min + 0.25 sigma), floor(mean + 1.5 sigma)] = [" +
                    std::to_string(bounds.lower_bound()) + ", " + std::to_string(bounds.upper_bound()) + "]");
  const auto encoded = encode_triples(source, input.triples);
  if (encoded.size() > model.config().e_max)
    throw DataError("input " + input.id + " encodes to " + std::to_string(encoded.size()) +
                    " triples, more than E_max = " + std::to_string(model.config().e_max));
  ModelScorer scorer(model, encoded);
  const auto hyps = beam_search(scorer, beam);
  const PostprocessContext ctx{input.triples, &lexicon, input.item_surface};
  std::vector<GeneratedSummary> out;
  for (std::size_t r = 0; r < hyps.size(); ++r) {
    GeneratedSummary g;
    g.rank = r;
    g.log_prob = hyps[r].log_prob;
    g.length_capped = hyps[r].length_capped;
    for (int id : hyps[r].tokens)
      if (id != beam.end_token) g.tokens.push_back(target.decode(id));
    g.words = postprocess_tokens(g.tokens, ctx);
    g.text = text::detokenize(g.words);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace triplesum
