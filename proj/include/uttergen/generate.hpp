#pragma once

// Paraphrase generators and the ensemble that merges them into one
// candidate pool.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "uttergen/backends.hpp"
#include "uttergen/core.hpp"
#include "uttergen/lexicon.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

inline constexpr std::string_view kSourceLanguage = "en";

struct Lexicons {
  std::shared_ptr<const ClosedClassLexicon> closed_class;
  std::shared_ptr<const SynonymLexicon> synonyms;  // may be null: WORDNET yields nothing
  std::shared_ptr<const PpdbTable> ppdb;           // may be null: PPDB yields nothing
};

/// Output of one generator. `failure` is set when the generator could not
/// run (a backend error); `candidates` then holds whatever was produced
/// before the error.
struct GeneratorOutput {
  std::vector<Candidate> candidates;
  std::optional<std::string> failure;
  bool unavailable = false;  // failure was a BackendUnavailable
  std::size_t partial_failures = 0;  // e.g. phrases skipped by NP/VP
};

namespace detail {

/// Accumulates candidates for one technique: drops the source itself and
/// exact (folded) repeats.
class CandidateSink {
 public:
  CandidateSink(const SourceSentence& source, Technique technique)
      : source_(source), technique_(technique), source_key_(fold(source.text)) {}

  void add(std::string text, std::optional<Provenance> provenance = std::nullopt) {
    auto key = fold(text);
    if (key.empty() || key == source_key_ || !seen_.insert(key).second) return;
    out_.push_back({std::move(text), source_, technique_, std::move(provenance)});
  }

  std::vector<Candidate> take() { return std::move(out_); }

 private:
  const SourceSentence& source_;
  Technique technique_;
  std::string source_key_;
  std::unordered_set<std::string> seen_;
  std::vector<Candidate> out_;
};

/// Pivot round trip: `forward_beam` translations out, `backward_beam` back
/// for each, flattened in (forward, backward) order.
inline std::vector<std::string> round_trip(const std::string& text, const Translator& translator,
                                           const GenerationConfig& cfg) {
  auto forward = translator.translate_one(text, kSourceLanguage, cfg.pivot_language,
                                          cfg.forward_beam);
  if (forward.size() > cfg.forward_beam) forward.resize(cfg.forward_beam);
  std::vector<std::string> out;
  if (forward.empty()) return out;
  auto backward = translator.translate(forward, cfg.pivot_language, kSourceLanguage,
                                       cfg.backward_beam);
  for (auto& list : backward) {
    for (std::size_t j = 0; j < list.size() && j < cfg.backward_beam; ++j)
      out.push_back(std::move(list[j]));
  }
  return out;
}

inline std::string splice(const std::string& text, const std::vector<TokenSpan>& spans,
                          std::size_t start, std::size_t end, std::string_view replacement) {
  auto begin_byte = spans[start].begin;
  auto end_byte = spans[end - 1].end;
  return text.substr(0, begin_byte) + std::string(replacement) + text.substr(end_byte);
}

}  // namespace detail

/// Full-sentence backtranslation through the pivot language.
inline GeneratorOutput backtranslate_full(const SourceSentence& sentence,
                                          const Translator& translator,
                                          const GenerationConfig& cfg) {
  GeneratorOutput result;
  detail::CandidateSink sink(sentence, Technique::kBt);
  try {
    for (auto& text : detail::round_trip(sentence.text, translator, cfg)) sink.add(std::move(text));
  } catch (const BackendUnavailable& e) {
    result.failure = e.what();
    result.unavailable = true;
    return result;
  } catch (const BackendError& e) {
    result.failure = e.what();
    return result;
  }
  result.candidates = sink.take();
  return result;
}

/// Backtranslates each NP/VP found by the chunker and splices every variant
/// back into the sentence in place of the phrase.
inline GeneratorOutput backtranslate_phrases(const SourceSentence& sentence,
                                             const Chunker& chunker,
                                             const Translator& translator,
                                             const GenerationConfig& cfg) {
  GeneratorOutput result;
  detail::CandidateSink sink(sentence, Technique::kNpVpBt);
  auto spans = tokenize_spans(sentence.text);
  std::vector<std::string> tokens;
  for (const auto& s : spans) tokens.push_back(s.text);

  std::vector<PhraseSpan> phrases;
  try {
    phrases = chunker.phrases(sentence.text, tokens);
  } catch (const BackendError& e) {
    result.failure = e.what();
    result.unavailable = dynamic_cast<const BackendUnavailable*>(&e) != nullptr;
    return result;
  }

  std::size_t attempted = 0;
  bool any_unavailable = false;
  std::string last_error;
  for (const auto& phrase : phrases) {
    if (!(phrase.start < phrase.end && phrase.end <= spans.size())) continue;
    ++attempted;
    const auto begin_byte = spans[phrase.start].begin;
    const auto phrase_text =
        sentence.text.substr(begin_byte, spans[phrase.end - 1].end - begin_byte);
    const auto phrase_key = fold(phrase_text);
    std::vector<std::string> variants;
    try {
      variants = detail::round_trip(phrase_text, translator, cfg);
    } catch (const BackendError& e) {
      ++result.partial_failures;
      any_unavailable |= dynamic_cast<const BackendUnavailable*>(&e) != nullptr;
      last_error = e.what();
      continue;
    }
    for (const auto& v : variants) {
      if (fold(v) == phrase_key) continue;
      sink.add(detail::splice(sentence.text, spans, phrase.start, phrase.end, v),
               Provenance{phrase.start, phrase.end, v});
    }
  }
  if (attempted > 0 && result.partial_failures == attempted) {
    result.failure = last_error;
    result.unavailable = any_unavailable;
  }
  result.candidates = sink.take();
  return result;
}

/// Single-word synonym substitutions. Only content words are replaced;
/// candidates come out in (token position, synonym) order.
inline GeneratorOutput wordnet_paraphrases(const SourceSentence& sentence,
                                           const SynonymLexicon& synonyms,
                                           const ClosedClassLexicon& lex) {
  GeneratorOutput result;
  detail::CandidateSink sink(sentence, Technique::kWordnet);
  auto spans = tokenize_spans(sentence.text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!lex.is_content_word(spans[i].text)) continue;
    for (const auto& syn : synonyms.synonyms(spans[i].text))
      sink.add(detail::splice(sentence.text, spans, i, i + 1, syn), Provenance{i, i + 1, syn});
  }
  result.candidates = sink.take();
  return result;
}

/// Maximum paraphrases used per PPDB match.
inline constexpr std::size_t kPpdbPerMatchCap = 3;

/// PPDB phrase substitutions: for each leftmost-longest match, the top three
/// paraphrases by score, each replacing only that span.
inline GeneratorOutput ppdb_paraphrases(const SourceSentence& sentence, const PpdbTable& table) {
  GeneratorOutput result;
  detail::CandidateSink sink(sentence, Technique::kPpdb);
  auto spans = tokenize_spans(sentence.text);
  std::vector<std::string> tokens;
  for (const auto& s : spans) tokens.push_back(s.text);

  std::size_t used = 0;
  std::size_t current_start = static_cast<std::size_t>(-1);
  for (const auto& m : match_phrases(tokens, table)) {
    if (m.start != current_start) {
      current_start = m.start;
      used = 0;
    }
    if (used++ >= kPpdbPerMatchCap) continue;
    auto replacement = join(m.paraphrase);
    sink.add(detail::splice(sentence.text, spans, m.start, m.end, replacement),
             Provenance{m.start, m.end, replacement});
  }
  result.candidates = sink.take();
  return result;
}

struct TechniqueStats {
  std::size_t candidates = 0;  // before cross-technique dedup
  bool failed = false;
  bool unavailable = false;  // failed because a backend was unreachable
  std::string error;
};

struct Pool {
  std::vector<Candidate> candidates;
  std::map<Technique, TechniqueStats> techniques;
  std::size_t pre_dedup_size = 0;
};

/// Runs every enabled generator in the order BT, NP_VP_BT, WORDNET, PPDB and
/// merges their output, keeping the first occurrence of each folded text.
/// Throws BackendError only if every enabled generator failed.
inline Pool generate_pool(const SourceSentence& sentence, const BackendSuite& backends,
                          const Lexicons& lexicons, const GenerationConfig& cfg) {
  Pool pool;
  std::size_t enabled = 0, failed = 0;
  bool any_unavailable = false;
  std::string errors;
  std::unordered_set<std::string> seen;
  const auto source_key = fold(sentence.text);

  for (auto technique : kGeneratorOrder) {
    if (!cfg.enabled(technique)) continue;
    ++enabled;
    GeneratorOutput out;
    switch (technique) {
      case Technique::kBt:
        out = backtranslate_full(sentence, *backends.translator, cfg);
        break;
      case Technique::kNpVpBt:
        out = backtranslate_phrases(sentence, *backends.chunker, *backends.translator, cfg);
        break;
      case Technique::kWordnet:
        if (lexicons.synonyms && lexicons.closed_class)
          out = wordnet_paraphrases(sentence, *lexicons.synonyms, *lexicons.closed_class);
        break;
      case Technique::kPpdb:
        if (lexicons.ppdb) out = ppdb_paraphrases(sentence, *lexicons.ppdb);
        break;
      case Technique::kExternal:
        break;
    }
    if (out.candidates.size() > cfg.max_variants_per_technique)
      out.candidates.resize(cfg.max_variants_per_technique);

    auto& stats = pool.techniques[technique];
    stats.candidates = out.candidates.size();
    if (out.failure) {
      stats.failed = true;
      stats.error = *out.failure;
      stats.unavailable = out.unavailable;
      ++failed;
      any_unavailable |= out.unavailable;
      errors += std::string(errors.empty() ? "" : "; ") + std::string(to_string(technique)) +
                ": " + *out.failure;
    }
    pool.pre_dedup_size += out.candidates.size();
    for (auto& c : out.candidates) {
      auto key = fold(c.text);
      if (key == source_key || !seen.insert(key).second) continue;
      pool.candidates.push_back(std::move(c));
    }
  }

  if (enabled > 0 && failed == enabled) {
    if (any_unavailable) throw BackendUnavailable("all generators failed: " + errors);
    throw BackendError("all generators failed: " + errors);
  }
  return pool;
}

}  // namespace uttergen
