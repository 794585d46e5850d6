#pragma once

// Candidate selection: relevance filtering, embedding-based deduplication,
// word-novelty deduplication and the tie-break score that orders equals.
//
// All similarity and novelty checks run on lowercased text; emitted
// candidates keep their original casing.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "uttergen/backends.hpp"
#include "uttergen/core.hpp"
#include "uttergen/generate.hpp"
#include "uttergen/lexicon.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

namespace detail {

inline std::vector<std::string> lowered(const std::vector<std::string>& texts) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(to_lower(t));
  return out;
}

/// Similarity of each candidate to the input, from one encoder batch.
inline std::vector<double> input_similarities(const std::vector<Candidate>& pool,
                                              const SourceSentence& input,
                                              const Encoder& encoder) {
  std::vector<std::string> texts{input.text};
  for (const auto& c : pool) texts.push_back(c.text);
  auto embeddings = encoder.embed(lowered(texts));
  if (embeddings.size() != texts.size())
    throw BackendError("encoder returned " + std::to_string(embeddings.size()) +
                       " embeddings for " + std::to_string(texts.size()) + " texts");
  std::vector<double> sims;
  sims.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    sims.push_back(cosine(embeddings[i + 1], embeddings[0]));
  return sims;
}

inline double min_max(double x, double lo, double hi) {
  return hi == lo ? 0.5 : (x - lo) / (hi - lo);
}

}  // namespace detail

/// Keeps candidates whose encoder similarity to the input lies in
/// [low_threshold, dup_threshold]. Input order is preserved.
inline std::vector<ScoredCandidate> filter_encoder(const std::vector<Candidate>& pool,
                                                   const SourceSentence& input,
                                                   const Encoder& encoder,
                                                   const SelectionConfig& cfg) {
  std::vector<ScoredCandidate> out;
  if (pool.empty()) return out;
  auto sims = detail::input_similarities(pool, input, encoder);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (sims[i] >= cfg.low_threshold && sims[i] <= cfg.dup_threshold)
      out.push_back({pool[i], sims[i], 0.0, 0.0});
  }
  return out;
}

/// Keeps candidates the detector accepts (probability >= detector_threshold)
/// that are not near-copies of the input (encoder similarity <=
/// dup_threshold).
inline std::vector<ScoredCandidate> filter_detector(const std::vector<Candidate>& pool,
                                                    const SourceSentence& input,
                                                    const Detector& detector,
                                                    const Encoder& encoder,
                                                    const SelectionConfig& cfg) {
  std::vector<ScoredCandidate> out;
  if (pool.empty()) return out;
  auto sims = detail::input_similarities(pool, input, encoder);
  std::vector<TextPair> pairs;
  pairs.reserve(pool.size());
  const auto input_lower = to_lower(input.text);
  for (const auto& c : pool) pairs.emplace_back(input_lower, to_lower(c.text));
  auto probs = detector.probabilities(pairs);
  if (probs.size() != pool.size())
    throw BackendError("detector returned " + std::to_string(probs.size()) +
                       " probabilities for " + std::to_string(pool.size()) + " pairs");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (probs[i] >= cfg.detector_threshold && sims[i] <= cfg.dup_threshold)
      out.push_back({pool[i], sims[i], 0.0, 0.0});
  }
  return out;
}

/// Fills fluency_loss and tiebreak for an already-annotated pool.
///
/// tiebreak = (norm(similarity) + 1 - norm(loss)) / 2, where norm is min-max
/// over the pool and a constant component normalizes to 0.5.
inline std::vector<ScoredCandidate> tiebreak_scores(std::vector<ScoredCandidate> pool,
                                                    const FluencyScorer& fluency) {
  if (pool.empty()) throw ContractViolation("tiebreak_scores: pool must be non-empty");
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& c : pool) texts.push_back(c.text());
  auto losses = fluency.losses(texts);
  if (losses.size() != pool.size())
    throw BackendError("fluency scorer returned " + std::to_string(losses.size()) +
                       " losses for " + std::to_string(pool.size()) + " texts");
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].fluency_loss = losses[i];

  auto [smin, smax] = std::minmax_element(pool.begin(), pool.end(), [](auto& a, auto& b) {
    return a.encoder_similarity < b.encoder_similarity;
  });
  auto [fmin, fmax] = std::minmax_element(
      pool.begin(), pool.end(), [](auto& a, auto& b) { return a.fluency_loss < b.fluency_loss; });
  const double s_lo = smin->encoder_similarity, s_hi = smax->encoder_similarity;
  const double f_lo = fmin->fluency_loss, f_hi = fmax->fluency_loss;
  for (auto& c : pool) {
    double norm_s = detail::min_max(c.encoder_similarity, s_lo, s_hi);
    double norm_f = 1.0 - detail::min_max(c.fluency_loss, f_lo, f_hi);
    c.tiebreak = (norm_s + norm_f) / 2.0;
  }
  return pool;
}

/// Convenience overload: computes encoder similarities first.
inline std::vector<ScoredCandidate> tiebreak_scores(const std::vector<Candidate>& pool,
                                                    const SourceSentence& input,
                                                    const Encoder& encoder,
                                                    const FluencyScorer& fluency) {
  if (pool.empty()) throw ContractViolation("tiebreak_scores: pool must be non-empty");
  auto sims = detail::input_similarities(pool, input, encoder);
  std::vector<ScoredCandidate> scored;
  for (std::size_t i = 0; i < pool.size(); ++i) scored.push_back({pool[i], sims[i], 0.0, 0.0});
  return tiebreak_scores(std::move(scored), fluency);
}

/// Greedy embedding deduplication.
///
/// Visits candidates by similarity to the input (desc), then tiebreak
/// (desc), then folded text (asc). A candidate is kept iff its similarity
/// to the input is below dup_threshold and its cosine to every kept
/// candidate is at most dup_threshold. Output is in selection order.
inline std::vector<ScoredCandidate> dedup_embedding(std::vector<ScoredCandidate> pool,
                                                    const SourceSentence& /*input*/,
                                                    const Encoder& encoder,
                                                    const SelectionConfig& cfg) {
  std::vector<ScoredCandidate> out;
  if (pool.empty()) return out;

  std::vector<std::string> keys;
  for (const auto& c : pool) keys.push_back(fold(c.text()));
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = pool[a];
    const auto& y = pool[b];
    if (x.encoder_similarity != y.encoder_similarity)
      return x.encoder_similarity > y.encoder_similarity;
    if (x.tiebreak != y.tiebreak) return x.tiebreak > y.tiebreak;
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return a < b;
  });

  std::vector<std::string> texts;
  for (auto i : order) texts.push_back(to_lower(pool[i].text()));
  auto embeddings = encoder.embed(texts);
  if (embeddings.size() != texts.size())
    throw BackendError("encoder returned a short batch during deduplication");

  std::vector<std::size_t> kept;  // positions in `order`
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (!(pool[order[pos]].encoder_similarity < cfg.dup_threshold)) continue;
    bool duplicate = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return cosine(embeddings[pos], embeddings[k]) > cfg.dup_threshold;
    });
    if (duplicate) continue;
    kept.push_back(pos);
    out.push_back(pool[order[pos]]);
  }
  return out;
}

/// Greedy word-novelty deduplication.
///
/// Starting from the input's content words, repeatedly picks the candidate
/// contributing the most unseen content words (ties: higher tiebreak, then
/// folded text ascending), adds its words to the seen set, and stops at k
/// picks, an empty pool, or (unless allow_zero_novelty) when no candidate
/// adds anything.
inline std::vector<ScoredCandidate> dedup_words(std::vector<ScoredCandidate> pool,
                                                const SourceSentence& input,
                                                const ClosedClassLexicon& lex,
                                                const SelectionConfig& cfg) {
  std::vector<ScoredCandidate> out;
  auto wordset = content_words(tokenize(input.text), lex);

  struct Entry {
    ScoredCandidate candidate;
    std::set<std::string> words;
    std::string key;
  };
  std::vector<Entry> remaining;
  remaining.reserve(pool.size());
  for (auto& c : pool) {
    auto tokens = tokenize(c.text());
    remaining.push_back({std::move(c), content_words(tokens, lex), join(tokens)});
  }

  while (out.size() < cfg.k && !remaining.empty()) {
    std::size_t best = 0;
    std::size_t best_novelty = 0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      std::size_t novelty = 0;
      for (const auto& w : remaining[i].words) novelty += wordset.count(w) == 0;
      if (i == 0) {
        best_novelty = novelty;
        continue;
      }
      const auto& a = remaining[i];
      const auto& b = remaining[best];
      bool better = novelty != best_novelty ? novelty > best_novelty
                    : a.candidate.tiebreak != b.candidate.tiebreak
                        ? a.candidate.tiebreak > b.candidate.tiebreak
                        : a.key < b.key;
      if (better) {
        best = i;
        best_novelty = novelty;
      }
    }
    if (best_novelty == 0 && !cfg.allow_zero_novelty) break;
    for (const auto& w : remaining[best].words) wordset.insert(w);
    out.push_back(std::move(remaining[best].candidate));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

struct SelectionStats {
  std::size_t pool = 0;
  std::size_t filtered = 0;
  std::size_t after_embedding_dedup = 0;
  std::size_t selected = 0;
};

/// filter -> tiebreak_scores -> dedup_embedding -> dedup_words -> first k.
inline std::vector<ScoredCandidate> select_candidates(const std::vector<Candidate>& pool,
                                                      const SourceSentence& input,
                                                      const BackendSuite& backends,
                                                      const Lexicons& lexicons,
                                                      const SelectionConfig& cfg,
                                                      SelectionStats* stats = nullptr) {
  SelectionStats local;
  local.pool = pool.size();
  std::vector<ScoredCandidate> result;
  if (!pool.empty()) {
    auto filtered = cfg.filter_mode == FilterMode::kEncoder
                        ? filter_encoder(pool, input, *backends.encoder, cfg)
                        : filter_detector(pool, input, *backends.detector, *backends.encoder, cfg);
    local.filtered = filtered.size();
    if (!filtered.empty()) {
      auto scored = tiebreak_scores(std::move(filtered), *backends.fluency);
      auto deduped = dedup_embedding(std::move(scored), input, *backends.encoder, cfg);
      local.after_embedding_dedup = deduped.size();
      result = dedup_words(std::move(deduped), input, *lexicons.closed_class, cfg);
      if (result.size() > cfg.k) result.resize(cfg.k);
    }
  }
  local.selected = result.size();
  if (stats) *stats = local;
  return result;
}

}  // namespace uttergen
