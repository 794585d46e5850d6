#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "uttergen/backends.hpp"
#include "uttergen/core.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

/// Descriptions with at most this many sentences are kept whole.
inline constexpr std::size_t kSummaryBypassSentences = 3;

/// Picks the important sentences of a description.
///
/// Short descriptions (<= 3 sentences) are returned in full. Longer ones are
/// scored by cosine similarity to the centroid of all sentence embeddings;
/// the top `m` (earlier position wins ties) are returned in document order.
inline std::vector<SourceSentence> select_sentences(const std::string& article_id,
                                                    const std::string& description,
                                                    std::size_t m, const Encoder& encoder) {
  if (m == 0) throw ContractViolation("select_sentences: m must be >= 1");
  auto sentences = split_sentences(description);
  std::vector<std::size_t> chosen(sentences.size());
  std::iota(chosen.begin(), chosen.end(), 0);

  if (sentences.size() > kSummaryBypassSentences) {
    auto embeddings = encoder.embed(sentences);
    Embedding centroid{std::vector<double>(embeddings.at(0).dimension(), 0.0)};
    for (const auto& e : embeddings) {
      if (e.dimension() != centroid.dimension())
        throw BackendError("encoder returned embeddings of differing dimension");
      for (std::size_t d = 0; d < e.dimension(); ++d) centroid.values[d] += e.values[d];
    }
    for (double& v : centroid.values) v /= static_cast<double>(embeddings.size());

    std::vector<double> score(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) score[i] = cosine(embeddings[i], centroid);
    std::stable_sort(chosen.begin(), chosen.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    chosen.resize(std::min(m, chosen.size()));
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<SourceSentence> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back({article_id, sentences[i], Origin::kDescription, i});
  return out;
}

}  // namespace uttergen
