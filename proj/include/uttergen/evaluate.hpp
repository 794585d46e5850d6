#pragma once

// Evaluation of utterance sets: sentence BLEU, the per-input averaged corpus
// BLEU, and the usefulness metrics computed from human annotations.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "uttergen/core.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

struct AnnotationRecord {
  std::string input_id;
  std::string paraphrase;
  int label = 0;  // 1 useful, 0 not useful
};

/// Input ids present on one side but not the other.
class IdMismatchError : public std::runtime_error {
 public:
  explicit IdMismatchError(std::vector<std::string> missing)
      : std::runtime_error(describe(missing)), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& ids) {
    std::string s = "no references for input id(s):";
    for (const auto& id : ids) s += " " + id;
    return s;
  }
  std::vector<std::string> missing_;
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

inline NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

}  // namespace detail

/// Sentence-level BLEU with uniform weights over 1..max_n grams.
///
/// Precisions are clipped against the maximum count in any reference. If
/// any n >= 2 has zero matches, every n >= 2 precision becomes
/// (matches + 1) / (total + 1). Brevity penalty uses the reference length
/// closest to the candidate (shorter wins ties).
inline double bleu(const std::string& candidate, const std::vector<std::string>& references,
                   std::size_t max_n = 4) {
  if (references.empty()) throw ContractViolation("bleu: reference list is empty");
  if (max_n == 0) throw ContractViolation("bleu: max_n must be >= 1");
  auto cand = tokenize(candidate);
  if (cand.empty()) return 0.0;

  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(tokenize(r));

  std::vector<std::size_t> matches(max_n + 1, 0), totals(max_n + 1, 0);
  for (std::size_t n = 1; n <= max_n; ++n) {
    auto cand_counts = detail::ngram_counts(cand, n);
    detail::NgramCounts max_ref;
    for (const auto& r : refs) {
      for (const auto& [gram, c] : detail::ngram_counts(r, n)) {
        auto& m = max_ref[gram];
        m = std::max(m, c);
      }
    }
    for (const auto& [gram, c] : cand_counts) {
      totals[n] += c;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matches[n] += std::min(c, it->second);
    }
  }
  if (matches[1] == 0) return 0.0;

  bool smooth = false;
  for (std::size_t n = 2; n <= max_n; ++n) smooth |= matches[n] == 0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    double p = (smooth && n >= 2)
                   ? (static_cast<double>(matches[n]) + 1.0) / (static_cast<double>(totals[n]) + 1.0)
                   : static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    log_sum += std::log(p);
  }

  const auto c = cand.size();
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    auto d = [&](std::size_t len) { return len > c ? len - c : c - len; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

using TextsById = std::map<std::string, std::vector<std::string>>;

/// Mean over inputs of the mean sentence BLEU of that input's outputs.
/// Inputs are the reference ids; inputs without outputs score 0. Output ids
/// without references raise IdMismatchError.
inline double corpus_bleu(const TextsById& outputs, const TextsById& references,
                          std::size_t max_n = 4) {
  std::vector<std::string> missing;
  for (const auto& [id, texts] : outputs)
    if (!references.count(id)) missing.push_back(id);
  if (!missing.empty()) throw IdMismatchError(std::move(missing));
  if (references.empty()) return 0.0;

  double total = 0.0;
  for (const auto& [id, refs] : references) {
    auto it = outputs.find(id);
    if (it == outputs.end() || it->second.empty()) continue;
    double sum = 0.0;
    for (const auto& cand : it->second) sum += bleu(cand, refs, max_n);
    total += sum / static_cast<double>(it->second.size());
  }
  return total / static_cast<double>(references.size());
}

struct UsefulnessMetrics {
  double avg_fraction = 0.0;  // mean over inputs of useful / total
  double avg_number = 0.0;    // mean over inputs of useful count
};

inline UsefulnessMetrics usefulness_metrics(const std::vector<AnnotationRecord>& annotations) {
  if (annotations.empty()) throw ContractViolation("usefulness_metrics: no annotations");
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // useful, total
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& a : annotations) {
    if (a.label != 0 && a.label != 1)
      throw ContractViolation("label must be 0 or 1 for input " + a.input_id);
    if (!seen.emplace(a.input_id, a.paraphrase).second)
      throw ContractViolation("duplicate annotation for input " + a.input_id + ": " +
                              a.paraphrase);
    auto& g = groups[a.input_id];
    g.first += static_cast<std::size_t>(a.label);
    ++g.second;
  }
  UsefulnessMetrics m;
  for (const auto& [id, g] : groups) {
    m.avg_fraction += static_cast<double>(g.first) / static_cast<double>(g.second);
    m.avg_number += static_cast<double>(g.first);
  }
  m.avg_fraction /= static_cast<double>(groups.size());
  m.avg_number /= static_cast<double>(groups.size());
  return m;
}

}  // namespace uttergen
