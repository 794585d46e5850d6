#pragma once

// End-to-end run over a batch of articles: sentence extraction, pool
// generation, candidate selection, output records and the run report.

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "uttergen/backends.hpp"
#include "uttergen/core.hpp"
#include "uttergen/generate.hpp"
#include "uttergen/select.hpp"
#include "uttergen/summarize.hpp"

namespace uttergen {

struct Utterance {
  SourceSentence source;
  ScoredCandidate selected;
};

struct SentenceReport {
  SourceSentence source;
  std::map<Technique, TechniqueStats> techniques;
  std::size_t pre_dedup_pool = 0;
  std::size_t pool = 0;
  SelectionStats selection;
  std::optional<std::string> error;
  bool unavailable = false;  // produced nothing because a backend was unreachable
};

struct ArticleResult {
  std::vector<Utterance> utterances;
  std::vector<SentenceReport> sentences;
};

struct PipelineResult {
  std::vector<ArticleResult> articles;  // input order

  std::size_t sentences() const {
    std::size_t n = 0;
    for (const auto& a : articles) n += a.sentences.size();
    return n;
  }

  /// True if at least one sentence was attempted and every one of them
  /// produced nothing because a backend was unreachable.
  bool backends_unavailable() const {
    std::size_t total = 0, down = 0;
    for (const auto& a : articles) {
      for (const auto& s : a.sentences) {
        ++total;
        down += s.unavailable;
      }
    }
    return total > 0 && down == total;
  }
};

struct PipelineResources {
  BackendSuite backends;
  Lexicons lexicons;
  GenerationConfig generation;
  SelectionConfig selection;
};

/// The title followed by the important description sentences. A summarizer
/// backend failure is reported as a failed DESCRIPTION pseudo-sentence.
inline ArticleResult process_article(const Article& article, const PipelineResources& res) {
  ArticleResult result;
  std::vector<SourceSentence> sentences{{article.id, std::string(trim(article.title)),
                                         Origin::kTitle, 0}};
  try {
    auto extracted = select_sentences(article.id, article.description,
                                      res.generation.summary_sentences, *res.backends.encoder);
    sentences.insert(sentences.end(), extracted.begin(), extracted.end());
  } catch (const BackendError& e) {
    SentenceReport report;
    report.source = {article.id, article.description, Origin::kDescription, 0};
    report.error = std::string("summarization: ") + e.what();
    report.unavailable = dynamic_cast<const BackendUnavailable*>(&e) != nullptr;
    result.sentences.push_back(std::move(report));
  }

  for (const auto& sentence : sentences) {
    SentenceReport report;
    report.source = sentence;
    try {
      auto pool = generate_pool(sentence, res.backends, res.lexicons, res.generation);
      report.techniques = pool.techniques;
      report.pre_dedup_pool = pool.pre_dedup_size;
      report.pool = pool.candidates.size();
      auto selected = select_candidates(pool.candidates, sentence, res.backends, res.lexicons,
                                        res.selection, &report.selection);
      if (selected.empty()) {
        for (const auto& [t, stats] : pool.techniques) report.unavailable |= stats.unavailable;
      }
      for (auto& s : selected) result.utterances.push_back({sentence, std::move(s)});
    } catch (const BackendError& e) {
      report.error = e.what();
      report.unavailable = dynamic_cast<const BackendUnavailable*>(&e) != nullptr;
    }
    result.sentences.push_back(std::move(report));
  }
  return result;
}

/// Processes articles on `workers` threads (0 = hardware concurrency).
/// Results are stored by input index, so output order never depends on
/// scheduling.
inline PipelineResult run_pipeline(const std::vector<Article>& articles,
                                   const PipelineResources& res, std::size_t workers = 0) {
  if (!res.backends.complete()) throw ContractViolation("run_pipeline: incomplete backend suite");
  if (!res.lexicons.closed_class)
    throw ContractViolation("run_pipeline: closed-class lexicon required");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(articles.size(), 1));

  PipelineResult result;
  result.articles.resize(articles.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < articles.size(); i = next++) {
      try {
        result.articles[i] = process_article(articles[i], res);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

/// One output JSON Lines record per selected utterance.
inline void write_utterances(std::ostream& out, const PipelineResult& result) {
  for (const auto& article : result.articles) {
    for (const auto& u : article.utterances) {
      nlohmann::ordered_json j;
      j["article_id"] = u.source.article_id;
      j["source_sentence"] = u.source.text;
      j["origin"] = to_string(u.source.origin);
      j["utterance"] = u.selected.text();
      j["technique"] = to_string(u.selected.candidate.technique);
      j["encoder_similarity"] = u.selected.encoder_similarity;
      j["tiebreak"] = u.selected.tiebreak;
      out << j.dump() << '\n';
    }
  }
}

/// Run statistics: per-technique candidate and failure counts, filter pass
/// rate, backend failures, and a per-sentence breakdown.
inline nlohmann::ordered_json run_report(const PipelineResult& result) {
  using nlohmann::ordered_json;
  std::map<Technique, std::pair<std::size_t, std::size_t>> per_technique;
  for (auto t : kGeneratorOrder) per_technique[t] = {0, 0};
  std::size_t pre = 0, pool = 0, filtered = 0, deduped = 0, selected = 0, failed = 0;
  ordered_json failures = ordered_json::array();
  ordered_json sentences = ordered_json::array();

  for (const auto& article : result.articles) {
    for (const auto& s : article.sentences) {
      ordered_json js;
      js["article_id"] = s.source.article_id;
      js["origin"] = to_string(s.source.origin);
      js["index"] = s.source.index;
      ordered_json techniques = ordered_json::object();
      for (const auto& [t, stats] : s.techniques) {
        techniques[std::string(to_string(t))] = stats.candidates;
        per_technique[t].first += stats.candidates;
        if (stats.failed) {
          ++per_technique[t].second;
          failures.push_back({{"article_id", s.source.article_id},
                              {"origin", to_string(s.source.origin)},
                              {"index", s.source.index},
                              {"technique", to_string(t)},
                              {"error", stats.error}});
        }
      }
      js["techniques"] = techniques;
      js["pre_dedup_pool"] = s.pre_dedup_pool;
      js["pool"] = s.pool;
      js["filtered"] = s.selection.filtered;
      js["after_embedding_dedup"] = s.selection.after_embedding_dedup;
      js["selected"] = s.selection.selected;
      if (s.error) {
        js["error"] = *s.error;
        ++failed;
        failures.push_back({{"article_id", s.source.article_id},
                            {"origin", to_string(s.source.origin)},
                            {"index", s.source.index},
                            {"technique", nullptr},
                            {"error", *s.error}});
      }
      pre += s.pre_dedup_pool;
      pool += s.pool;
      filtered += s.selection.filtered;
      deduped += s.selection.after_embedding_dedup;
      selected += s.selection.selected;
      sentences.push_back(std::move(js));
    }
  }

  ordered_json report;
  report["articles"] = result.articles.size();
  report["sentences"] = result.sentences();
  report["sentences_failed"] = failed;
  ordered_json techniques = ordered_json::object();
  for (const auto& [t, c] : per_technique)
    techniques[std::string(to_string(t))] = {{"candidates", c.first}, {"failures", c.second}};
  report["techniques"] = techniques;
  report["pre_dedup_pool"] = pre;
  report["pool"] = pool;
  report["filtered"] = filtered;
  report["filter_pass_rate"] = pool == 0 ? 0.0 : static_cast<double>(filtered) / pool;
  report["after_embedding_dedup"] = deduped;
  report["selected"] = selected;
  report["backend_failures"] = failures;
  report["per_sentence"] = sentences;
  return report;
}

}  // namespace uttergen
