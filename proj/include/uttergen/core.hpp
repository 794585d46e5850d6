#pragma once

// Domain types and configuration shared by every stage of the utterance
// pipeline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uttergen {

// ---------------------------------------------------------------------------
// Errors

/// Caller broke a documented precondition (dimension mismatch, empty
/// reference list, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 if
/// the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid or incomplete configuration. `key()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::string message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)),
        message_(std::move(message)) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string key_;
  std::string message_;
};

/// A model backend returned an error or a response that breaks its contract.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend could not be reached after all retries.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

// ---------------------------------------------------------------------------
// Articles and sentences

struct Article {
  std::string id;
  std::string title;
  std::string description;
};

enum class Origin { kTitle, kDescription };

inline std::string_view to_string(Origin origin) {
  return origin == Origin::kTitle ? "TITLE" : "DESCRIPTION";
}

struct SourceSentence {
  std::string article_id;
  std::string text;
  Origin origin = Origin::kTitle;
  std::size_t index = 0;

  friend bool operator==(const SourceSentence&, const SourceSentence&) = default;
};

// ---------------------------------------------------------------------------
// Candidates

enum class Technique { kBt, kNpVpBt, kWordnet, kPpdb, kExternal };

inline constexpr Technique kGeneratorOrder[] = {Technique::kBt, Technique::kNpVpBt,
                                                Technique::kWordnet, Technique::kPpdb};

inline std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::kBt: return "BT";
    case Technique::kNpVpBt: return "NP_VP_BT";
    case Technique::kWordnet: return "WORDNET";
    case Technique::kPpdb: return "PPDB";
    case Technique::kExternal: return "EXTERNAL";
  }
  return "EXTERNAL";
}

inline std::optional<Technique> technique_from_string(std::string_view name) {
  for (auto t : {Technique::kBt, Technique::kNpVpBt, Technique::kWordnet, Technique::kPpdb,
                 Technique::kExternal}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

/// Which token span of the source was replaced, and by what.
struct Provenance {
  std::size_t start = 0;  // token index
  std::size_t end = 0;    // exclusive
  std::string replacement;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Candidate {
  std::string text;
  SourceSentence source;
  Technique technique = Technique::kExternal;
  std::optional<Provenance> provenance;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct ScoredCandidate {
  Candidate candidate;
  double encoder_similarity = 0.0;
  double fluency_loss = 0.0;
  double tiebreak = 0.0;

  const std::string& text() const { return candidate.text; }
};

// ---------------------------------------------------------------------------
// Configuration

struct GenerationConfig {
  std::string pivot_language = "de";
  std::size_t forward_beam = 5;
  std::size_t backward_beam = 5;
  std::size_t max_variants_per_technique = 25;
  std::set<Technique> techniques{Technique::kBt, Technique::kNpVpBt, Technique::kWordnet,
                                 Technique::kPpdb};
  // Sentences kept from a long description.
  std::size_t summary_sentences = 3;

  bool enabled(Technique t) const { return techniques.count(t) != 0; }

  void validate() const {
    if (pivot_language.empty()) throw ConfigError("pivot_language", "must be non-empty");
    if (forward_beam == 0) throw ConfigError("forward_beam", "must be positive");
    if (backward_beam == 0) throw ConfigError("backward_beam", "must be positive");
    if (max_variants_per_technique == 0)
      throw ConfigError("max_variants_per_technique", "must be positive");
    if (summary_sentences == 0) throw ConfigError("summary_sentences", "must be positive");
  }
};

enum class FilterMode { kEncoder, kDetector };

struct SelectionConfig {
  double low_threshold = 0.5;
  double dup_threshold = 0.95;
  std::size_t k = 20;
  FilterMode filter_mode = FilterMode::kEncoder;
  double detector_threshold = 0.5;
  bool allow_zero_novelty = false;

  void validate() const {
    if (!(low_threshold >= 0.0)) throw ConfigError("low_threshold", "must be >= 0");
    if (!(dup_threshold <= 1.0)) throw ConfigError("dup_threshold", "must be <= 1");
    if (!(low_threshold < dup_threshold))
      throw ConfigError("low_threshold", "must be below dup_threshold");
    if (k == 0) throw ConfigError("k", "must be positive");
    if (!(detector_threshold >= 0.0 && detector_threshold <= 1.0))
      throw ConfigError("detector_threshold", "must lie in [0, 1]");
  }
};

}  // namespace uttergen
