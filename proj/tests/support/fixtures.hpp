#pragma once

// Shared test helpers: repository paths, the shipped resources, and a
// lookup encoder returning constructed vectors.

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uttergen/uttergen.hpp"

namespace uttergen::testing {

inline std::string source_path(const std::string& rel) {
  return (std::filesystem::path(UTTERGEN_SOURCE_DIR) / rel).string();
}

inline std::string data_path(const std::string& name) { return source_path("data/" + name); }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const ClosedClassLexicon> shipped_closed_class() {
  static auto lex = std::make_shared<const ClosedClassLexicon>(
      load_closed_class(data_path("stopwords.txt"), data_path("closed_class.txt")));
  return lex;
}

/// Resources exactly as config/default.json wires them.
inline PipelineResources default_resources() {
  auto cfg = load_config(source_path("config/default.json"));
  PipelineResources res;
  res.lexicons = load_lexicons(cfg);
  res.backends = build_backends(cfg, res.lexicons);
  res.generation = cfg.generation;
  res.selection = cfg.selection;
  return res;
}

/// Encoder test double: returns a preset vector per (lowercased) text.
class LookupEncoder final : public Encoder {
 public:
  explicit LookupEncoder(std::size_t dimension) : dimension_(dimension) {}

  void set(const std::string& text, std::vector<double> values) {
    vectors_[to_lower(text)] = Embedding{std::move(values)};
  }

  std::vector<Embedding> embed(std::span<const std::string> texts) const override {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      auto it = vectors_.find(to_lower(t));
      if (it == vectors_.end()) throw BackendError("LookupEncoder: unknown text '" + t + "'");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, Embedding> vectors_;
};

/// Encoder double that always fails.
class FailingEncoder final : public Encoder {
 public:
  std::vector<Embedding> embed(std::span<const std::string>) const override {
    throw BackendUnavailable("encoder down");
  }
};

class FailingTranslator final : public Translator {
 public:
  std::vector<std::vector<std::string>> translate(std::span<const std::string>, std::string_view,
                                                  std::string_view, std::size_t) const override {
    throw BackendUnavailable("translator down");
  }
};

/// Fluency double with preset losses per text (0 if unknown).
class LookupFluency final : public FluencyScorer {
 public:
  void set(const std::string& text, double loss) { losses_[text] = loss; }

  std::vector<double> losses(std::span<const std::string> texts) const override {
    std::vector<double> out;
    for (const auto& t : texts) {
      auto it = losses_.find(t);
      out.push_back(it == losses_.end() ? 0.0 : it->second);
    }
    return out;
  }

 private:
  std::unordered_map<std::string, double> losses_;
};

/// Detector double with preset probabilities per candidate text.
class LookupDetector final : public Detector {
 public:
  void set(const std::string& candidate, double p) { probs_[to_lower(candidate)] = p; }

  std::vector<double> probabilities(std::span<const TextPair> pairs) const override {
    std::vector<double> out;
    for (const auto& [a, b] : pairs) {
      auto it = probs_.find(to_lower(b));
      out.push_back(it == probs_.end() ? 0.0 : it->second);
    }
    return out;
  }

 private:
  std::unordered_map<std::string, double> probs_;
};

inline SourceSentence sentence(const std::string& text, Origin origin = Origin::kTitle,
                               std::size_t index = 0) {
  return {"art", text, origin, index};
}

inline Candidate candidate(const std::string& text, const SourceSentence& src,
                           Technique t = Technique::kExternal) {
  return {text, src, t, std::nullopt};
}

}  // namespace uttergen::testing
