#pragma once

// Model interfaces (encoder, translator, paraphrase detector, fluency
// scorer, chunker) and the deterministic reference implementations used
// when no model server is configured.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "uttergen/core.hpp"
#include "uttergen/lexicon.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

struct Embedding {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// Cosine similarity. Zero-norm inputs give 0.
inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension())
    throw ContractViolation("cosine: dimension mismatch (" + std::to_string(a.dimension()) +
                            " vs " + std::to_string(b.dimension()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

enum class PhraseLabel { kNp, kVp };

inline std::string_view to_string(PhraseLabel l) { return l == PhraseLabel::kNp ? "NP" : "VP"; }

struct PhraseSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  PhraseLabel label = PhraseLabel::kNp;

  friend bool operator==(const PhraseSpan&, const PhraseSpan&) = default;
};

using TextPair = std::pair<std::string, std::string>;

// ---------------------------------------------------------------------------
// Interfaces. Implementations must be callable concurrently.

class Encoder {
 public:
  virtual ~Encoder() = default;
  /// One embedding per input text, same order.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) const = 0;

  Embedding embed_one(const std::string& text) const {
    return embed(std::span<const std::string>(&text, 1)).at(0);
  }
};

class Translator {
 public:
  virtual ~Translator() = default;
  /// Up to `n` distinct translations per input text, in a deterministic
  /// order.
  virtual std::vector<std::vector<std::string>> translate(std::span<const std::string> texts,
                                                          std::string_view source,
                                                          std::string_view target,
                                                          std::size_t n) const = 0;

  std::vector<std::string> translate_one(const std::string& text, std::string_view source,
                                         std::string_view target, std::size_t n) const {
    return translate(std::span<const std::string>(&text, 1), source, target, n).at(0);
  }
};

class Detector {
 public:
  virtual ~Detector() = default;
  /// Paraphrase probability in [0, 1] for each (a, b). Not assumed symmetric.
  virtual std::vector<double> probabilities(std::span<const TextPair> pairs) const = 0;

  double probability(const std::string& a, const std::string& b) const {
    TextPair p{a, b};
    return probabilities(std::span<const TextPair>(&p, 1)).at(0);
  }
};

class FluencyScorer {
 public:
  virtual ~FluencyScorer() = default;
  /// Mean per-token cross-entropy in nats; lower is more fluent.
  virtual std::vector<double> losses(std::span<const std::string> texts) const = 0;

  double loss(const std::string& text) const {
    return losses(std::span<const std::string>(&text, 1)).at(0);
  }
};

class Chunker {
 public:
  virtual ~Chunker() = default;
  virtual std::vector<PhraseSpan> phrases(const std::string& text,
                                          const std::vector<std::string>& tokens) const = 0;
};

struct BackendSuite {
  std::shared_ptr<const Encoder> encoder;
  std::shared_ptr<const Translator> translator;
  std::shared_ptr<const Detector> detector;
  std::shared_ptr<const FluencyScorer> fluency;
  std::shared_ptr<const Chunker> chunker;

  bool complete() const { return encoder && translator && detector && fluency && chunker; }
};

// ---------------------------------------------------------------------------
// Reference implementations

/// 64-bit FNV-1a with the offset basis perturbed by `seed`.
inline std::uint64_t stable_hash(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Hashed bag of content words, L2-normalized.
class HashingEncoder final : public Encoder {
 public:
  static constexpr std::uint64_t kSeed = 0x7574746572676e31ULL;

  explicit HashingEncoder(std::shared_ptr<const ClosedClassLexicon> lex,
                          std::size_t dimension = 256)
      : lex_(std::move(lex)), dimension_(dimension) {
    if (dimension_ == 0) throw ContractViolation("HashingEncoder: dimension must be positive");
  }

  std::size_t dimension() const { return dimension_; }

  std::vector<Embedding> embed(std::span<const std::string> texts) const override {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      Embedding e{std::vector<double>(dimension_, 0.0)};
      for (const auto& tok : tokenize(text)) {
        if (!lex_->is_content_word(tok)) continue;
        e.values[stable_hash(tok, kSeed) % dimension_] += 1.0;
      }
      double norm = 0.0;
      for (double v : e.values) norm += v * v;
      if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : e.values) v /= norm;
      }
      out.push_back(std::move(e));
    }
    return out;
  }

 private:
  std::shared_ptr<const ClosedClassLexicon> lex_;
  std::size_t dimension_;
};

/// Word/phrase substitution tables keyed by language pair. Rows are
/// `source_lang<TAB>target_lang<TAB>phrase<TAB>alt1|alt2|...`.
class TranslationTables {
 public:
  void add(const std::string& source, const std::string& target, const std::string& phrase,
           std::vector<std::string> alternatives) {
    auto key = tokenize(phrase);
    if (key.empty() || alternatives.empty()) return;
    auto& table = tables_[{source, target}];
    table.max_len = std::max(table.max_len, key.size());
    auto& alts = table.entries[key];
    for (auto& a : alternatives) {
      auto folded = fold(a);
      if (!folded.empty() && std::find(alts.begin(), alts.end(), folded) == alts.end())
        alts.push_back(std::move(folded));
    }
  }

  struct Table {
    std::map<std::vector<std::string>, std::vector<std::string>> entries;
    std::size_t max_len = 1;
  };

  const Table* find(std::string_view source, std::string_view target) const {
    auto it = tables_.find({std::string(source), std::string(target)});
    return it == tables_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, Table> tables_;
};

inline TranslationTables read_translation_tables(std::istream& in) {
  TranslationTables tables;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = detail::split(line, "\t");
    if (f.size() < 4)
      throw ParseError("expected src<TAB>tgt<TAB>phrase<TAB>alternatives", lineno);
    tables.add(f[0], f[1], f[2], detail::split(f[3], "|"));
  }
  return tables;
}

inline TranslationTables load_translation_tables(const std::string& path) {
  auto in = detail::open_input(path);
  return read_translation_tables(in);
}

/// Table-driven stand-in for beam-search NMT. Variant i substitutes every
/// matched phrase by its i-th alternative (the last one when it has fewer);
/// unmatched tokens are copied through.
class TableTranslator final : public Translator {
 public:
  explicit TableTranslator(TranslationTables tables) : tables_(std::move(tables)) {}

  std::vector<std::vector<std::string>> translate(std::span<const std::string> texts,
                                                  std::string_view source,
                                                  std::string_view target,
                                                  std::size_t n) const override {
    if (n == 0) throw ContractViolation("translate: n must be >= 1");
    const auto* table = tables_.find(source, target);
    if (!table)
      throw BackendError("no translation table for language pair " + std::string(source) +
                         "->" + std::string(target));
    std::vector<std::vector<std::string>> out;
    for (const auto& text : texts) out.push_back(translate_text(*table, text, n));
    return out;
  }

 private:
  struct Piece {
    std::string literal;
    const std::vector<std::string>* alts = nullptr;
  };

  static std::vector<std::string> translate_text(const TranslationTables::Table& table,
                                                 const std::string& text, std::size_t n) {
    auto tokens = tokenize(text);
    std::vector<Piece> pieces;
    std::size_t variants = 1;
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t longest = std::min(table.max_len, tokens.size() - i);
      bool matched = false;
      for (std::size_t len = longest; len >= 1; --len) {
        std::vector<std::string> key(tokens.begin() + i, tokens.begin() + i + len);
        auto it = table.entries.find(key);
        if (it != table.entries.end()) {
          pieces.push_back({{}, &it->second});
          variants = std::max(variants, it->second.size());
          i += len;
          matched = true;
          break;
        }
      }
      if (!matched) pieces.push_back({tokens[i++], nullptr});
    }

    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t v = 0; v < variants && out.size() < n; ++v) {
      std::vector<std::string> words;
      for (const auto& p : pieces) {
        if (!p.alts) {
          words.push_back(p.literal);
        } else {
          words.push_back((*p.alts)[std::min(v, p.alts->size() - 1)]);
        }
      }
      auto s = join(words);
      if (s.empty()) continue;
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
  }

  TranslationTables tables_;
};

/// Jaccard overlap of content-word sets; two empty sets give 1.
class JaccardDetector final : public Detector {
 public:
  explicit JaccardDetector(std::shared_ptr<const ClosedClassLexicon> lex)
      : lex_(std::move(lex)) {}

  std::vector<double> probabilities(std::span<const TextPair> pairs) const override {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      auto wa = content_words(tokenize(a), *lex_);
      auto wb = content_words(tokenize(b), *lex_);
      if (wa.empty() && wb.empty()) {
        out.push_back(1.0);
        continue;
      }
      std::size_t inter = 0;
      for (const auto& w : wa) inter += wb.count(w);
      std::size_t uni = wa.size() + wb.size() - inter;
      out.push_back(static_cast<double>(inter) / static_cast<double>(uni));
    }
    return out;
  }

 private:
  std::shared_ptr<const ClosedClassLexicon> lex_;
};

/// Add-one smoothed unigram model. p(w) = (count(w) + 1) / (N + V) where N is
/// the total count and V the vocabulary size plus one slot for unseen words.
class UnigramFluency final : public FluencyScorer {
 public:
  explicit UnigramFluency(std::unordered_map<std::string, std::uint64_t> counts)
      : counts_(std::move(counts)) {
    for (const auto& [w, c] : counts_) total_ += c;
    denominator_ = static_cast<double>(total_) + static_cast<double>(counts_.size() + 1);
  }

  double log_prob(const std::string& token) const {
    auto it = counts_.find(token);
    double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((c + 1.0) / denominator_);
  }

  std::vector<double> losses(std::span<const std::string> texts) const override {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      auto tokens = tokenize(text);
      if (tokens.empty()) {
        out.push_back(0.0);
        continue;
      }
      double sum = 0.0;
      for (const auto& t : tokens) sum -= log_prob(t);
      out.push_back(sum / static_cast<double>(tokens.size()));
    }
    return out;
  }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  double denominator_ = 1.0;
};

/// `word<TAB>count` per line; '#' comments.
inline std::unordered_map<std::string, std::uint64_t> read_frequencies(std::istream& in) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = detail::split(line, "\t");
    if (f.size() < 2) throw ParseError("expected word<TAB>count", lineno);
    try {
      counts[to_lower(trim(f[0]))] += std::stoull(f[1]);
    } catch (const std::exception&) {
      throw ParseError("bad count '" + f[1] + "'", lineno);
    }
  }
  return counts;
}

inline std::unordered_map<std::string, std::uint64_t> load_frequencies(const std::string& path) {
  auto in = detail::open_input(path);
  return read_frequencies(in);
}

/// Left-to-right rule chunker.
///
/// NP: a maximal run of tokens that are not stopwords, closed-class words,
/// punctuation, determiners or listed verbs, plus one immediately preceding
/// determiner. VP: a listed verb immediately followed by an NP.
class RuleChunker final : public Chunker {
 public:
  RuleChunker(std::shared_ptr<const ClosedClassLexicon> lex,
              std::unordered_set<std::string> determiners, std::unordered_set<std::string> verbs)
      : lex_(std::move(lex)), determiners_(std::move(determiners)), verbs_(std::move(verbs)) {}

  std::vector<PhraseSpan> phrases(const std::string& /*text*/,
                                  const std::vector<std::string>& tokens) const override {
    std::vector<PhraseSpan> nps;
    const std::size_t n = tokens.size();
    for (std::size_t i = 0; i < n;) {
      if (!is_nominal(tokens[i])) {
        ++i;
        continue;
      }
      std::size_t start = i;
      while (i < n && is_nominal(tokens[i])) ++i;
      if (start > 0 && determiners_.count(tokens[start - 1])) --start;
      nps.push_back({start, i, PhraseLabel::kNp});
    }

    std::vector<PhraseSpan> out = nps;
    for (const auto& np : nps) {
      if (np.start > 0 && verbs_.count(tokens[np.start - 1]))
        out.push_back({np.start - 1, np.end, PhraseLabel::kVp});
    }
    return out;
  }

 private:
  bool is_nominal(const std::string& t) const {
    return !is_punctuation(t) && !lex_->stopwords.count(t) && !lex_->closed_class.count(t) &&
           !determiners_.count(t) && !verbs_.count(t);
  }

  std::shared_ptr<const ClosedClassLexicon> lex_;
  std::unordered_set<std::string> determiners_;
  std::unordered_set<std::string> verbs_;
};

}  // namespace uttergen
