#pragma once

// Lexical resources: stopword / closed-class word lists, the synonym
// lexicon (flat TSV stand-in for WordNet synsets) and the PPDB phrase table.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "uttergen/core.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split(std::string_view s, std::string_view delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto hit = s.find(delim, pos);
    if (hit == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      return out;
    }
    out.emplace_back(s.substr(pos, hit - pos));
    pos = hit + delim.size();
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-class words

/// Words that must be closed-class regardless of what the list file says.
inline const std::vector<std::string>& required_closed_class() {
  static const std::vector<std::string> words = {
      "be", "is",  "am", "are",  "was", "were", "been", "being", "have", "has", "had",
      "having", "and", "or", "but", "of", "in", "on", "at", "to", "for", "with"};
  return words;
}

struct ClosedClassLexicon {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> closed_class{required_closed_class().begin(),
                                               required_closed_class().end()};
  std::size_t min_word_length = 3;

  bool is_content_word(std::string_view token) const {
    std::string t(token);
    return t.size() >= min_word_length && !stopwords.count(t) && !closed_class.count(t);
  }
};

/// One word per line, '#' starts a comment line, blank lines ignored. Words
/// are lowercased.
inline std::vector<std::string> read_word_list(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.push_back(to_lower(w));
  }
  return words;
}

inline std::vector<std::string> load_word_list(const std::string& path) {
  auto in = detail::open_input(path);
  return read_word_list(in);
}

inline ClosedClassLexicon load_closed_class(const std::string& stopwords_path,
                                            const std::string& closed_class_path,
                                            std::size_t min_word_length = 3) {
  ClosedClassLexicon lex;
  for (auto& w : load_word_list(stopwords_path)) lex.stopwords.insert(std::move(w));
  for (auto& w : load_word_list(closed_class_path)) lex.closed_class.insert(std::move(w));
  lex.min_word_length = min_word_length;
  return lex;
}

/// Tokens that are neither stopwords nor closed-class and have at least
/// `min_word_length` characters.
inline std::set<std::string> content_words(const std::vector<std::string>& tokens,
                                           const ClosedClassLexicon& lex) {
  std::set<std::string> out;
  for (const auto& t : tokens)
    if (lex.is_content_word(t)) out.insert(t);
  return out;
}

// ---------------------------------------------------------------------------
// Synonym lexicon

class SynonymLexicon {
 public:
  /// Adds synonyms for `lemma`; both sides are lowercased and self-synonyms
  /// dropped.
  void add(std::string_view lemma, const std::vector<std::string>& synonyms) {
    auto key = to_lower(trim(lemma));
    auto& set = entries_[key];
    for (const auto& s : synonyms) {
      auto syn = to_lower(trim(s));
      if (!syn.empty() && syn != key) set.insert(std::move(syn));
    }
    if (set.empty()) entries_.erase(key);
  }

  const std::set<std::string>& synonyms(const std::string& lemma) const {
    static const std::set<std::string> kEmpty;
    auto it = entries_.find(lemma);
    return it == entries_.end() ? kEmpty : it->second;
  }

  const std::map<std::string, std::set<std::string>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

/// Parses `lemma<TAB>pos<TAB>syn1|syn2|...` lines.
inline SynonymLexicon read_synonyms(std::istream& in) {
  SynonymLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, "\t");
    if (fields.size() < 3)
      throw ParseError("expected lemma<TAB>pos<TAB>synonyms, got " +
                           std::to_string(fields.size()) + " field(s)",
                       lineno);
    lex.add(fields[0], detail::split(fields[2], "|"));
  }
  return lex;
}

inline SynonymLexicon load_synonyms(const std::string& path) {
  auto in = detail::open_input(path);
  return read_synonyms(in);
}

// ---------------------------------------------------------------------------
// PPDB

using Phrase = std::vector<std::string>;

struct PpdbParaphrase {
  Phrase paraphrase;
  double score = 0.0;

  friend bool operator==(const PpdbParaphrase&, const PpdbParaphrase&) = default;
};

class PpdbTable {
 public:
  /// Inserts or raises the score of phrase -> paraphrase. Empty phrases are
  /// ignored.
  void add(const Phrase& phrase, const Phrase& paraphrase, double score) {
    if (phrase.empty() || paraphrase.empty()) return;
    auto& list = entries_[phrase];
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const PpdbParaphrase& p) { return p.paraphrase == paraphrase; });
    if (it == list.end()) {
      list.push_back({paraphrase, score});
    } else {
      it->score = std::max(it->score, score);
    }
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.paraphrase < b.paraphrase;
    });
    max_phrase_length_ = std::max({max_phrase_length_, phrase.size(), paraphrase.size()});
  }

  /// Paraphrases of `phrase` sorted by score descending, or nullptr.
  const std::vector<PpdbParaphrase>* find(const Phrase& phrase) const {
    auto it = entries_.find(phrase);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<Phrase, std::vector<PpdbParaphrase>>& entries() const { return entries_; }
  std::size_t max_phrase_length() const { return max_phrase_length_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const PpdbTable& a, const PpdbTable& b) {
    return a.entries_ == b.entries_ && a.max_phrase_length_ == b.max_phrase_length_;
  }

 private:
  std::map<Phrase, std::vector<PpdbParaphrase>> entries_;
  std::size_t max_phrase_length_ = 1;
};

struct PpdbLoadResult {
  PpdbTable table;
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t missing_score = 0;  // rows skipped with a warning
  std::size_t below_min_score = 0;
  std::size_t not_equivalence = 0;
};

inline constexpr std::string_view kPpdbDelimiter = " ||| ";
inline constexpr std::string_view kPpdbScoreFeature = "PPDB2.0Score";

/// Parses PPDB 2.0 plain-text rows
/// `LHS ||| phrase ||| paraphrase ||| features ||| alignment ||| entailment`.
inline PpdbLoadResult read_ppdb(std::istream& in, double min_score) {
  PpdbLoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (trim(line).empty()) continue;
    auto fields = detail::split(line, kPpdbDelimiter);
    if (fields.size() < 6)
      throw ParseError("expected 6 ' ||| '-separated fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    ++result.rows;

    std::optional<double> score;
    std::istringstream features(fields[3]);
    std::string kv;
    while (features >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos || kv.compare(0, eq, kPpdbScoreFeature) != 0) continue;
      try {
        std::size_t used = 0;
        double v = std::stod(kv.substr(eq + 1), &used);
        if (used == kv.size() - eq - 1) score = v;
      } catch (const std::exception&) {
      }
      break;
    }
    if (!score) {
      ++result.missing_score;
      continue;
    }
    if (trim(fields[5]) != "Equivalence") {
      ++result.not_equivalence;
      continue;
    }
    if (*score < min_score) {
      ++result.below_min_score;
      continue;
    }
    auto phrase = tokenize(fields[1]);
    auto paraphrase = tokenize(fields[2]);
    if (phrase.empty() || paraphrase.empty()) continue;
    result.table.add(phrase, paraphrase, *score);
    ++result.kept;
  }
  return result;
}

inline PpdbLoadResult load_ppdb(const std::string& path, double min_score) {
  auto in = detail::open_input(path);
  return read_ppdb(in, min_score);
}

/// Writes the table back as PPDB 2.0 rows that `read_ppdb` accepts.
inline void write_ppdb(std::ostream& out, const PpdbTable& table) {
  char buf[64];
  for (const auto& [phrase, list] : table.entries()) {
    for (const auto& p : list) {
      std::snprintf(buf, sizeof buf, "%.17g", p.score);
      out << "[X]" << kPpdbDelimiter << join(phrase) << kPpdbDelimiter << join(p.paraphrase)
          << kPpdbDelimiter << kPpdbScoreFeature << '=' << buf << kPpdbDelimiter << "0-0"
          << kPpdbDelimiter << "Equivalence\n";
    }
  }
}

struct PhraseMatch {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  Phrase paraphrase;
  double score = 0.0;

  friend bool operator==(const PhraseMatch&, const PhraseMatch&) = default;
};

/// For every start position, the longest table phrase starting there; one
/// result per paraphrase of that phrase, in table order.
inline std::vector<PhraseMatch> match_phrases(const std::vector<std::string>& tokens,
                                              const PpdbTable& table) {
  std::vector<PhraseMatch> out;
  if (table.empty()) return out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::size_t longest = std::min(table.max_phrase_length(), tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      Phrase key(tokens.begin() + i, tokens.begin() + i + len);
      if (const auto* list = table.find(key)) {
        for (const auto& p : *list) out.push_back({i, i + len, p.paraphrase, p.score});
        break;
      }
    }
  }
  return out;
}

}  // namespace uttergen
