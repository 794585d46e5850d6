#pragma once

// Pipeline configuration file.
//
// A JSON object with four required sections:
//
//   "generation": pivot_language, forward_beam, backward_beam,
//                 max_variants_per_technique, techniques, summary_sentences
//   "selection":  low_threshold, dup_threshold, k, filter_mode,
//                 detector_threshold, allow_zero_novelty
//   "backends":   encoder, translator, detector, fluency, chunker; each
//                 {"type":"reference", ...} or
//                 {"type":"remote","url":...,"timeout_ms":...,"retries":...}
//   "lexicons":   stopwords, closed_class, min_word_length, synonyms, ppdb,
//                 ppdb_min_score
//
// Every key is required. Relative paths resolve against the directory of
// the config file.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "uttergen/backends.hpp"
#include "uttergen/core.hpp"
#include "uttergen/generate.hpp"
#include "uttergen/lexicon.hpp"
#include "uttergen/remote.hpp"

namespace uttergen {

/// Environment variable naming a config file when --config is absent.
inline constexpr const char* kConfigEnvVar = "UTTERGEN_CONFIG";

struct BackendSpec {
  bool remote = false;
  RemoteOptions remote_options;
  nlohmann::json settings;  // the raw section, for reference-specific keys
};

struct LexiconPaths {
  std::string stopwords;
  std::string closed_class;
  std::size_t min_word_length = 3;
  std::string synonyms;
  std::string ppdb;
  double ppdb_min_score = 3.0;
};

struct PipelineConfig {
  GenerationConfig generation;
  SelectionConfig selection;
  BackendSpec encoder, translator, detector, fluency, chunker;
  LexiconPaths lexicons;
  std::filesystem::path base_dir;
};

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {}

  const nlohmann::json& require(const std::string& key) const {
    if (!j_.is_object() || !j_.contains(key))
      throw ConfigError(name(key), "missing required key");
    return j_.at(key);
  }

  ConfigReader section(const std::string& key) const {
    const auto& s = require(key);
    if (!s.is_object()) throw ConfigError(name(key), "must be an object");
    return ConfigReader(s, name(key));
  }

  std::string string(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_string()) throw ConfigError(name(key), "must be a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number()) throw ConfigError(name(key), "must be a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(name(key), "must be a non-negative integer");
    return v.get<std::size_t>();
  }

  bool boolean(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_boolean()) throw ConfigError(name(key), "must be true or false");
    return v.get<bool>();
  }

  const nlohmann::json& raw() const { return j_; }
  std::string name(const std::string& key) const { return prefix_ + "." + key; }

 private:
  const nlohmann::json& j_;
  std::string prefix_;
};

inline BackendSpec read_backend(const ConfigReader& backends, const std::string& key) {
  auto r = backends.section(key);
  BackendSpec spec;
  spec.settings = r.raw();
  auto type = r.string("type");
  if (type == "reference") return spec;
  if (type != "remote") throw ConfigError(r.name("type"), "must be \"reference\" or \"remote\"");
  spec.remote = true;
  spec.remote_options.base_url = r.string("url");
  spec.remote_options.timeout = std::chrono::milliseconds(r.count("timeout_ms"));
  spec.remote_options.retries = static_cast<unsigned>(r.count("retries"));
  if (r.raw().contains("backoff_ms"))
    spec.remote_options.backoff = std::chrono::milliseconds(r.count("backoff_ms"));
  return spec;
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& root,
                                   const std::filesystem::path& base_dir = {}) {
  if (!root.is_object()) throw ConfigError("", "config must be a JSON object");
  detail::ConfigReader top(root, "");
  auto strip = [](std::string s) { return s.substr(1); };  // drop leading '.'
  try {
    PipelineConfig cfg;
    cfg.base_dir = base_dir;

    auto gen = top.section("generation");
    cfg.generation.pivot_language = gen.string("pivot_language");
    cfg.generation.forward_beam = gen.count("forward_beam");
    cfg.generation.backward_beam = gen.count("backward_beam");
    cfg.generation.max_variants_per_technique = gen.count("max_variants_per_technique");
    cfg.generation.summary_sentences = gen.count("summary_sentences");
    const auto& techniques = gen.require("techniques");
    if (!techniques.is_array()) throw ConfigError(gen.name("techniques"), "must be an array");
    cfg.generation.techniques.clear();
    for (const auto& t : techniques) {
      auto parsed = t.is_string() ? technique_from_string(t.get<std::string>()) : std::nullopt;
      if (!parsed || *parsed == Technique::kExternal)
        throw ConfigError(gen.name("techniques"),
                          "entries must be BT, NP_VP_BT, WORDNET or PPDB");
      cfg.generation.techniques.insert(*parsed);
    }

    auto sel = top.section("selection");
    cfg.selection.low_threshold = sel.number("low_threshold");
    cfg.selection.dup_threshold = sel.number("dup_threshold");
    cfg.selection.k = sel.count("k");
    auto mode = sel.string("filter_mode");
    if (mode == "ENCODER") {
      cfg.selection.filter_mode = FilterMode::kEncoder;
    } else if (mode == "DETECTOR") {
      cfg.selection.filter_mode = FilterMode::kDetector;
    } else {
      throw ConfigError(sel.name("filter_mode"), "must be \"ENCODER\" or \"DETECTOR\"");
    }
    cfg.selection.detector_threshold = sel.number("detector_threshold");
    cfg.selection.allow_zero_novelty = sel.boolean("allow_zero_novelty");

    auto be = top.section("backends");
    cfg.encoder = detail::read_backend(be, "encoder");
    cfg.translator = detail::read_backend(be, "translator");
    cfg.detector = detail::read_backend(be, "detector");
    cfg.fluency = detail::read_backend(be, "fluency");
    cfg.chunker = detail::read_backend(be, "chunker");

    auto lex = top.section("lexicons");
    cfg.lexicons.stopwords = lex.string("stopwords");
    cfg.lexicons.closed_class = lex.string("closed_class");
    cfg.lexicons.min_word_length = lex.count("min_word_length");
    cfg.lexicons.synonyms = lex.string("synonyms");
    cfg.lexicons.ppdb = lex.string("ppdb");
    cfg.lexicons.ppdb_min_score = lex.number("ppdb_min_score");
    if (cfg.lexicons.min_word_length == 0)
      throw ConfigError(lex.name("min_word_length"), "must be positive");

    try {
      cfg.generation.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("generation." + e.key(), e.message());
    }
    try {
      cfg.selection.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("selection." + e.key(), e.message());
    }
    return cfg;
  } catch (const ConfigError& e) {
    if (!e.key().empty() && e.key().front() == '.') throw ConfigError(strip(e.key()), e.message());
    throw;
  }
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(root, std::filesystem::path(path).parent_path());
}

namespace detail {

inline std::string resolve(const PipelineConfig& cfg, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || cfg.base_dir.empty()) return p.string();
  return (cfg.base_dir / p).string();
}

inline std::string setting(const BackendSpec& spec, const std::string& key,
                           const std::string& section) {
  if (!spec.settings.contains(key) || !spec.settings[key].is_string())
    throw ConfigError("backends." + section + "." + key, "missing required key");
  return spec.settings[key].get<std::string>();
}

}  // namespace detail

/// Loads the lexical resources named by the config. File errors surface as
/// ConfigError naming the key.
inline Lexicons load_lexicons(const PipelineConfig& cfg) {
  Lexicons lex;
  auto guarded = [&](const char* key, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError& e) {
      throw ConfigError(std::string("lexicons.") + key, e.what());
    }
  };
  lex.closed_class = guarded("stopwords", [&] {
    return std::make_shared<const ClosedClassLexicon>(
        load_closed_class(detail::resolve(cfg, cfg.lexicons.stopwords),
                          detail::resolve(cfg, cfg.lexicons.closed_class),
                          cfg.lexicons.min_word_length));
  });
  lex.synonyms = guarded("synonyms", [&] {
    return std::make_shared<const SynonymLexicon>(
        load_synonyms(detail::resolve(cfg, cfg.lexicons.synonyms)));
  });
  lex.ppdb = guarded("ppdb", [&] {
    return std::make_shared<const PpdbTable>(
        load_ppdb(detail::resolve(cfg, cfg.lexicons.ppdb), cfg.lexicons.ppdb_min_score).table);
  });
  return lex;
}

/// Instantiates each backend slot from its spec: remote client or the
/// reference implementation.
inline BackendSuite build_backends(const PipelineConfig& cfg, const Lexicons& lex) {
  BackendSuite suite;
  auto file_setting = [&](const BackendSpec& spec, const char* section, const char* key) {
    return detail::resolve(cfg, detail::setting(spec, key, section));
  };
  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError& e) {
      throw ConfigError(key, e.what());
    }
  };

  if (cfg.encoder.remote) {
    suite.encoder = std::make_shared<RemoteEncoder>(RemoteClient(cfg.encoder.remote_options));
  } else {
    std::size_t dim = 256;
    if (cfg.encoder.settings.contains("dimension")) {
      const auto& d = cfg.encoder.settings["dimension"];
      if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
        throw ConfigError("backends.encoder.dimension", "must be a positive integer");
      dim = d.get<std::size_t>();
    }
    suite.encoder = std::make_shared<HashingEncoder>(lex.closed_class, dim);
  }

  if (cfg.translator.remote) {
    suite.translator =
        std::make_shared<RemoteTranslator>(RemoteClient(cfg.translator.remote_options));
  } else {
    auto path = file_setting(cfg.translator, "translator", "tables");
    suite.translator = guarded("backends.translator.tables", [&] {
      return std::make_shared<TableTranslator>(load_translation_tables(path));
    });
  }

  if (cfg.detector.remote) {
    suite.detector = std::make_shared<RemoteDetector>(RemoteClient(cfg.detector.remote_options));
  } else {
    suite.detector = std::make_shared<JaccardDetector>(lex.closed_class);
  }

  if (cfg.fluency.remote) {
    suite.fluency = std::make_shared<RemoteFluency>(RemoteClient(cfg.fluency.remote_options));
  } else {
    auto path = file_setting(cfg.fluency, "fluency", "frequencies");
    suite.fluency = guarded("backends.fluency.frequencies", [&] {
      return std::make_shared<UnigramFluency>(load_frequencies(path));
    });
  }

  if (cfg.chunker.remote) {
    suite.chunker = std::make_shared<RemoteChunker>(RemoteClient(cfg.chunker.remote_options));
  } else {
    auto det_path = file_setting(cfg.chunker, "chunker", "determiners");
    auto verb_path = file_setting(cfg.chunker, "chunker", "verbs");
    suite.chunker = guarded("backends.chunker", [&] {
      auto dets = load_word_list(det_path);
      auto verbs = load_word_list(verb_path);
      return std::make_shared<RuleChunker>(
          lex.closed_class, std::unordered_set<std::string>(dets.begin(), dets.end()),
          std::unordered_set<std::string>(verbs.begin(), verbs.end()));
    });
  }
  return suite;
}

}  // namespace uttergen
