#pragma once

// JSON Lines readers for articles, annotations, references and pipeline
// outputs.

#include <fstream>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "uttergen/core.hpp"
#include "uttergen/evaluate.hpp"
#include "uttergen/text.hpp"

namespace uttergen {

namespace detail {

/// Calls `fn(json, lineno)` for every non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", lineno);
    fn(j, lineno);
  }
}

inline std::string string_field(const nlohmann::json& j, const char* key, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ParseError(std::string("missing string field '") + key + "'", lineno);
  return it->get<std::string>();
}

template <typename Reader>
auto read_file(const std::string& path, Reader&& reader) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return reader(in);
}

}  // namespace detail

/// One article per line: {"id","title","description"}. Ids must be unique
/// and titles non-blank; a missing description reads as empty.
inline std::vector<Article> read_articles(std::istream& in) {
  std::vector<Article> out;
  std::set<std::string> ids;
  detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t lineno) {
    Article a;
    a.id = detail::string_field(j, "id", lineno);
    a.title = detail::string_field(j, "title", lineno);
    if (j.contains("description") && !j["description"].is_null())
      a.description = detail::string_field(j, "description", lineno);
    if (a.id.empty()) throw ParseError("empty article id", lineno);
    if (trim(a.title).empty()) throw ParseError("blank title for article " + a.id, lineno);
    if (!ids.insert(a.id).second) throw ParseError("duplicate article id " + a.id, lineno);
    out.push_back(std::move(a));
  });
  return out;
}

inline std::vector<Article> load_articles(const std::string& path) {
  return detail::read_file(path, [](std::istream& in) { return read_articles(in); });
}

/// {"input_id","paraphrase","label"} per line.
inline std::vector<AnnotationRecord> read_annotations(std::istream& in) {
  std::vector<AnnotationRecord> out;
  detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t lineno) {
    AnnotationRecord r;
    r.input_id = detail::string_field(j, "input_id", lineno);
    r.paraphrase = detail::string_field(j, "paraphrase", lineno);
    auto it = j.find("label");
    if (it == j.end() || !it->is_number_integer())
      throw ParseError("missing integer field 'label'", lineno);
    auto label = it->get<long long>();
    if (label != 0 && label != 1) throw ParseError("label must be 0 or 1", lineno);
    r.label = static_cast<int>(label);
    out.push_back(std::move(r));
  });
  return out;
}

/// {"input_id","references":[...]} per line; repeated ids are merged.
inline TextsById read_references(std::istream& in) {
  TextsById out;
  detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t lineno) {
    auto id = detail::string_field(j, "input_id", lineno);
    auto it = j.find("references");
    if (it == j.end() || !it->is_array())
      throw ParseError("missing array field 'references'", lineno);
    auto& refs = out[id];
    for (const auto& r : *it) {
      if (!r.is_string()) throw ParseError("references must be strings", lineno);
      refs.push_back(r.get<std::string>());
    }
    if (refs.empty()) throw ParseError("input " + id + " has no references", lineno);
  });
  return out;
}

/// Generated utterances grouped by input. Each line carries the input under
/// "input_id" (falling back to "article_id") and the text under "utterance"
/// (falling back to "paraphrase"), so both pipeline output and annotation
/// files can be scored.
inline TextsById read_outputs(std::istream& in) {
  TextsById out;
  detail::for_each_json_line(in, [&](const nlohmann::json& j, std::size_t lineno) {
    auto id = detail::string_field(j, j.contains("input_id") ? "input_id" : "article_id", lineno);
    auto text = detail::string_field(j, j.contains("utterance") ? "utterance" : "paraphrase",
                                     lineno);
    out[id].push_back(std::move(text));
  });
  return out;
}

}  // namespace uttergen
