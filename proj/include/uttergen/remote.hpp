#pragma once

// Clients for the model server's JSON-over-HTTP protocol:
//
//   POST /v1/embed     {"texts":[...]}                         -> {"dimension":D,"vectors":[[...]]}
//   POST /v1/translate {"texts":[...],"source","target","n"}   -> {"translations":[[...]]}
//   POST /v1/detect    {"pairs":[["a","b"],...]}               -> {"probabilities":[...]}
//   POST /v1/fluency   {"texts":[...]}                         -> {"losses":[...]}
//   POST /v1/chunk     {"text":"...","tokens":[...]}           -> {"phrases":[{"start","end","label"}]}
//
// Non-200 responses carry {"error": text}. Every request is idempotent, so
// transport failures and 5xx responses are retried with exponential backoff.

#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "uttergen/backends.hpp"

namespace uttergen {

struct RemoteOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::chrono::milliseconds timeout{10000};
  unsigned retries = 3;  // extra attempts after the first
  std::chrono::milliseconds backoff{100};
};

class RemoteClient {
 public:
  explicit RemoteClient(RemoteOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) throw ConfigError("url", "remote backend needs a base URL");
  }

  const RemoteOptions& options() const { return options_; }

  /// POSTs `body` to `path` and returns the parsed JSON response.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    const std::string payload = body.dump();
    std::string last_error;
    for (unsigned attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(options_.backoff * (1u << (attempt - 1)));

      // One client per request; httplib clients are not shared across threads.
      httplib::Client client(options_.base_url);
      client.set_connection_timeout(options_.timeout);
      client.set_read_timeout(options_.timeout);
      client.set_write_timeout(options_.timeout);
      auto res = client.Post(path, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          throw BackendError(path + ": malformed response: " + e.what());
        }
      }
      std::string message = "HTTP " + std::to_string(res->status);
      try {
        auto err = nlohmann::json::parse(res->body);
        if (err.is_object() && err.contains("error") && err["error"].is_string())
          message += ": " + err["error"].get<std::string>();
      } catch (const nlohmann::json::exception&) {
      }
      if (res->status < 500) throw BackendError(path + ": " + message);
      last_error = message;
    }
    throw BackendUnavailable(path + ": backend unavailable after " +
                             std::to_string(options_.retries + 1) + " attempt(s): " + last_error);
  }

 private:
  RemoteOptions options_;
};

namespace detail {

inline const nlohmann::json& require_array(const nlohmann::json& j, const char* key,
                                           std::size_t expected, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_array())
    throw BackendError(path + ": response lacks array '" + key + "'");
  if (j[key].size() != expected)
    throw BackendError(path + ": expected " + std::to_string(expected) + " item(s) in '" + key +
                       "', got " + std::to_string(j[key].size()));
  return j[key];
}

inline double require_finite(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw BackendError(path + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw BackendError(path + ": non-finite number");
  return d;
}

}  // namespace detail

class RemoteEncoder final : public Encoder {
 public:
  explicit RemoteEncoder(RemoteClient client) : client_(std::move(client)) {}

  std::vector<Embedding> embed(std::span<const std::string> texts) const override {
    static const std::string kPath = "/v1/embed";
    auto res = client_.post(kPath, {{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
    const auto& vectors = detail::require_array(res, "vectors", texts.size(), kPath);
    if (!res.contains("dimension") || !res["dimension"].is_number_unsigned())
      throw BackendError(kPath + ": response lacks 'dimension'");
    auto dim = res["dimension"].get<std::size_t>();
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& v : vectors) {
      if (!v.is_array() || v.size() != dim)
        throw BackendError(kPath + ": vector length differs from dimension");
      Embedding e;
      e.values.reserve(dim);
      for (const auto& x : v) e.values.push_back(detail::require_finite(x, kPath));
      out.push_back(std::move(e));
    }
    return out;
  }

 private:
  RemoteClient client_;
};

class RemoteTranslator final : public Translator {
 public:
  explicit RemoteTranslator(RemoteClient client) : client_(std::move(client)) {}

  std::vector<std::vector<std::string>> translate(std::span<const std::string> texts,
                                                  std::string_view source,
                                                  std::string_view target,
                                                  std::size_t n) const override {
    static const std::string kPath = "/v1/translate";
    if (n == 0) throw ContractViolation("translate: n must be >= 1");
    nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())},
                           {"source", source},
                           {"target", target},
                           {"n", n}};
    auto res = client_.post(kPath, body);
    const auto& all = detail::require_array(res, "translations", texts.size(), kPath);
    std::vector<std::vector<std::string>> out;
    for (const auto& list : all) {
      if (!list.is_array()) throw BackendError(kPath + ": translations must be arrays");
      std::vector<std::string> variants;
      for (const auto& t : list) {
        if (!t.is_string()) throw BackendError(kPath + ": translation must be a string");
        auto s = t.get<std::string>();
        if (variants.size() < n && std::find(variants.begin(), variants.end(), s) == variants.end())
          variants.push_back(std::move(s));
      }
      out.push_back(std::move(variants));
    }
    return out;
  }

 private:
  RemoteClient client_;
};

class RemoteDetector final : public Detector {
 public:
  explicit RemoteDetector(RemoteClient client) : client_(std::move(client)) {}

  std::vector<double> probabilities(std::span<const TextPair> pairs) const override {
    static const std::string kPath = "/v1/detect";
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [a, b] : pairs) list.push_back({a, b});
    auto res = client_.post(kPath, {{"pairs", list}});
    const auto& probs = detail::require_array(res, "probabilities", pairs.size(), kPath);
    std::vector<double> out;
    for (const auto& p : probs) {
      double v = detail::require_finite(p, kPath);
      if (v < 0.0 || v > 1.0) throw BackendError(kPath + ": probability outside [0, 1]");
      out.push_back(v);
    }
    return out;
  }

 private:
  RemoteClient client_;
};

class RemoteFluency final : public FluencyScorer {
 public:
  explicit RemoteFluency(RemoteClient client) : client_(std::move(client)) {}

  std::vector<double> losses(std::span<const std::string> texts) const override {
    static const std::string kPath = "/v1/fluency";
    auto res =
        client_.post(kPath, {{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
    const auto& losses = detail::require_array(res, "losses", texts.size(), kPath);
    std::vector<double> out;
    for (const auto& l : losses) {
      double v = detail::require_finite(l, kPath);
      if (v < 0.0) throw BackendError(kPath + ": negative loss");
      out.push_back(v);
    }
    return out;
  }

 private:
  RemoteClient client_;
};

class RemoteChunker final : public Chunker {
 public:
  explicit RemoteChunker(RemoteClient client) : client_(std::move(client)) {}

  std::vector<PhraseSpan> phrases(const std::string& text,
                                  const std::vector<std::string>& tokens) const override {
    static const std::string kPath = "/v1/chunk";
    auto res = client_.post(kPath, {{"text", text}, {"tokens", tokens}});
    if (!res.is_object() || !res.contains("phrases") || !res["phrases"].is_array())
      throw BackendError(kPath + ": response lacks array 'phrases'");
    std::vector<PhraseSpan> out;
    for (const auto& p : res["phrases"]) {
      if (!p.is_object() || !p.contains("start") || !p.contains("end") || !p.contains("label") ||
          !p["start"].is_number_unsigned() || !p["end"].is_number_unsigned() ||
          !p["label"].is_string())
        throw BackendError(kPath + ": malformed phrase");
      PhraseSpan span{p["start"].get<std::size_t>(), p["end"].get<std::size_t>(),
                      PhraseLabel::kNp};
      auto label = p["label"].get<std::string>();
      if (label == "VP") {
        span.label = PhraseLabel::kVp;
      } else if (label != "NP") {
        throw BackendError(kPath + ": unknown phrase label '" + label + "'");
      }
      if (!(span.start < span.end && span.end <= tokens.size()))
        throw BackendError(kPath + ": phrase span out of bounds");
      out.push_back(span);
    }
    return out;
  }

 private:
  RemoteClient client_;
};

}  // namespace uttergen
