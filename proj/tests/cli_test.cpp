#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support/fixtures.hpp"
#include "support/mock_sidecar.hpp"
#include "uttergen/cli.hpp"

namespace uttergen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::read_text;
using testing::source_path;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uttergen-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  /// The default config with absolute resource paths, after `edit`.
  template <typename Edit>
  std::string config(Edit edit) const {
    auto j = json::parse(read_text(source_path("config/default.json")));
    auto absolute = [](json& v) {
      v = (fs::path(source_path("config")) / v.get<std::string>()).lexically_normal().string();
    };
    for (const char* k : {"stopwords", "closed_class", "synonyms", "ppdb"}) absolute(j["lexicons"][k]);
    absolute(j["backends"]["translator"]["tables"]);
    absolute(j["backends"]["fluency"]["frequencies"]);
    absolute(j["backends"]["chunker"]["determiners"]);
    absolute(j["backends"]["chunker"]["verbs"]);
    edit(j);
    return write("config.json", j.dump(2));
  }
  std::string config() const {
    return config([](json&) {});
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const std::string kArticles = source_path("tests/fixtures/articles2.jsonl");
const std::string kDefaultConfig = source_path("config/default.json");

TEST_F(Cli, PipelineMatchesGolden) {
  ASSERT_EQ(run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--config",
                 kDefaultConfig, "--report", path("report.json"), "--workers", "1"}),
            0)
      << err_.str();
  EXPECT_EQ(read_text(path("out.jsonl")),
            read_text(source_path("tests/golden/articles2_utterances.jsonl")));

  auto report = json::parse(read_text(path("report.json")));
  EXPECT_EQ(report["articles"], 2);
  EXPECT_EQ(report["sentences_failed"], 0);
  EXPECT_EQ(report["selected"], 24);
}

TEST_F(Cli, PipelineOutputRecordsAreWellFormed) {
  ASSERT_EQ(run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--config",
                 kDefaultConfig, "--report", path("report.json")}),
            0);
  std::istringstream in(read_text(path("out.jsonl")));
  std::string line;
  std::map<std::string, int> per_sentence;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    double sim = j["encoder_similarity"];
    EXPECT_GE(sim, 0.5);
    EXPECT_LE(sim, 0.95);
    EXPECT_NE(fold(j["utterance"].get<std::string>()),
              fold(j["source_sentence"].get<std::string>()));
    ++per_sentence[j["article_id"].get<std::string>() + "|" +
                   j["source_sentence"].get<std::string>()];
  }
  for (const auto& [key, n] : per_sentence) EXPECT_LE(n, 20) << key;
}

TEST_F(Cli, PipelineIsDeterministicAcrossWorkerCounts) {
  std::string first;
  for (const char* workers : {"1", "4", "2", "4"}) {
    ASSERT_EQ(run({"pipeline", "--input", source_path("tests/fixtures/articles10.jsonl"),
                   "--output", path("out.jsonl"), "--config", kDefaultConfig, "--report",
                   path("report.json"), "--workers", workers}),
              0);
    auto text = read_text(path("out.jsonl"));
    if (first.empty()) first = text;
    EXPECT_EQ(text, first) << "workers=" << workers;
  }
  EXPECT_FALSE(first.empty());
}

TEST_F(Cli, EmptyInputGivesEmptyOutput) {
  auto empty = write("empty.jsonl", "");
  ASSERT_EQ(run({"pipeline", "--input", empty, "--output", path("out.jsonl"), "--config",
                 kDefaultConfig, "--report", path("r.json")}),
            0)
      << err_.str();
  EXPECT_EQ(read_text(path("out.jsonl")), "");
  EXPECT_EQ(json::parse(read_text(path("r.json")))["articles"], 0);
}

TEST_F(Cli, ReportTechniqueCountsSumToPreDedupPool) {
  ASSERT_EQ(run({"pipeline", "--input", source_path("tests/fixtures/articles10.jsonl"),
                 "--output", path("out.jsonl"), "--config", kDefaultConfig, "--report",
                 path("r.json")}),
            0);
  auto report = json::parse(read_text(path("r.json")));
  std::size_t total = 0;
  for (const auto& s : report["per_sentence"]) {
    std::size_t sum = 0;
    for (const auto& [t, n] : s["techniques"].items()) sum += n.get<std::size_t>();
    EXPECT_EQ(sum, s["pre_dedup_pool"].get<std::size_t>()) << s.dump();
    total += sum;
  }
  EXPECT_EQ(total, report["pre_dedup_pool"].get<std::size_t>());
  std::size_t lines = 0;
  std::istringstream in(read_text(path("out.jsonl")));
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, report["selected"].get<std::size_t>());
}

TEST_F(Cli, PipelineReportGoesToStderrByDefault) {
  ASSERT_EQ(run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--config",
                 kDefaultConfig}),
            0);
  EXPECT_EQ(json::parse(err_.str())["articles"], 2);
}

TEST_F(Cli, ConfigFromEnvironment) {
  ::setenv(kConfigEnvVar, kDefaultConfig.c_str(), 1);
  int code = run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--report",
                  path("r.json")});
  ::unsetenv(kConfigEnvVar);
  EXPECT_EQ(code, 0) << err_.str();
  EXPECT_EQ(read_text(path("out.jsonl")),
            read_text(source_path("tests/golden/articles2_utterances.jsonl")));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  ::unsetenv(kConfigEnvVar);
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("o")}), 2);
  EXPECT_NE(err_.str().find(kConfigEnvVar), std::string::npos);

  auto bad = config([](json& j) { j["selection"]["dup_threshold"] = 1.5; });
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("o"), "--config", bad}), 2);
  EXPECT_NE(err_.str().find("selection.dup_threshold"), std::string::npos) << err_.str();

  auto crossed = config([](json& j) { j["selection"]["dup_threshold"] = 0.4; });
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("o"), "--config", crossed}),
            2);

  auto missing = config([](json& j) { j.erase("lexicons"); });
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("o"), "--config", missing}),
            2);
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("o"), "--config",
                 path("no-such-config.json")}),
            2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"pipeline", "--input", kArticles}), 2);
  EXPECT_EQ(run({"eval"}), 2);
  EXPECT_EQ(run({"eval", "bleu", "--outputs", "x", "--references", "y", "--max-n", "0"}), 2);
}

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("pipeline"), std::string::npos);
  EXPECT_EQ(run({"pipeline", "--help"}), 0);
  EXPECT_NE(out_.str().find("--workers"), std::string::npos);
}

TEST_F(Cli, UnreadableInputExitsThree) {
  EXPECT_EQ(run({"pipeline", "--input", path("missing.jsonl"), "--output", path("o"),
                 "--config", kDefaultConfig}),
            3);
  auto bad = write("bad.jsonl", "{\"id\":\"a\",\"title\":\"T\"}\n{\"id\":\"b\"}\n");
  EXPECT_EQ(run({"pipeline", "--input", bad, "--output", path("o"), "--config", kDefaultConfig}),
            3);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos) << err_.str();
}

TEST_F(Cli, UnreachableBackendsExitFour) {
  auto cfg = config([](json& j) {
    for (const char* b : {"encoder", "translator", "detector", "fluency", "chunker"})
      j["backends"][b] = {{"type", "remote"},
                          {"url", "http://127.0.0.1:1"},
                          {"timeout_ms", 200},
                          {"retries", 0}};
  });
  EXPECT_EQ(run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--config", cfg,
                 "--report", path("r.json")}),
            4)
      << err_.str();
  EXPECT_EQ(read_text(path("out.jsonl")), "");
  auto report = json::parse(read_text(path("r.json")));
  EXPECT_EQ(report["selected"], 0);
  EXPECT_FALSE(report["backend_failures"].empty());
}

TEST_F(Cli, RemoteBackendsReproduceReferenceOutput) {
  testing::MockSidecar sidecar(testing::default_resources().backends);
  auto cfg = config([&](json& j) {
    for (const char* b : {"encoder", "translator", "detector", "fluency", "chunker"})
      j["backends"][b] = {{"type", "remote"},
                          {"url", sidecar.url()},
                          {"timeout_ms", 5000},
                          {"retries", 1},
                          {"backoff_ms", 1}};
  });
  ASSERT_EQ(run({"pipeline", "--input", kArticles, "--output", path("out.jsonl"), "--config", cfg,
                 "--report", path("r.json"), "--workers", "2"}),
            0)
      << err_.str();
  EXPECT_EQ(read_text(path("out.jsonl")),
            read_text(source_path("tests/golden/articles2_utterances.jsonl")));
  EXPECT_GT(sidecar.requests(), 0);
}

TEST_F(Cli, EvalBleu) {
  auto outs = write("outs.jsonl",
                    "{\"article_id\":\"a\",\"utterance\":\"pay my bill\"}\n"
                    "{\"article_id\":\"b\",\"utterance\":\"x\"}\n");
  auto refs = write("refs.jsonl",
                    "{\"input_id\":\"a\",\"references\":[\"pay my bill\"]}\n"
                    "{\"input_id\":\"b\",\"references\":[\"x y\"]}\n"
                    "{\"input_id\":\"c\",\"references\":[\"z\"]}\n");
  ASSERT_EQ(run({"eval", "bleu", "--outputs", outs, "--references", refs}), 0) << err_.str();
  auto j = json::parse(out_.str());
  EXPECT_NEAR(j["bleu"].get<double>(), (1.0 + std::exp(-1.0)) / 3.0, 1e-12);

  ASSERT_EQ(run({"eval", "bleu", "--outputs", outs, "--references", refs, "--max-n", "1"}), 0);
  EXPECT_NEAR(json::parse(out_.str())["bleu"].get<double>(), (1.0 + std::exp(-1.0)) / 3.0,
              1e-12);
}

TEST_F(Cli, EvalBleuIdMismatchExitsFive) {
  auto outs = write("outs.jsonl", "{\"article_id\":\"q\",\"utterance\":\"x\"}\n");
  auto refs = write("refs.jsonl", "{\"input_id\":\"a\",\"references\":[\"x\"]}\n");
  EXPECT_EQ(run({"eval", "bleu", "--outputs", outs, "--references", refs}), 5);
  EXPECT_NE(err_.str().find("q"), std::string::npos);
}

TEST_F(Cli, EvalBleuBadInputExitsThree) {
  auto outs = write("outs.jsonl", "{\"article_id\":\"a\",\"utterance\":\"x\"}\n");
  auto refs = write("refs.jsonl", "{\"input_id\":\"a\",\"references\":[]}\n");
  EXPECT_EQ(run({"eval", "bleu", "--outputs", outs, "--references", refs}), 3);
  EXPECT_EQ(run({"eval", "bleu", "--outputs", path("none"), "--references", refs}), 3);
}

TEST_F(Cli, EvalManual) {
  auto anns = write("anns.jsonl",
                    "{\"input_id\":\"a\",\"paraphrase\":\"p1\",\"label\":1}\n"
                    "{\"input_id\":\"a\",\"paraphrase\":\"p2\",\"label\":0}\n");
  ASSERT_EQ(run({"eval", "manual", "--annotations", anns}), 0) << err_.str();
  auto j = json::parse(out_.str());
  EXPECT_EQ(j["avg_fraction"].get<double>(), 0.5);
  EXPECT_EQ(j["avg_number"].get<double>(), 1.0);
}

TEST_F(Cli, EvalManualBadInputExitsThree) {
  auto dup = write("dup.jsonl",
                   "{\"input_id\":\"a\",\"paraphrase\":\"p\",\"label\":1}\n"
                   "{\"input_id\":\"a\",\"paraphrase\":\"p\",\"label\":1}\n");
  EXPECT_EQ(run({"eval", "manual", "--annotations", dup}), 3);
  auto empty = write("empty.jsonl", "\n");
  EXPECT_EQ(run({"eval", "manual", "--annotations", empty}), 3);
  auto bad = write("bad.jsonl", "{\"input_id\":\"a\",\"paraphrase\":\"p\",\"label\":3}\n");
  EXPECT_EQ(run({"eval", "manual", "--annotations", bad}), 3);
}

TEST_F(Cli, BinaryExitCodes) {
  auto sh = [&](const std::string& args) {
    std::string cmd = std::string("\"") + UTTERGEN_CLI_PATH + "\" " + args + " >" +
                      path("stdout") + " 2>" + path("stderr");
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(sh("pipeline --input " + kArticles + " --output " + path("out.jsonl") +
               " --config " + kDefaultConfig + " --report " + path("r.json")),
            0);
  EXPECT_EQ(read_text(path("out.jsonl")),
            read_text(source_path("tests/golden/articles2_utterances.jsonl")));
  EXPECT_EQ(sh("bogus"), 2);
  EXPECT_EQ(sh("pipeline --input " + path("nope") + " --output " + path("o") + " --config " +
               kDefaultConfig),
            3);
}

}  // namespace
}  // namespace uttergen
