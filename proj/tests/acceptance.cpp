// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Every check compares against an independent oracle or a value
// computed by hand.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/bleu_cases.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/ppdb25.hpp"
#include "support/random_pools.hpp"
#include "uttergen/cli.hpp"

namespace uttergen {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only; later checks still run.
  void check(bool ok, const std::string& what) {
    if (ok || !pass) return;
    pass = false;
    detail = what;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> texts(const std::vector<ScoredCandidate>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.text());
  return out;
}

Outcome filtering() {
  Outcome o;
  auto ref = testing::default_resources().backends.encoder;
  SelectionConfig cfg;
  std::mt19937_64 rng(20240601);
  std::size_t survivors = 0, candidates = 0;
  auto start = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = trial % 2 ? testing::random_vector_pool(rng, 30)
                       : testing::random_word_pool(rng, 30, ref);
    candidates += p.candidates.size();
    auto got = filter_encoder(p.candidates, p.input, *p.encoder, cfg);
    auto in = oracle::vec(*p.encoder, p.input.text);
    for (const auto& c : got) {
      double sim = oracle::cosine(oracle::vec(*p.encoder, c.text()), in);
      o.check(sim >= 0.5 && sim <= 0.95,
              "trial " + std::to_string(trial) + ": survivor '" + c.text() + "' has similarity " +
                  std::to_string(sim));
    }
    auto want = oracle::filter_encoder(p.candidates, p.input, *p.encoder, 0.5, 0.95);
    o.check(texts(got) == texts(want),
            "trial " + std::to_string(trial) + ": survivors differ from the oracle");
    survivors += got.size();
  }
  double secs = seconds_since(start);
  o.check(secs < 5.0, "took " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "1000 pools, " + std::to_string(survivors) + "/" + std::to_string(candidates) +
               " survivors, 0 violations, " + std::to_string(secs) + " s";
  return o;
}

Outcome embedding_dedup() {
  Outcome o;
  auto ref = testing::default_resources().backends.encoder;
  SelectionConfig cfg;
  std::mt19937_64 rng(7001);
  std::size_t kept = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto p = trial % 2 ? testing::random_vector_pool(rng, 10)
                       : testing::random_word_pool(rng, 10, ref);
    auto pool = testing::annotated(p);
    if (!pool.empty()) oracle::tiebreak(pool, *p.fluency);
    auto got = dedup_embedding(pool, p.input, *p.encoder, cfg);
    auto want = oracle::dedup_embedding_exhaustive(pool, *p.encoder, cfg.dup_threshold);
    o.check(texts(got) == texts(want),
            "trial " + std::to_string(trial) + ": differs from the exhaustive oracle");
    for (std::size_t i = 0; i < got.size(); ++i) {
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        double c = oracle::cosine(oracle::vec(*p.encoder, got[i].text()),
                                  oracle::vec(*p.encoder, got[j].text()));
        o.check(!(c > 0.95), "trial " + std::to_string(trial) + ": kept pair at cosine " +
                                 std::to_string(c));
      }
    }
    kept += got.size();
  }
  if (o.pass)
    o.detail = "500 pools equal the exhaustive oracle, " + std::to_string(kept) +
               " kept, no pair above 0.95";
  return o;
}

Outcome word_dedup() {
  Outcome o;
  auto lex = testing::shipped_closed_class();
  auto ref = testing::default_resources().backends.encoder;
  std::mt19937_64 rng(8002);
  std::size_t kept = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto p = trial % 4 == 3 ? testing::random_vector_pool(rng, 8)
                            : testing::random_word_pool(rng, 8, ref);
    auto pool = testing::annotated(p);
    // Few distinct tiebreak values so ties reach the text-order rule.
    for (auto& c : pool) c.tiebreak = 0.25 * static_cast<double>(testing::uniform(rng, 0, 2));
    SelectionConfig cfg;
    cfg.k = testing::uniform(rng, 1, 8);
    cfg.allow_zero_novelty = testing::uniform(rng, 0, 1) == 1;
    auto got = dedup_words(pool, p.input, *lex, cfg);
    auto want = oracle::dedup_words(pool, p.input, *lex, cfg.k, cfg.allow_zero_novelty);
    o.check(texts(got) == texts(want),
            "trial " + std::to_string(trial) + ": differs from the step-replay oracle");
    o.check(got.size() <= cfg.k, "trial " + std::to_string(trial) + ": more than k selected");
    kept += got.size();
  }
  if (o.pass)
    o.detail = "500 pools equal the step-replay oracle, " + std::to_string(kept) +
               " selected, all within k";
  return o;
}

// Each technique run alone, with the same configuration, must produce
// nothing the combined pool lacks.
Outcome ensemble_superset() {
  Outcome o;
  auto res = testing::default_resources();
  auto articles = load_articles(testing::source_path("tests/fixtures/articles10.jsonl"));
  std::size_t sentences = 0, checked = 0;
  for (const auto& a : articles) {
    std::vector<SourceSentence> ss{{a.id, a.title, Origin::kTitle, 0}};
    auto extracted = select_sentences(a.id, a.description, res.generation.summary_sentences,
                                      *res.backends.encoder);
    ss.insert(ss.end(), extracted.begin(), extracted.end());
    for (const auto& s : ss) {
      ++sentences;
      std::set<std::string> pool;
      for (const auto& c : generate_pool(s, res.backends, res.lexicons, res.generation).candidates)
        pool.insert(fold(c.text));
      for (auto t : res.generation.techniques) {
        auto single = res.generation;
        single.techniques = {t};
        for (const auto& c : generate_pool(s, res.backends, res.lexicons, single).candidates) {
          ++checked;
          o.check(pool.count(fold(c.text)) == 1,
                  a.id + " '" + s.text + "': " + std::string(to_string(t)) + " produced '" +
                      c.text + "' missing from the pool");
        }
      }
    }
  }
  o.check(checked > 0, "no candidates were generated");
  if (o.pass)
    o.detail = std::to_string(articles.size()) + " articles, " + std::to_string(sentences) +
               " sentences, " + std::to_string(checked) + " single-technique candidates covered";
  return o;
}

Outcome bleu_checks() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& c : testing::bleu_cases()) {
    for (const auto& s : c.references) {
      o.check(bleu(s, {s}) == 1.0, "bleu(s, [s]) != 1 for '" + s + "'");
      ++n;
    }
    double got = bleu(c.candidate, c.references, c.max_n);
    double want = oracle::bleu(c.candidate, c.references, c.max_n);
    o.check(std::abs(got - want) <= 1e-9, "'" + c.candidate + "': " + std::to_string(got) +
                                              " vs oracle " + std::to_string(want));
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> disjoint = {
      {"pay my bill", {"reset your password"}},
      {"one two three", {"four five", "six"}},
      {"Hello!", {"goodbye ."}},
  };
  for (const auto& [cand, refs] : disjoint)
    o.check(bleu(cand, refs) == 0.0, "disjoint '" + cand + "' scored nonzero");
  o.check(std::abs(bleu("the cat sat", {"the cat sat down"}) - std::exp(-1.0 / 3.0)) <= 1e-12,
          "brevity-penalty example");
  if (o.pass)
    o.detail = std::to_string(n) + " identities exact, " + std::to_string(disjoint.size()) +
               " disjoint exact, " + std::to_string(testing::bleu_cases().size()) +
               " cases within 1e-9";
  return o;
}

Outcome ppdb_parser() {
  Outcome o;
  auto r = load_ppdb(testing::source_path("tests/fixtures/ppdb25.txt"), 3.0);
  testing::Ppdb25Counts want;
  o.check(r.rows == want.rows && r.missing_score == want.missing_score &&
              r.not_equivalence == want.not_equivalence &&
              r.below_min_score == want.below_min_score && r.kept == want.kept,
          "row counts differ");
  o.check(r.table.entries() == testing::ppdb25_entries(), "table entries differ");
  o.check(r.table.max_phrase_length() == want.max_phrase_length, "max phrase length differs");

  auto error_line = [](const std::function<void()>& fn) -> std::size_t {
    try {
      fn();
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  auto file_line = error_line(
      [] { load_ppdb(testing::source_path("tests/fixtures/ppdb-malformed.txt"), 3.0); });
  o.check(file_line == 4, "malformed fixture reported line " + std::to_string(file_line));
  for (const auto& [text, line] : testing::ppdb_malformed_cases()) {
    auto got = error_line([&] {
      std::istringstream in(text);
      read_ppdb(in, 3.0);
    });
    o.check(got == line, "expected an error on line " + std::to_string(line) + ", got " +
                             std::to_string(got));
  }
  if (o.pass)
    o.detail = "25-row fixture matches the pinned table; " +
               std::to_string(testing::ppdb_malformed_cases().size() + 1) +
               " malformed inputs report the right line";
  return o;
}

Outcome pipeline_determinism() {
  Outcome o;
  auto dir = fs::temp_directory_path() / ("uttergen-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  std::ostringstream err;
  auto start = Clock::now();
  for (std::size_t workers : {1, 1, 4, 4}) {
    cli::PipelineArgs args;
    args.input = testing::source_path("tests/fixtures/articles10.jsonl");
    args.config = testing::source_path("config/default.json");
    args.output = (dir / ("out" + std::to_string(outputs.size()) + ".jsonl")).string();
    args.report = (dir / "report.json").string();
    args.workers = workers;
    int code = cli::cmd_pipeline(args, err);
    o.check(code == 0, "pipeline exited " + std::to_string(code) + ": " + err.str());
    outputs.push_back(testing::read_text(args.output));
  }
  double secs = seconds_since(start);
  fs::remove_all(dir);
  for (std::size_t i = 1; i < outputs.size(); ++i)
    o.check(outputs[i] == outputs[0], "run " + std::to_string(i) + " differs from run 0");
  o.check(!outputs[0].empty(), "pipeline produced no utterances");
  o.check(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (o.pass)
    o.detail = "4 runs (workers 1,1,4,4) byte-identical, " + std::to_string(outputs[0].size()) +
               " bytes, " + std::to_string(secs) + " s";
  return o;
}

Outcome usefulness() {
  Outcome o;
  struct Case {
    std::vector<AnnotationRecord> records;
    double fraction, number;
  };
  const std::vector<Case> cases = {
      {{{"a", "p1", 1}, {"a", "p2", 0}}, 0.5, 1.0},
      {{{"a", "p1", 1}, {"a", "p2", 1}, {"b", "p1", 0}, {"b", "p2", 0}}, 0.5, 1.0},
      {{{"a", "p1", 1}, {"b", "q", 1}, {"a", "p2", 0}, {"a", "p3", 1}}, (2.0 / 3.0 + 1.0) / 2.0,
       1.5},
      {{{"a", "1", 1}, {"a", "2", 1}, {"a", "3", 1}, {"b", "1", 1}, {"c", "1", 1}, {"c", "2", 1}},
       1.0,
       2.0},
      {{{"a", "x", 0}}, 0.0, 0.0},
      {{{"a", "x", 1}, {"a", "y", 0}, {"a", "z", 0}, {"a", "w", 0}, {"b", "x", 1}, {"b", "y", 0}},
       (0.25 + 0.5) / 2.0,
       1.0},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto m = usefulness_metrics(cases[i].records);
    o.check(std::abs(m.avg_fraction - cases[i].fraction) <= 1e-12 &&
                std::abs(m.avg_number - cases[i].number) <= 1e-12,
            "case " + std::to_string(i) + ": got (" + std::to_string(m.avg_fraction) + ", " +
                std::to_string(m.avg_number) + ")");
  }
  if (o.pass) o.detail = std::to_string(cases.size()) + " annotation sets within 1e-12";
  return o;
}

}  // namespace
}  // namespace uttergen

int main() {
  using namespace uttergen;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"filter-thresholds", filtering},
      {"embedding-dedup", embedding_dedup},
      {"word-novelty-dedup", word_dedup},
      {"ensemble-superset", ensemble_superset},
      {"bleu", bleu_checks},
      {"ppdb-parser", ppdb_parser},
      {"pipeline-determinism", pipeline_determinism},
      {"usefulness-metrics", usefulness},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
