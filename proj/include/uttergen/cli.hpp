#pragma once

// Command-line front end.
//
//   uttergen pipeline --input <jsonl> --output <jsonl> --config <json>
//                     [--report <path>] [--workers N]
//   uttergen eval bleu --outputs <jsonl> --references <jsonl> [--max-n N]
//   uttergen eval manual --annotations <jsonl>
//
// Exit codes: 0 success, 2 configuration/usage error, 3 unreadable input,
// 4 every sentence failed on an unreachable backend, 5 input-id mismatch
// between outputs and references, 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uttergen/config.hpp"
#include "uttergen/evaluate.hpp"
#include "uttergen/io.hpp"
#include "uttergen/pipeline.hpp"

namespace uttergen::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kInputError = 3,
  kBackendUnavailable = 4,
  kIdMismatch = 5,
};

struct PipelineArgs {
  std::string input, output, config, report;
  std::size_t workers = 0;
};

inline int cmd_pipeline(const PipelineArgs& args, std::ostream& err) {
  std::string config_path = args.config;
  if (config_path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
  }
  if (config_path.empty()) {
    err << "error: no config given (use --config or " << kConfigEnvVar << ")\n";
    return kConfigError;
  }

  PipelineResources res;
  try {
    auto cfg = load_config(config_path);
    res.lexicons = load_lexicons(cfg);
    res.backends = build_backends(cfg, res.lexicons);
    res.generation = cfg.generation;
    res.selection = cfg.selection;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  std::vector<Article> articles;
  try {
    articles = load_articles(args.input);
  } catch (const ParseError& e) {
    err << "input error: " << args.input << ": " << e.what() << '\n';
    return kInputError;
  }

  auto result = run_pipeline(articles, res, args.workers);

  std::ofstream out(args.output, std::ios::binary | std::ios::trunc);
  if (!out) {
    err << "error: cannot write " << args.output << '\n';
    return kFailure;
  }
  write_utterances(out, result);
  out.close();

  auto report = run_report(result).dump(2);
  if (args.report.empty()) {
    err << report << '\n';
  } else {
    std::ofstream rep(args.report, std::ios::binary | std::ios::trunc);
    if (!rep) {
      err << "error: cannot write " << args.report << '\n';
      return kFailure;
    }
    rep << report << '\n';
  }

  if (result.backends_unavailable()) {
    err << "error: every sentence failed because a backend was unavailable\n";
    return kBackendUnavailable;
  }
  return kOk;
}

inline int cmd_eval_bleu(const std::string& outputs_path, const std::string& references_path,
                         std::size_t max_n, std::ostream& out, std::ostream& err) {
  TextsById outputs, references;
  try {
    outputs = detail::read_file(outputs_path, [](std::istream& in) { return read_outputs(in); });
    references =
        detail::read_file(references_path, [](std::istream& in) { return read_references(in); });
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
  try {
    nlohmann::ordered_json j;
    j["bleu"] = corpus_bleu(outputs, references, max_n);
    out << j.dump() << '\n';
  } catch (const IdMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kIdMismatch;
  }
  return kOk;
}

inline int cmd_eval_manual(const std::string& annotations_path, std::ostream& out,
                           std::ostream& err) {
  std::vector<AnnotationRecord> annotations;
  try {
    annotations = detail::read_file(annotations_path,
                                    [](std::istream& in) { return read_annotations(in); });
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
  if (annotations.empty()) {
    err << "input error: " << annotations_path << " has no annotations\n";
    return kInputError;
  }
  try {
    auto m = usefulness_metrics(annotations);
    nlohmann::ordered_json j;
    j["avg_fraction"] = m.avg_fraction;
    j["avg_number"] = m.avg_number;
    out << j.dump() << '\n';
  } catch (const ContractViolation& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

/// Parses `args` (without the program name) and runs the chosen command.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Utterance generation and evaluation", "uttergen"};
  app.require_subcommand(1);

  PipelineArgs pipeline;
  auto* pipe = app.add_subcommand("pipeline", "Generate and select utterances for articles");
  pipe->add_option("--input", pipeline.input, "Articles (JSON Lines)")->required();
  pipe->add_option("--output", pipeline.output, "Selected utterances (JSON Lines)")->required();
  pipe->add_option("--config", pipeline.config,
                   std::string("Config file (default: $") + kConfigEnvVar + ")");
  pipe->add_option("--report", pipeline.report, "Run report path (default: stderr)");
  pipe->add_option("--workers", pipeline.workers, "Worker threads (0 = all cores)");

  auto* eval = app.add_subcommand("eval", "Evaluate utterance sets");
  eval->require_subcommand(1);
  std::string outputs, references, annotations;
  std::size_t max_n = 4;
  auto* bleu_cmd = eval->add_subcommand("bleu", "Average sentence BLEU per input");
  bleu_cmd->add_option("--outputs", outputs, "Generated utterances (JSON Lines)")->required();
  bleu_cmd->add_option("--references", references, "References (JSON Lines)")->required();
  bleu_cmd->add_option("--max-n", max_n, "Highest n-gram order")->check(CLI::PositiveNumber);
  auto* manual = eval->add_subcommand("manual", "Usefulness metrics from annotations");
  manual->add_option("--annotations", annotations, "Annotations (JSON Lines)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*pipe) return cmd_pipeline(pipeline, err);
    if (*bleu_cmd) return cmd_eval_bleu(outputs, references, max_n, out, err);
    if (*manual) return cmd_eval_manual(annotations, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace uttergen::cli
