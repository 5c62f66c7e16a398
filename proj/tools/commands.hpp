#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace ctrlsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Each command echoes the resolved config to <out>/config.json first.

/// Writes train/valid/test .jsonl splits, vocab.json, and bins.json (the
/// length-bin table built on the training split) under config.out.
void gen_corpus(const RunConfig& config, std::ostream& log);

/// ml: pretrains from a fresh or supplied checkpoint, writes ml_trace.csv.
/// cmdp/mdp: fine-tunes (supplied checkpoint or fresh), writes trace.csv.
/// Both write checkpoint.json.
void train(const RunConfig& config, std::ostream& log);

/// Greedy decodes the configured split; one JSON record per request in
/// generations.jsonl.
void generate(const RunConfig& config, std::ostream& log);

/// Writes report.csv and report.txt for the configured split.
void evaluate(const RunConfig& config, std::ostream& log);

/// Parses arguments, runs one command, and maps failures to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctrlsum::cli
