#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rulecky::cli {

struct ExtractOptions {
  std::string input;
  std::string scheme = "dollar";  // dollar | dollar-left
  std::string out_rules;
  std::string out_vocab;
};

struct TrainOptions {
  std::string train_path;
  std::string dev_path;
  std::string rules_path;
  std::string config_path;
  std::string out_model;
  std::string scheme = "dollar";
  double lambda = -1.0;  // < 0 means: take it from the config file
  bool sweep = false;
};

struct DecodeOptions {
  std::string model_path;
  std::string rules_path;
  std::string input;       // sentences or bracketed trees
  std::string scores_path; // decode a dumped chart instead of sentences
  std::string vocab_path;  // label names for --scores without --model
  std::string decoder = "rule-based";  // rule-based | unconstrained
  std::string out;
  bool fallback = true;
};

struct EvalOptions {
  std::string gold_path;
  std::string pred_path;
};

struct CoverageOptions {
  std::string rules_path;
  std::string test_path;
  std::string scheme = "dollar";
};

struct BenchOptions {
  std::vector<int32_t> lengths;
  int32_t num_labels = 12;
  int32_t num_rules = 40;
  int32_t repeats = 3;
  uint64_t seed = 777;
};

int run_extract(const ExtractOptions& options);
int run_train(const TrainOptions& options);
int run_decode(const DecodeOptions& options);
int run_eval(const EvalOptions& options);
int run_coverage(const CoverageOptions& options);
int run_bench(const BenchOptions& options);

/// RULECKY_SEED environment override for default seeds.
uint64_t default_seed();

}  // namespace rulecky::cli
