#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "rulecky/error.hpp"

namespace {

std::vector<int32_t> parse_lengths(const std::string& text) {
  std::vector<int32_t> lengths;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) lengths.push_back(std::stoi(item));
  return lengths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CKY decoding toolkit with syntactic-rule constraints"};
  app.require_subcommand(1);

  rulecky::cli::ExtractOptions extract;
  auto* cmd_extract =
      app.add_subcommand("extract", "Extract binary rules from a treebank");
  cmd_extract->add_option("--input", extract.input, "bracketed tree file")
      ->required();
  cmd_extract->add_option("--scheme", extract.scheme,
                          "generated-node labels: dollar | dollar-left")
      ->check(CLI::IsMember({"dollar", "dollar-left"}));
  cmd_extract->add_option("--out-rules", extract.out_rules, "rule TSV output")
      ->required();
  cmd_extract->add_option("--out-vocab", extract.out_vocab, "label vocab output")
      ->required();

  rulecky::cli::TrainOptions train;
  auto* cmd_train =
      app.add_subcommand("train", "Train the span scorer with joint hinge loss");
  cmd_train->add_option("--train", train.train_path, "training trees")->required();
  cmd_train->add_option("--dev", train.dev_path, "development trees")->required();
  cmd_train->add_option("--rules", train.rules_path, "rule TSV")->required();
  cmd_train->add_option("--config", train.config_path, "key=value config file");
  cmd_train->add_option("--lambda", train.lambda, "rule-loss weight in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd_train->add_option("--scheme", train.scheme, "binarization labeling scheme")
      ->check(CLI::IsMember({"dollar", "dollar-left"}));
  cmd_train->add_option("--out-model", train.out_model, "checkpoint output");
  cmd_train->add_flag("--sweep", train.sweep,
                      "train once per lambda in {0.0,...,1.0} and print a table");

  rulecky::cli::DecodeOptions decode;
  auto* cmd_decode = app.add_subcommand("decode", "Parse sentences or a chart file");
  cmd_decode->add_option("--model", decode.model_path, "model checkpoint");
  cmd_decode->add_option("--rules", decode.rules_path, "rule TSV");
  cmd_decode->add_option("--input", decode.input, "sentences or trees");
  cmd_decode->add_option("--scores", decode.scores_path,
                         "decode a span-score chart file instead");
  cmd_decode->add_option("--vocab", decode.vocab_path,
                         "label vocab for --scores");
  cmd_decode->add_option("--decoder", decode.decoder,
                         "rule-based | unconstrained")
      ->check(CLI::IsMember({"rule-based", "unconstrained"}));
  cmd_decode->add_option("--out", decode.out, "bracketed tree output");
  cmd_decode->add_flag("--fallback,!--no-fallback", decode.fallback,
                       "fall back to the unconstrained decoder when no "
                       "rule-conforming tree exists (default on)");

  rulecky::cli::EvalOptions eval;
  auto* cmd_eval = app.add_subcommand("eval", "Labeled bracketing F1");
  cmd_eval->add_option("--gold", eval.gold_path, "gold trees")->required();
  cmd_eval->add_option("--pred", eval.pred_path, "predicted trees")->required();

  rulecky::cli::CoverageOptions coverage;
  auto* cmd_coverage =
      app.add_subcommand("coverage", "Rule recall of a test set");
  cmd_coverage->add_option("--rules", coverage.rules_path, "training rule TSV")
      ->required();
  cmd_coverage->add_option("--test", coverage.test_path, "test trees")->required();
  cmd_coverage->add_option("--scheme", coverage.scheme, "labeling scheme")
      ->check(CLI::IsMember({"dollar", "dollar-left"}));

  rulecky::cli::BenchOptions bench;
  std::string bench_lengths = "10,20,40";
  auto* cmd_bench =
      app.add_subcommand("bench", "Time sequential vs bulk decoders");
  cmd_bench->add_option("--n", bench_lengths, "comma-separated sentence lengths");
  cmd_bench->add_option("--labels", bench.num_labels, "label count");
  cmd_bench->add_option("--rules", bench.num_rules, "rule count");
  cmd_bench->add_option("--repeats", bench.repeats, "timing repeats");
  cmd_bench->add_option("--seed", bench.seed, "chart seed");

  bench.seed = rulecky::cli::default_seed();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_extract) return rulecky::cli::run_extract(extract);
    if (*cmd_train) return rulecky::cli::run_train(train);
    if (*cmd_decode) return rulecky::cli::run_decode(decode);
    if (*cmd_eval) return rulecky::cli::run_eval(eval);
    if (*cmd_coverage) return rulecky::cli::run_coverage(coverage);
    if (*cmd_bench) {
      bench.lengths = parse_lengths(bench_lengths);
      return rulecky::cli::run_bench(bench);
    }
  } catch (const rulecky::Error& error) {
    std::cerr << "error: " << error.what() << std::endl;
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << std::endl;
    return 1;
  }
  return 0;
}
