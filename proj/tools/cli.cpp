#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rulecky/chart.hpp"
#include "rulecky/eval.hpp"
#include "rulecky/grammar.hpp"
#include "rulecky/rng.hpp"
#include "rulecky/rule_chart.hpp"
#include "rulecky/scorer.hpp"
#include "rulecky/trainer.hpp"
#include "rulecky/tree.hpp"

namespace rulecky::cli {

namespace {

LabelingScheme parse_scheme(const std::string& name) {
  if (name == "dollar") return LabelingScheme::DollarOnly;
  if (name == "dollar-left") return LabelingScheme::DollarPlusLeftChild;
  throw Error(ErrorCode::InvalidArgument,
              "unknown scheme '" + name + "' (use dollar or dollar-left)");
}

struct PreparedCorpus {
  std::vector<Tree> stripped;  // n-ary trees after tag/trace stripping
  std::vector<BinaryTree> binarized;
  std::vector<std::vector<std::string>> words;
  std::vector<std::vector<std::string>> pos;
};

PreparedCorpus prepare_corpus(const std::string& path, LabelingScheme scheme,
                              LabelVocab& vocab) {
  PreparedCorpus corpus;
  for (const Tree& raw : read_tree_file(path)) {
    auto stripped = strip_annotations(raw);
    if (!stripped) continue;  // nothing left after trace removal
    Tree collapsed = collapse_unary_chains(*stripped);
    corpus.binarized.push_back(binarize_left(collapsed, scheme, vocab));
    corpus.words.push_back(tree_words(*stripped));
    corpus.pos.push_back(tree_pos_tags(*stripped));
    corpus.stripped.push_back(std::move(*stripped));
  }
  if (corpus.binarized.empty())
    throw Error(ErrorCode::EmptySentence, "no trees in " + path);
  return corpus;
}

struct DecodedSentence {
  BinaryTree tree;
  bool used_fallback = false;
  double root_score = 0.0;
  int64_t rules_used = 0;
};

int64_t count_internal_nodes(const BinaryTree& tree) {
  int64_t internal = 0;
  for (const LabeledSpan& span : labeled_spans(tree))
    if (span.end - span.begin > 1) ++internal;
  return internal;
}

DecodedSentence decode_sentence(const ScorerModel& model,
                                const RuleTensor& rules,
                                const std::vector<std::string>& words,
                                bool rule_based, bool fallback) {
  EncodedSentence enc = encode(model, words);
  SpanScores scores = score_spans(model, enc);
  DecodedSentence out;
  if (rule_based) {
    RuleChartResult chart = rule_cky_fast(scores, rules);
    if (chart.best_root_label() >= 0) {
      out.tree = rule_decode_tree(scores, chart, rules);
      out.root_score = chart.best_root_score();
      out.rules_used = count_internal_nodes(out.tree);
      return out;
    }
    if (!fallback)
      throw Error(ErrorCode::NoDerivation,
                  "no rule-conforming tree; rerun with --fallback");
    out.used_fallback = true;
  }
  ChartResult chart = cky_fast(scores);
  out.tree = decode_tree(scores, chart);
  out.root_score = chart.root_score();
  return out;
}

double dev_f1(const ScorerModel& model, const RuleTensor& rules,
              const LabelVocab& vocab, const PreparedCorpus& dev) {
  std::vector<Tree> predictions;
  predictions.reserve(dev.stripped.size());
  for (std::size_t k = 0; k < dev.stripped.size(); ++k) {
    DecodedSentence decoded = decode_sentence(
        model, rules, dev.words[k], /*rule_based=*/true, /*fallback=*/true);
    predictions.push_back(
        debinarize(decoded.tree, vocab, dev.pos[k], dev.words[k]));
  }
  return evaluate(dev.stripped, predictions).f1;
}

}  // namespace

uint64_t default_seed() {
  if (const char* env = std::getenv("RULECKY_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 777;
}

int run_extract(const ExtractOptions& options) {
  LabelingScheme scheme = parse_scheme(options.scheme);
  LabelVocab vocab;
  PreparedCorpus corpus = prepare_corpus(options.input, scheme, vocab);
  RuleSet rules = extract_rules(corpus.binarized);
  if (rules.empty())
    throw Error(ErrorCode::EmptyRuleSet,
                "corpus has no binary productions (single-word trees only?)");
  RuleTensor tensor = build_rule_tensor(rules, vocab);
  save_rules_tsv(options.out_rules, rules, vocab);
  vocab.save(options.out_vocab);
  std::cout << "trees: " << corpus.binarized.size() << '\n'
            << "labels: " << vocab.size() << '\n'
            << "rules: " << rules.size() << '\n'
            << "rmax: " << tensor.max_rules << '\n';
  return 0;
}

namespace {

struct TrainRun {
  ScorerModel best_model;
  double best_f1 = -1.0;
  EvalResult best_eval;
};

TrainRun train_once(const PreparedCorpus& train, const PreparedCorpus& dev,
                    const RuleTensor& tensor, const LabelVocab& vocab,
                    const TrainConfig& config, bool quiet) {
  std::vector<TrainSentence> corpus;
  corpus.reserve(train.binarized.size());
  for (std::size_t k = 0; k < train.binarized.size(); ++k)
    corpus.push_back({train.words[k],
                      GoldAnnotation::from_tree(train.binarized[k].clone())});

  ScorerConfig scorer_config;
  scorer_config.num_labels = vocab.size();
  scorer_config.seed = config.seed;
  ScorerModel model = make_scorer(scorer_config);

  TrainRun run;
  auto on_epoch = [&](const EpochStats& stats, const ScorerModel& current) {
    double f1 = dev_f1(current, tensor, vocab, dev);
    if (!quiet)
      std::cout << "epoch " << stats.epoch
                << " loss_c " << stats.mean_conventional_loss
                << " loss_r " << stats.mean_rule_loss
                << " loss " << stats.mean_joint_loss
                << " dev_f1 " << f1 << std::endl;
    if (f1 > run.best_f1) {
      run.best_f1 = f1;
      run.best_model = current;
    }
  };
  rulecky::train(std::move(model), corpus, tensor, config, on_epoch);
  return run;
}

}  // namespace

int run_train(const TrainOptions& options) {
  LabelingScheme scheme = parse_scheme(options.scheme);
  TrainConfig config;
  config.seed = default_seed();
  if (!options.config_path.empty())
    config = load_train_config(options.config_path, config);
  if (options.lambda >= 0.0) config.lambda = options.lambda;
  validate_train_config(config);

  LabelVocab vocab;
  PreparedCorpus train_corpus =
      prepare_corpus(options.train_path, scheme, vocab);
  PreparedCorpus dev_corpus = prepare_corpus(options.dev_path, scheme, vocab);
  RuleSet rules = load_rules_tsv_extend(options.rules_path, vocab);
  RuleTensor tensor = build_rule_tensor(rules, vocab);

  if (options.sweep) {
    std::cout << "lambda\tLR\tLP\tF1\n";
    double best_f1 = -1.0;
    ScorerModel best_model;
    for (int step = 0; step <= 10; ++step) {
      TrainConfig swept = config;
      swept.lambda = step / 10.0;
      TrainRun run = train_once(train_corpus, dev_corpus, tensor, vocab, swept,
                                /*quiet=*/true);
      // Re-evaluate the best checkpoint for the table's LR/LP columns.
      std::vector<Tree> predictions;
      for (std::size_t k = 0; k < dev_corpus.stripped.size(); ++k) {
        DecodedSentence decoded =
            decode_sentence(run.best_model, tensor, dev_corpus.words[k],
                            /*rule_based=*/true, /*fallback=*/true);
        predictions.push_back(debinarize(decoded.tree, vocab,
                                         dev_corpus.pos[k],
                                         dev_corpus.words[k]));
      }
      EvalResult eval = evaluate(dev_corpus.stripped, predictions);
      std::cout << swept.lambda << '\t' << eval.lr << '\t' << eval.lp << '\t'
                << eval.f1 << '\n';
      if (eval.f1 > best_f1) {
        best_f1 = eval.f1;
        best_model = run.best_model;
      }
    }
    if (!options.out_model.empty())
      save_checkpoint(options.out_model, best_model, vocab);
    return 0;
  }

  TrainRun run = train_once(train_corpus, dev_corpus, tensor, vocab, config,
                            /*quiet=*/false);
  std::cout << "best_dev_f1 " << run.best_f1 << std::endl;
  if (!options.out_model.empty())
    save_checkpoint(options.out_model, run.best_model, vocab);
  return 0;
}

namespace {

// Sentence inputs for decode: bracketed trees (yield + POS reused) or plain
// whitespace-tokenized lines.
struct DecodeInput {
  std::vector<std::vector<std::string>> words;
  std::vector<std::vector<std::string>> pos;
};

DecodeInput read_decode_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  DecodeInput input;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return input;  // empty input, empty output
  if (text[first] == '(') {
    for (const Tree& raw : parse_bracketed(text)) {
      auto stripped = strip_annotations(raw);
      if (!stripped) continue;
      input.words.push_back(tree_words(*stripped));
      input.pos.push_back(tree_pos_tags(*stripped));
    }
    return input;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream tokens(line);
    std::vector<std::string> words;
    std::string word;
    while (tokens >> word) words.push_back(word);
    if (words.empty()) continue;
    input.pos.emplace_back(words.size(), "UNK");
    input.words.push_back(std::move(words));
  }
  return input;
}

int decode_chart_file(const DecodeOptions& options) {
  SpanScores scores = load_span_scores(options.scores_path);
  LabelVocab vocab;
  if (!options.vocab_path.empty()) {
    vocab = LabelVocab::load(options.vocab_path);
  } else if (!options.model_path.empty()) {
    vocab = load_checkpoint(options.model_path).second;
  } else {
    for (int32_t l = 0; l < scores.num_labels(); ++l)
      vocab.add("#" + std::to_string(l));
  }
  if (vocab.size() != scores.num_labels())
    throw Error(ErrorCode::DimensionMismatch,
                "vocab has " + std::to_string(vocab.size()) +
                    " labels, chart has " +
                    std::to_string(scores.num_labels()));
  BinaryTree tree;
  if (options.decoder == "rule-based") {
    RuleSet rules = load_rules_tsv(options.rules_path, vocab);
    RuleTensor tensor = build_rule_tensor(rules, vocab);
    RuleChartResult chart = rule_cky_fast(scores, tensor);
    tree = rule_decode_tree(scores, chart, tensor);
  } else {
    ChartResult chart = cky_fast(scores);
    tree = decode_tree(scores, chart);
  }
  std::vector<std::string> pos(scores.n(), "XX");
  std::vector<std::string> words;
  for (int32_t i = 0; i < scores.n(); ++i)
    words.push_back("w" + std::to_string(i));
  Tree out = debinarize(tree, vocab, pos, words);
  if (options.out.empty()) {
    std::cout << serialize_bracketed(out) << '\n';
  } else {
    write_tree_file(options.out, {out});
  }
  return 0;
}

}  // namespace

int run_decode(const DecodeOptions& options) {
  if (options.decoder != "rule-based" && options.decoder != "unconstrained")
    throw Error(ErrorCode::InvalidArgument,
                "decoder must be rule-based or unconstrained");
  if (!options.scores_path.empty()) return decode_chart_file(options);

  auto [model, vocab] = load_checkpoint(options.model_path);
  RuleSet rules = load_rules_tsv(options.rules_path, vocab);
  RuleTensor tensor = build_rule_tensor(rules, vocab);
  DecodeInput input = read_decode_input(options.input);

  std::ofstream out(options.out);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + options.out);
  std::cout << "sentence\tfallback\troot_score\trules_used\n";
  for (std::size_t k = 0; k < input.words.size(); ++k) {
    DecodedSentence decoded =
        decode_sentence(model, tensor, input.words[k],
                        options.decoder == "rule-based", options.fallback);
    Tree tree = debinarize(decoded.tree, vocab, input.pos[k], input.words[k]);
    out << serialize_bracketed(tree) << '\n';
    std::cout << k << '\t' << (decoded.used_fallback ? 1 : 0) << '\t'
              << decoded.root_score << '\t' << decoded.rules_used << '\n';
  }
  return 0;
}

int run_eval(const EvalOptions& options) {
  auto ingest = [](const std::string& path) {
    std::vector<Tree> trees;
    for (const Tree& raw : read_tree_file(path)) {
      auto stripped = strip_annotations(raw);
      if (stripped) trees.push_back(std::move(*stripped));
    }
    return trees;
  };
  std::vector<Tree> gold = ingest(options.gold_path);
  std::vector<Tree> pred = ingest(options.pred_path);
  EvalResult result = evaluate(gold, pred);
  std::cout << result.report_line() << '\n';
  std::cout << "LR " << result.lr << "  LP " << result.lp << "  F1 "
            << result.f1 << '\n';
  return 0;
}

int run_coverage(const CoverageOptions& options) {
  LabelingScheme scheme = parse_scheme(options.scheme);
  LabelVocab vocab;
  PreparedCorpus test = prepare_corpus(options.test_path, scheme, vocab);
  RuleSet train_rules = load_rules_tsv_extend(options.rules_path, vocab);
  CoverageStats stats = coverage_report(train_rules, test.binarized);
  std::cout << stats.raw_recall << '\t' << stats.weighted_recall << '\t'
            << stats.unseen_types << '\n';
  return 0;
}

namespace {

SpanScores random_chart(DetRng& rng, int32_t n, int32_t num_labels) {
  SpanScores scores(n, num_labels);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j <= n; ++j)
      for (int32_t l = 0; l < num_labels; ++l)
        scores(i, j, l) = rng.next_uniform(-5.0, 5.0);
  return scores;
}

RuleSet random_rules(DetRng& rng, int32_t num_labels, int32_t num_rules) {
  RuleSet rules;
  rules.add(0, 0, 0);  // keeps every sentence derivable
  for (int32_t r = 1; r < num_rules; ++r)
    rules.add(static_cast<int32_t>(rng.next_below(num_labels)),
              static_cast<int32_t>(rng.next_below(num_labels)),
              static_cast<int32_t>(rng.next_below(num_labels)));
  return rules;
}

template <typename Fn>
double mean_ms(int32_t repeats, Fn&& fn) {
  double total = 0.0;
  for (int32_t r = 0; r < repeats; ++r) {
    auto start = std::chrono::steady_clock::now();
    fn();
    auto stop = std::chrono::steady_clock::now();
    total += std::chrono::duration<double, std::milli>(stop - start).count();
  }
  return total / repeats;
}

}  // namespace

int run_bench(const BenchOptions& options) {
  if (options.lengths.empty() || options.num_labels < 1 ||
      options.num_rules < 1 || options.repeats < 1)
    throw Error(ErrorCode::InvalidArgument, "bench sizes must be positive");
  std::cout << "n\tvariant\tmean_ms\tbulk_steps\troot_score\tmatches_sequential\n";
  for (int32_t n : options.lengths) {
    DetRng rng(options.seed + static_cast<uint64_t>(n));
    SpanScores scores = random_chart(rng, n, options.num_labels);
    RuleSet rules = random_rules(rng, options.num_labels, options.num_rules);
    RuleTensor tensor = build_rule_tensor(rules, options.num_labels);

    ChartResult seq_chart = cky_sequential(scores);
    double seq_ms = mean_ms(options.repeats, [&] { cky_sequential(scores); });
    reset_bulk_step_count();
    ChartResult fast_chart = cky_fast(scores);
    int64_t fast_steps = bulk_step_count();
    double fast_ms = mean_ms(options.repeats, [&] { cky_fast(scores); });

    RuleChartResult rule_seq = rule_cky_sequential(scores, rules);
    double rule_seq_ms =
        mean_ms(options.repeats, [&] { rule_cky_sequential(scores, rules); });
    reset_bulk_step_count();
    RuleChartResult rule_fast = rule_cky_fast(scores, tensor);
    int64_t rule_steps = bulk_step_count();
    double rule_fast_ms =
        mean_ms(options.repeats, [&] { rule_cky_fast(scores, tensor); });

    std::cout << n << "\tcky_sequential\t" << seq_ms << "\t-\t"
              << seq_chart.root_score() << "\t-\n";
    std::cout << n << "\tcky_fast\t" << fast_ms << '\t' << fast_steps << '\t'
              << fast_chart.root_score() << '\t'
              << (fast_chart == seq_chart ? "yes" : "NO") << '\n';
    std::cout << n << "\trule_cky_sequential\t" << rule_seq_ms << "\t-\t"
              << rule_seq.best_root_score() << "\t-\n";
    std::cout << n << "\trule_cky_fast\t" << rule_fast_ms << '\t' << rule_steps
              << '\t' << rule_fast.best_root_score() << '\t'
              << (rule_fast == rule_seq ? "yes" : "NO") << '\n';
  }
  return 0;
}

}  // namespace rulecky::cli
