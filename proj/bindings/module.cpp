#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rulecky/chart.hpp"
#include "rulecky/eval.hpp"
#include "rulecky/grammar.hpp"
#include "rulecky/rule_chart.hpp"
#include "rulecky/scorer.hpp"
#include "rulecky/trainer.hpp"
#include "rulecky/tree.hpp"

namespace py = pybind11;
using namespace rulecky;

namespace {

std::vector<BinaryTree> clone_corpus(const py::iterable& trees) {
  std::vector<BinaryTree> corpus;
  for (py::handle item : trees)
    corpus.push_back(item.cast<const BinaryTree*>()->clone());
  return corpus;
}

SpanScores scores_from_array(const py::array_t<double>& array) {
  if (array.ndim() != 3)
    throw Error(ErrorCode::DimensionMismatch,
                "expected an (n+1, n+1, labels) array");
  auto view = array.unchecked<3>();
  int32_t rows = static_cast<int32_t>(view.shape(0));
  int32_t num_labels = static_cast<int32_t>(view.shape(2));
  if (view.shape(1) != rows || rows < 2)
    throw Error(ErrorCode::DimensionMismatch,
                "expected an (n+1, n+1, labels) array");
  int32_t n = rows - 1;
  SpanScores scores(n, num_labels);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j <= n; ++j)
      for (int32_t l = 0; l < num_labels; ++l)
        scores(i, j, l) = view(i, j, l);
  return scores;
}

py::array_t<double> scores_to_array(const SpanScores& scores) {
  int32_t rows = scores.n() + 1;
  py::array_t<double> array({rows, rows, scores.num_labels()});
  auto view = array.mutable_unchecked<3>();
  for (int32_t i = 0; i < rows; ++i)
    for (int32_t j = 0; j < rows; ++j)
      for (int32_t l = 0; l < scores.num_labels(); ++l)
        view(i, j, l) = (i < j && j <= scores.n()) ? scores(i, j, l) : 0.0;
  return array;
}

}  // namespace

PYBIND11_MODULE(_rulecky, m) {
  m.doc() = "CKY decoding with syntactic-rule constraints";

  py::register_exception<Error>(m, "RuleckyError");

  py::enum_<LabelingScheme>(m, "LabelingScheme")
      .value("DollarOnly", LabelingScheme::DollarOnly)
      .value("DollarPlusLeftChild", LabelingScheme::DollarPlusLeftChild);

  py::class_<Tree>(m, "Tree")
      .def(py::init([](const std::string& label, const std::string& word) {
             return Tree(label, word);
           }),
           py::arg("label"), py::arg("word"))
      .def(py::init([](const std::string& label, std::vector<Tree> children) {
             return Tree(label, std::move(children));
           }),
           py::arg("label"), py::arg("children"))
      .def_readonly("label", &Tree::label)
      .def_readonly("word", &Tree::word)
      .def_readonly("children", &Tree::children)
      .def_property_readonly("is_leaf", &Tree::is_leaf)
      .def("__eq__", [](const Tree& a, const Tree& b) { return a == b; })
      .def("__repr__", &serialize_bracketed);

  py::class_<BinaryTree>(m, "BinaryTree")
      .def_readonly("label_id", &BinaryTree::label_id)
      .def_readonly("begin", &BinaryTree::begin)
      .def_readonly("end", &BinaryTree::end)
      .def_property_readonly("is_leaf", &BinaryTree::is_leaf)
      .def_property_readonly(
          "left", [](const BinaryTree& t) { return t.left.get(); },
          py::return_value_policy::reference_internal)
      .def_property_readonly(
          "right", [](const BinaryTree& t) { return t.right.get(); },
          py::return_value_policy::reference_internal)
      .def("clone", &BinaryTree::clone)
      .def("__eq__", [](const BinaryTree& a, const BinaryTree& b) {
        return structurally_equal(a, b);
      });

  py::class_<LabelVocab>(m, "LabelVocab")
      .def(py::init<>())
      .def("add", &LabelVocab::add)
      .def("find",
           [](const LabelVocab& vocab, const std::string& label)
               -> std::optional<int32_t> { return vocab.find(label); })
      .def("label", &LabelVocab::label)
      .def("save", &LabelVocab::save)
      .def_static("load", &LabelVocab::load)
      .def("__len__", &LabelVocab::size)
      .def("__contains__", [](const LabelVocab& vocab, const std::string& s) {
        return vocab.contains(s);
      });

  m.def("parse_bracketed",
        [](const std::string& text) { return parse_bracketed(text); });
  m.def("serialize_bracketed", &serialize_bracketed);
  m.def("strip_annotations", &strip_annotations);
  m.def("collapse_unary_chains", &collapse_unary_chains);
  m.def("binarize_left", &binarize_left, py::arg("tree"), py::arg("scheme"),
        py::arg("vocab"));
  m.def("debinarize", &debinarize, py::arg("btree"), py::arg("vocab"),
        py::arg("original_pos"), py::arg("words"));
  m.def("labeled_spans", [](const BinaryTree& tree) {
    std::vector<std::tuple<int32_t, int32_t, int32_t>> out;
    for (const LabeledSpan& span : labeled_spans(tree))
      out.emplace_back(span.begin, span.end, span.label);
    return out;
  });
  m.def("tree_words", &tree_words);
  m.def("tree_pos_tags", &tree_pos_tags);

  py::class_<RuleSet>(m, "RuleSet")
      .def(py::init<>())
      .def("add", &RuleSet::add, py::arg("parent"), py::arg("left"),
           py::arg("right"), py::arg("count") = 1)
      .def("contains", &RuleSet::contains)
      .def("count", &RuleSet::count)
      .def("total_count", &RuleSet::total_count)
      .def("items",
           [](const RuleSet& rules) {
             std::vector<
                 std::pair<std::tuple<int32_t, int32_t, int32_t>, int64_t>>
                 out;
             for (const auto& [key, count] : rules)
               out.emplace_back(std::tuple{key[0], key[1], key[2]}, count);
             return out;
           })
      .def("__len__", [](const RuleSet& rules) { return rules.size(); });

  py::class_<RuleTensor>(m, "RuleTensor")
      .def_readonly("num_labels", &RuleTensor::num_labels)
      .def_readonly("max_rules", &RuleTensor::max_rules)
      .def_readonly("pad_id", &RuleTensor::pad_id)
      .def_readonly("valid_counts", &RuleTensor::valid_counts)
      .def("rule", [](const RuleTensor& tensor, int32_t parent, int32_t r) {
        if (parent < 0 || parent >= tensor.num_labels || r < 0 ||
            r >= tensor.max_rules)
          throw Error(ErrorCode::IndexOutOfRange, "rule slot");
        const int32_t* row = tensor.rule(parent, r);
        return std::tuple{row[0], row[1], row[2]};
      });

  m.def("extract_rules", [](const py::iterable& corpus) {
    return extract_rules(clone_corpus(corpus));
  });
  m.def("build_rule_tensor",
        py::overload_cast<const RuleSet&, int32_t>(&build_rule_tensor));
  m.def("build_rule_tensor",
        py::overload_cast<const RuleSet&, const LabelVocab&>(
            &build_rule_tensor));

  py::class_<CoverageStats>(m, "CoverageStats")
      .def_readonly("raw_recall", &CoverageStats::raw_recall)
      .def_readonly("weighted_recall", &CoverageStats::weighted_recall)
      .def_readonly("matched_types", &CoverageStats::matched_types)
      .def_readonly("test_types", &CoverageStats::test_types)
      .def_readonly("unseen_types", &CoverageStats::unseen_types);

  m.def("rule_coverage", &rule_coverage, py::arg("train"), py::arg("test"));
  m.def("save_rules_tsv", &save_rules_tsv);
  m.def("load_rules_tsv", &load_rules_tsv);

  py::class_<SpanScores>(m, "SpanScores")
      .def(py::init<int32_t, int32_t, double>(), py::arg("n"),
           py::arg("num_labels"), py::arg("fill") = 0.0)
      .def(py::init(&scores_from_array), py::arg("array"))
      .def_property_readonly("n", &SpanScores::n)
      .def_property_readonly("num_labels", &SpanScores::num_labels)
      .def("get",
           [](const SpanScores& scores, int32_t i, int32_t j, int32_t l) {
             return scores.at(i, j, l);
           })
      .def("set",
           [](SpanScores& scores, int32_t i, int32_t j, int32_t l, double v) {
             scores.at(i, j, l) = v;
           })
      .def("to_array", &scores_to_array);

  m.def("save_span_scores", &save_span_scores);
  m.def("load_span_scores", &load_span_scores);

  py::class_<ChartResult>(m, "ChartResult")
      .def_readonly("n", &ChartResult::n)
      .def("score", &ChartResult::score)
      .def("split", &ChartResult::split_at)
      .def_property_readonly("root_score", &ChartResult::root_score)
      .def("__eq__",
           [](const ChartResult& a, const ChartResult& b) { return a == b; });

  py::class_<RuleChartResult>(m, "RuleChartResult")
      .def_readonly("n", &RuleChartResult::n)
      .def_readonly("num_labels", &RuleChartResult::num_labels)
      .def("score", &RuleChartResult::score)
      .def("derivable", &RuleChartResult::derivable)
      .def("split",
           [](const RuleChartResult& chart, int32_t i, int32_t j, int32_t l) {
             return chart.split[chart.index(i, j, l)];
           })
      .def("rule",
           [](const RuleChartResult& chart, int32_t i, int32_t j, int32_t l) {
             return chart.rule[chart.index(i, j, l)];
           })
      .def_property_readonly("best_root_label",
                             &RuleChartResult::best_root_label)
      .def_property_readonly("best_root_score",
                             &RuleChartResult::best_root_score)
      .def("__eq__", [](const RuleChartResult& a, const RuleChartResult& b) {
        return a == b;
      });

  m.def("cky_sequential", &cky_sequential);
  m.def("cky_fast", &cky_fast);
  m.def("decode_tree", &decode_tree);
  m.def("rule_cky_sequential", &rule_cky_sequential);
  m.def("rule_cky_fast", &rule_cky_fast);
  m.def("rule_decode_tree", &rule_decode_tree);
  m.def("bulk_step_count", &bulk_step_count);
  m.def("reset_bulk_step_count", &reset_bulk_step_count);

  py::class_<ScorerConfig>(m, "ScorerConfig")
      .def(py::init<>())
      .def_readwrite("vocab_hash_dim", &ScorerConfig::vocab_hash_dim)
      .def_readwrite("embed_dim", &ScorerConfig::embed_dim)
      .def_readwrite("hidden_dim", &ScorerConfig::hidden_dim)
      .def_readwrite("num_labels", &ScorerConfig::num_labels)
      .def_readwrite("seed", &ScorerConfig::seed);

  py::class_<ScorerModel>(m, "ScorerModel")
      .def_readonly("vocab_hash_dim", &ScorerModel::vocab_hash_dim)
      .def_readonly("embed_dim", &ScorerModel::embed_dim)
      .def_readonly("hidden_dim", &ScorerModel::hidden_dim)
      .def_readonly("num_labels", &ScorerModel::num_labels)
      .def_readonly("seed", &ScorerModel::seed);

  m.def("make_scorer", &make_scorer);
  m.def("save_checkpoint", &save_checkpoint);
  m.def("load_checkpoint", &load_checkpoint);

  py::class_<EncodedSentence>(m, "EncodedSentence")
      .def_readonly("n", &EncodedSentence::n)
      .def_readonly("half_dim", &EncodedSentence::half_dim);

  m.def("encode", &encode);
  m.def("span_vector", [](const EncodedSentence& enc, int32_t i, int32_t j) {
    std::vector<double> v = span_vector(enc, i, j);
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
  });
  m.def("score_spans", &score_spans);

  py::enum_<DecoderMode>(m, "DecoderMode")
      .value("Conventional", DecoderMode::Conventional)
      .value("RuleBased", DecoderMode::RuleBased);

  py::class_<GoldAnnotation>(m, "GoldAnnotation")
      .def_static("from_tree",
                  [](const BinaryTree& tree) {
                    return GoldAnnotation::from_tree(tree.clone());
                  })
      .def_readonly("n", &GoldAnnotation::n)
      .def("contains", &GoldAnnotation::contains)
      .def_property_readonly(
          "tree", [](const GoldAnnotation& gold) { return &gold.tree; },
          py::return_value_policy::reference_internal);

  py::class_<HingeResult>(m, "HingeResult")
      .def_readonly("loss", &HingeResult::loss)
      .def_readonly("augmented_best", &HingeResult::augmented_best)
      .def_property_readonly(
          "violating_tree",
          [](const HingeResult& r) { return &r.violating_tree; },
          py::return_value_policy::reference_internal);

  m.def("hamming_augment", &hamming_augment);
  m.def("tree_score", &tree_score);
  m.def(
      "hinge_loss",
      [](const SpanScores& scores, const GoldAnnotation& gold,
         DecoderMode mode, const RuleTensor* rules) {
        return hinge_loss(scores, gold, mode, rules);
      },
      py::arg("scores"), py::arg("gold"), py::arg("mode"),
      py::arg("rules") = nullptr);
  m.def("joint_loss", &joint_loss, py::arg("scores"), py::arg("gold"),
        py::arg("rules"), py::arg("lambda_"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed);

  m.def(
      "train",
      [](const ScorerModel& model, const py::iterable& corpus,
         const RuleTensor& rules, const TrainConfig& config) {
        std::vector<TrainSentence> sentences;
        for (py::handle item : corpus) {
          auto pair = item.cast<py::tuple>();
          TrainSentence sentence;
          sentence.words = pair[0].cast<std::vector<std::string>>();
          sentence.gold = GoldAnnotation::from_tree(
              pair[1].cast<const BinaryTree*>()->clone());
          sentences.push_back(std::move(sentence));
        }
        ScorerModel copy = model;
        return train(std::move(copy), sentences, rules, config);
      },
      py::arg("model"), py::arg("corpus"), py::arg("rules"), py::arg("config"),
      "corpus: iterable of (words, gold BinaryTree) pairs");

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("matched", &EvalResult::matched)
      .def_readonly("gold_total", &EvalResult::gold_total)
      .def_readonly("pred_total", &EvalResult::pred_total)
      .def_readonly("lr", &EvalResult::lr)
      .def_readonly("lp", &EvalResult::lp)
      .def_readonly("f1", &EvalResult::f1)
      .def("report_line", &EvalResult::report_line);

  m.def("evaluate", &evaluate, py::arg("gold"), py::arg("pred"));
  m.def("coverage_report",
        [](const RuleSet& train_rules, const py::iterable& corpus) {
          return coverage_report(train_rules, clone_corpus(corpus));
        });
}
