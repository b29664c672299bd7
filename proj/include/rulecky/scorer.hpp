#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rulecky/chart.hpp"
#include "rulecky/tree.hpp"

namespace rulecky {

struct ScorerConfig {
  int32_t vocab_hash_dim = 4096;
  int32_t embed_dim = 64;  // must be even: split into forward/backward halves
  int32_t hidden_dim = 250;
  int32_t num_labels = 0;
  uint64_t seed = 777;
};

/// Span scorer: fixed hashed word embeddings feed prefix/suffix sums; a span
/// vector is the pair of boundary differences, scored by a one-layer
/// feed-forward head W2 ReLU(LN(W1 v + b1)) + b2. Only the head parameters
/// (w1, b1, ln_gain, ln_bias, w2, b2) are trainable.
struct ScorerModel {
  int32_t vocab_hash_dim = 0;
  int32_t embed_dim = 0;
  int32_t hidden_dim = 0;
  int32_t num_labels = 0;
  uint64_t seed = 0;

  std::vector<double> emb_fwd;  // vocab_hash_dim x (embed_dim/2), fixed
  std::vector<double> emb_bwd;  // vocab_hash_dim x (embed_dim/2), fixed
  std::vector<double> w1;       // embed_dim x hidden_dim
  std::vector<double> b1;       // hidden_dim
  std::vector<double> ln_gain;  // hidden_dim
  std::vector<double> ln_bias;  // hidden_dim
  std::vector<double> w2;       // hidden_dim x num_labels
  std::vector<double> b2;       // num_labels

  int32_t half_dim() const { return embed_dim / 2; }

  static constexpr double kLayerNormEpsilon = 1e-5;
};

ScorerModel make_scorer(const ScorerConfig& config);

/// Cumulative forward/backward context sums. y_fwd has n+1 rows with
/// y_fwd[0] = 0; y_bwd has n+2 rows with y_bwd[n+1] = 0.
struct EncodedSentence {
  int32_t n = 0;
  int32_t half_dim = 0;
  std::vector<double> y_fwd;  // (n+1) x half_dim
  std::vector<double> y_bwd;  // (n+2) x half_dim

  const double* fwd(int32_t i) const {
    return y_fwd.data() + static_cast<std::size_t>(i) * half_dim;
  }
  const double* bwd(int32_t i) const {
    return y_bwd.data() + static_cast<std::size_t>(i) * half_dim;
  }
};

EncodedSentence encode(const ScorerModel& model,
                       const std::vector<std::string>& words);

/// [y_fwd[j] - y_fwd[i]; y_bwd[j+1] - y_bwd[i+1]], length embed_dim.
std::vector<double> span_vector(const EncodedSentence& enc, int32_t i,
                                int32_t j);

SpanScores score_spans(const ScorerModel& model, const EncodedSentence& enc);

/// Gradient buffers for the trainable parameter groups.
struct ScorerGradients {
  std::vector<double> w1, b1, ln_gain, ln_bias, w2, b2;

  explicit ScorerGradients(const ScorerModel& model);
  void scale(double factor);
};

/// Adds the gradient of sum_l coeffs[l] * score(i, j, l) w.r.t. the trainable
/// parameters; recomputes the span forward pass internally.
void accumulate_span_gradient(const ScorerModel& model,
                              const EncodedSentence& enc, int32_t i, int32_t j,
                              const std::vector<std::pair<int32_t, double>>& coeffs,
                              ScorerGradients& grads);

/// model -= learning_rate * grads on the trainable groups.
void apply_gradients(ScorerModel& model, const ScorerGradients& grads,
                     double learning_rate);

// Checkpoint format: magic + version, dims header, the label vocab, then the
// parameter arrays as row-major little-endian 64-bit floats.
void save_checkpoint(const std::string& path, const ScorerModel& model,
                     const LabelVocab& vocab);
std::pair<ScorerModel, LabelVocab> load_checkpoint(const std::string& path);

}  // namespace rulecky
