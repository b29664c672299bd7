#include "rulecky/scorer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "rulecky/rng.hpp"

namespace rulecky {

namespace {

constexpr char kMagic[8] = {'R', 'C', 'K', 'Y', 'M', 'D', 'L', '\0'};
constexpr uint32_t kVersion = 1;

void fill_uniform(DetRng& rng, std::vector<double>& values, std::size_t count,
                  double lo, double hi) {
  values.resize(count);
  for (auto& v : values) v = rng.next_uniform(lo, hi);
}

void check_finite(const std::vector<double>& values, const char* name) {
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteParameter, name);
}

}  // namespace

ScorerModel make_scorer(const ScorerConfig& config) {
  if (config.embed_dim < 2 || config.embed_dim % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "embed_dim must be even and >= 2");
  if (config.vocab_hash_dim < 1 || config.hidden_dim < 1 ||
      config.num_labels < 1)
    throw Error(ErrorCode::InvalidArgument, "scorer dims must be positive");
  ScorerModel model;
  model.vocab_hash_dim = config.vocab_hash_dim;
  model.embed_dim = config.embed_dim;
  model.hidden_dim = config.hidden_dim;
  model.num_labels = config.num_labels;
  model.seed = config.seed;

  DetRng rng(config.seed);
  std::size_t half = static_cast<std::size_t>(config.embed_dim) / 2;
  fill_uniform(rng, model.emb_fwd, config.vocab_hash_dim * half, -0.1, 0.1);
  fill_uniform(rng, model.emb_bwd, config.vocab_hash_dim * half, -0.1, 0.1);
  fill_uniform(rng, model.w1,
               static_cast<std::size_t>(config.embed_dim) * config.hidden_dim,
               -0.1, 0.1);
  fill_uniform(rng, model.b1, config.hidden_dim, -0.1, 0.1);
  fill_uniform(rng, model.w2,
               static_cast<std::size_t>(config.hidden_dim) * config.num_labels,
               -0.1, 0.1);
  fill_uniform(rng, model.b2, config.num_labels, -0.1, 0.1);
  model.ln_gain.assign(config.hidden_dim, 1.0);
  model.ln_bias.assign(config.hidden_dim, 0.0);
  return model;
}

EncodedSentence encode(const ScorerModel& model,
                       const std::vector<std::string>& words) {
  int32_t n = static_cast<int32_t>(words.size());
  if (n < 1) throw Error(ErrorCode::EmptySentence, "nothing to encode");
  int32_t half = model.half_dim();
  EncodedSentence enc;
  enc.n = n;
  enc.half_dim = half;
  enc.y_fwd.assign(static_cast<std::size_t>(n + 1) * half, 0.0);
  enc.y_bwd.assign(static_cast<std::size_t>(n + 2) * half, 0.0);
  // Words are 1-indexed: y_fwd[i] sums embeddings of w_1..w_i and y_bwd[i]
  // sums w_i..w_n; rows 0 and n+1 are the empty prefix/suffix bases.
  for (int32_t i = 1; i <= n; ++i) {
    std::size_t row = fnv1a_hash(words[i - 1]) %
                      static_cast<uint64_t>(model.vocab_hash_dim);
    const double* e = model.emb_fwd.data() + row * half;
    double* prev = enc.y_fwd.data() + static_cast<std::size_t>(i - 1) * half;
    double* cur = enc.y_fwd.data() + static_cast<std::size_t>(i) * half;
    for (int32_t d = 0; d < half; ++d) cur[d] = prev[d] + e[d];
  }
  for (int32_t i = n; i >= 1; --i) {
    std::size_t row = fnv1a_hash(words[i - 1]) %
                      static_cast<uint64_t>(model.vocab_hash_dim);
    const double* e = model.emb_bwd.data() + row * half;
    double* next = enc.y_bwd.data() + static_cast<std::size_t>(i + 1) * half;
    double* cur = enc.y_bwd.data() + static_cast<std::size_t>(i) * half;
    for (int32_t d = 0; d < half; ++d) cur[d] = next[d] + e[d];
  }
  // Row 0 of the backward table mirrors row 1 (there is no word 0).
  std::memcpy(enc.y_bwd.data(), enc.y_bwd.data() + half,
              sizeof(double) * half);
  return enc;
}

std::vector<double> span_vector(const EncodedSentence& enc, int32_t i,
                                int32_t j) {
  if (i < 0 || j <= i || j > enc.n)
    throw Error(ErrorCode::IndexOutOfRange,
                "span (" + std::to_string(i) + "," + std::to_string(j) + ")");
  int32_t half = enc.half_dim;
  std::vector<double> v(static_cast<std::size_t>(half) * 2);
  const double* fj = enc.fwd(j);
  const double* fi = enc.fwd(i);
  const double* bj = enc.bwd(j + 1);
  const double* bi = enc.bwd(i + 1);
  for (int32_t d = 0; d < half; ++d) v[d] = fj[d] - fi[d];
  for (int32_t d = 0; d < half; ++d) v[half + d] = bj[d] - bi[d];
  return v;
}

namespace {

// Forward pass of the feed-forward head for one span.
struct HeadActivations {
  std::vector<double> v;    // span vector, embed_dim
  std::vector<double> z;    // pre-norm hidden, hidden_dim
  std::vector<double> zn;   // normalized hidden
  std::vector<double> a;    // after gain/bias
  std::vector<double> r;    // after ReLU
  double inv_std = 0.0;
};

HeadActivations head_forward(const ScorerModel& model,
                             const EncodedSentence& enc, int32_t i, int32_t j) {
  HeadActivations act;
  act.v = span_vector(enc, i, j);
  int32_t d = model.embed_dim;
  int32_t h = model.hidden_dim;
  act.z.assign(h, 0.0);
  for (int32_t p = 0; p < d; ++p) {
    double vp = act.v[p];
    const double* row = model.w1.data() + static_cast<std::size_t>(p) * h;
    for (int32_t q = 0; q < h; ++q) act.z[q] += vp * row[q];
  }
  for (int32_t q = 0; q < h; ++q) act.z[q] += model.b1[q];

  double mean = 0.0;
  for (double z : act.z) mean += z;
  mean /= h;
  double var = 0.0;
  for (double z : act.z) var += (z - mean) * (z - mean);
  var /= h;
  act.inv_std = 1.0 / std::sqrt(var + ScorerModel::kLayerNormEpsilon);

  act.zn.resize(h);
  act.a.resize(h);
  act.r.resize(h);
  for (int32_t q = 0; q < h; ++q) {
    act.zn[q] = (act.z[q] - mean) * act.inv_std;
    act.a[q] = model.ln_gain[q] * act.zn[q] + model.ln_bias[q];
    act.r[q] = act.a[q] > 0.0 ? act.a[q] : 0.0;
  }
  return act;
}

void validate_parameters(const ScorerModel& model) {
  check_finite(model.w1, "w1");
  check_finite(model.b1, "b1");
  check_finite(model.ln_gain, "ln_gain");
  check_finite(model.ln_bias, "ln_bias");
  check_finite(model.w2, "w2");
  check_finite(model.b2, "b2");
}

}  // namespace

SpanScores score_spans(const ScorerModel& model, const EncodedSentence& enc) {
  validate_parameters(model);
  int32_t n = enc.n;
  int32_t h = model.hidden_dim;
  int32_t L = model.num_labels;
  SpanScores scores(n, L);
  for (int32_t i = 0; i < n; ++i) {
    for (int32_t j = i + 1; j <= n; ++j) {
      HeadActivations act = head_forward(model, enc, i, j);
      double* out = &scores(i, j, 0);
      for (int32_t l = 0; l < L; ++l) out[l] = model.b2[l];
      for (int32_t q = 0; q < h; ++q) {
        double rq = act.r[q];
        if (rq == 0.0) continue;
        const double* row = model.w2.data() + static_cast<std::size_t>(q) * L;
        for (int32_t l = 0; l < L; ++l) out[l] += rq * row[l];
      }
    }
  }
  return scores;
}

ScorerGradients::ScorerGradients(const ScorerModel& model)
    : w1(model.w1.size(), 0.0),
      b1(model.b1.size(), 0.0),
      ln_gain(model.ln_gain.size(), 0.0),
      ln_bias(model.ln_bias.size(), 0.0),
      w2(model.w2.size(), 0.0),
      b2(model.b2.size(), 0.0) {}

void ScorerGradients::scale(double factor) {
  for (auto* group : {&w1, &b1, &ln_gain, &ln_bias, &w2, &b2})
    for (double& g : *group) g *= factor;
}

void accumulate_span_gradient(
    const ScorerModel& model, const EncodedSentence& enc, int32_t i, int32_t j,
    const std::vector<std::pair<int32_t, double>>& coeffs,
    ScorerGradients& grads) {
  int32_t d = model.embed_dim;
  int32_t h = model.hidden_dim;
  int32_t L = model.num_labels;
  HeadActivations act = head_forward(model, enc, i, j);

  // d(score_l)/d(b2_l) = 1, d/d(w2_ql) = r_q.
  std::vector<double> dr(h, 0.0);
  for (const auto& [label, coef] : coeffs) {
    if (label < 0 || label >= L)
      throw Error(ErrorCode::LabelOutOfVocab, std::to_string(label));
    grads.b2[label] += coef;
    for (int32_t q = 0; q < h; ++q) {
      grads.w2[static_cast<std::size_t>(q) * L + label] += coef * act.r[q];
      dr[q] += coef * model.w2[static_cast<std::size_t>(q) * L + label];
    }
  }

  // ReLU, then gain/bias, then layer norm.
  std::vector<double> dzn(h);
  double dzn_mean = 0.0;
  double dzn_zn_mean = 0.0;
  for (int32_t q = 0; q < h; ++q) {
    double da = act.a[q] > 0.0 ? dr[q] : 0.0;
    grads.ln_bias[q] += da;
    grads.ln_gain[q] += da * act.zn[q];
    dzn[q] = da * model.ln_gain[q];
    dzn_mean += dzn[q];
    dzn_zn_mean += dzn[q] * act.zn[q];
  }
  dzn_mean /= h;
  dzn_zn_mean /= h;

  std::vector<double> dz(h);
  for (int32_t q = 0; q < h; ++q)
    dz[q] = act.inv_std * (dzn[q] - dzn_mean - act.zn[q] * dzn_zn_mean);

  for (int32_t q = 0; q < h; ++q) grads.b1[q] += dz[q];
  for (int32_t p = 0; p < d; ++p) {
    double vp = act.v[p];
    if (vp == 0.0) continue;
    double* row = grads.w1.data() + static_cast<std::size_t>(p) * h;
    for (int32_t q = 0; q < h; ++q) row[q] += vp * dz[q];
  }
}

void apply_gradients(ScorerModel& model, const ScorerGradients& grads,
                     double learning_rate) {
  auto step = [learning_rate](std::vector<double>& param,
                              const std::vector<double>& grad) {
    for (std::size_t k = 0; k < param.size(); ++k)
      param[k] -= learning_rate * grad[k];
  };
  step(model.w1, grads.w1);
  step(model.b1, grads.b1);
  step(model.ln_gain, grads.ln_gain);
  step(model.ln_bias, grads.ln_bias);
  step(model.w2, grads.w2);
  step(model.b2, grads.b2);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_array(std::ofstream& out, const std::vector<double>& values) {
  write_u64(out, values.size());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::vector<double> read_array(std::ifstream& in, std::size_t expected) {
  uint64_t count = read_u64(in);
  if (count != expected)
    throw Error(ErrorCode::IoError, "checkpoint array size mismatch");
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error(ErrorCode::IoError, "truncated checkpoint");
  return values;
}

}  // namespace

void save_checkpoint(const std::string& path, const ScorerModel& model,
                     const LabelVocab& vocab) {
  if (vocab.size() != model.num_labels)
    throw Error(ErrorCode::DimensionMismatch,
                "vocab size does not match the model label count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(model.vocab_hash_dim));
  write_u32(out, static_cast<uint32_t>(model.embed_dim));
  write_u32(out, static_cast<uint32_t>(model.hidden_dim));
  write_u32(out, static_cast<uint32_t>(model.num_labels));
  write_u64(out, model.seed);
  for (int32_t id = 0; id < vocab.size(); ++id) {
    const std::string& label = vocab.label(id);
    write_u32(out, static_cast<uint32_t>(label.size()));
    out.write(label.data(), static_cast<std::streamsize>(label.size()));
  }
  write_array(out, model.emb_fwd);
  write_array(out, model.emb_bwd);
  write_array(out, model.w1);
  write_array(out, model.b1);
  write_array(out, model.ln_gain);
  write_array(out, model.ln_bias);
  write_array(out, model.w2);
  write_array(out, model.b2);
}

std::pair<ScorerModel, LabelVocab> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::IoError, path + " is not a model checkpoint");
  uint32_t version = read_u32(in);
  if (version != kVersion)
    throw Error(ErrorCode::IoError,
                "unsupported checkpoint version " + std::to_string(version));
  ScorerModel model;
  model.vocab_hash_dim = static_cast<int32_t>(read_u32(in));
  model.embed_dim = static_cast<int32_t>(read_u32(in));
  model.hidden_dim = static_cast<int32_t>(read_u32(in));
  model.num_labels = static_cast<int32_t>(read_u32(in));
  model.seed = read_u64(in);
  LabelVocab vocab;
  for (int32_t k = 0; k < model.num_labels; ++k) {
    uint32_t len = read_u32(in);
    std::string label(len, '\0');
    in.read(label.data(), len);
    vocab.add(label);
  }
  if (!in) throw Error(ErrorCode::IoError, "truncated checkpoint");
  std::size_t half = static_cast<std::size_t>(model.embed_dim) / 2;
  model.emb_fwd = read_array(in, model.vocab_hash_dim * half);
  model.emb_bwd = read_array(in, model.vocab_hash_dim * half);
  model.w1 = read_array(
      in, static_cast<std::size_t>(model.embed_dim) * model.hidden_dim);
  model.b1 = read_array(in, model.hidden_dim);
  model.ln_gain = read_array(in, model.hidden_dim);
  model.ln_bias = read_array(in, model.hidden_dim);
  model.w2 = read_array(
      in, static_cast<std::size_t>(model.hidden_dim) * model.num_labels);
  model.b2 = read_array(in, model.num_labels);
  return {std::move(model), std::move(vocab)};
}

}  // namespace rulecky
