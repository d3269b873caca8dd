#pragma once

// Configuration recommender: one embedding table per GEMM dimension feeding a
// single-hidden-layer ReLU classifier with a softmax over configuration
// classes.
//
//   x      = [E_m[m] | E_n[n] | E_k[k]]          (3d)
//   hidden = relu(x * W1 + b1)                    (h)
//   p      = softmax(hidden * W2 + b2)            (classes)
//
// All parameters live in one flat row-major buffer so the optimizer,
// gradient checks and serialization treat them uniformly. Every reduction
// runs in a fixed order; training is a pure function of the data and the
// TrainConfig.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sara/config_space.hpp"
#include "sara/io.hpp"
#include "sara/oracle_search.hpp"
#include "sara/partition.hpp"
#include "sara/rng.hpp"

namespace sara {

struct ModelDims {
  Count vocab = 1025;
  Count embed_dim = 16;
  Count hidden = 128;
  Count classes = 75;
  bool shared_embedding = false;

  Count tables() const { return shared_embedding ? 1 : 3; }
  Count input_width() const { return 3 * embed_dim; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

inline void validate(const ModelDims& d) {
  if (d.vocab < 2 || d.embed_dim < 1 || d.hidden < 1 || d.classes < 1) {
    throw ValidationError("model dimensions must be positive (vocab >= 2)");
  }
}

/// Offsets of each parameter block inside the flat buffer.
struct ParamLayout {
  std::size_t tables = 0;
  std::size_t w1 = 0;
  std::size_t b1 = 0;
  std::size_t w2 = 0;
  std::size_t b2 = 0;
  std::size_t total = 0;

  explicit ParamLayout(const ModelDims& d) {
    const auto V = static_cast<std::size_t>(d.vocab), E = static_cast<std::size_t>(d.embed_dim),
               H = static_cast<std::size_t>(d.hidden), C = static_cast<std::size_t>(d.classes);
    w1 = static_cast<std::size_t>(d.tables()) * V * E;
    b1 = w1 + 3 * E * H;
    w2 = b1 + H;
    b2 = w2 + H * C;
    total = b2 + C;
  }
};

template <typename Scalar>
class BasicRecModel {
 public:
  using scalar_type = Scalar;

  BasicRecModel() : BasicRecModel(ModelDims{}) {}

  /// Zero-initialized model; its output is uniform over classes.
  explicit BasicRecModel(ModelDims dims, std::uint64_t space_hash = 0)
      : dims_(dims), layout_(dims), space_hash_(space_hash) {
    validate(dims_);
    params_.assign(layout_.total, Scalar(0));
  }

  const ModelDims& dims() const { return dims_; }
  const ParamLayout& layout() const { return layout_; }
  std::uint64_t space_hash() const { return space_hash_; }
  void set_space_hash(std::uint64_t h) { space_hash_ = h; }

  std::span<Scalar> params() { return params_; }
  std::span<const Scalar> params() const { return params_; }

  /// Glorot-uniform dense layers, zero biases, N(0, 0.01) embeddings.
  void initialize(Rng& rng) {
    std::fill(params_.begin(), params_.end(), Scalar(0));
    for (std::size_t i = 0; i < layout_.w1; ++i) params_[i] = static_cast<Scalar>(rng.normal(0.0, 0.01));
    auto glorot = [&](std::size_t offset, Count fan_in, Count fan_out) {
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (std::size_t i = 0; i < static_cast<std::size_t>(fan_in * fan_out); ++i) {
        params_[offset + i] = static_cast<Scalar>((2.0 * rng.uniform01() - 1.0) * limit);
      }
    };
    glorot(layout_.w1, dims_.input_width(), dims_.hidden);
    glorot(layout_.w2, dims_.hidden, dims_.classes);
  }

  Count clamp_index(Count v) const { return std::clamp<Count>(v, 0, dims_.vocab - 1); }

  /// Start of the embedding row for `value` of feature `f` (0=m, 1=n, 2=k).
  std::size_t embedding_offset(int f, Count value) const {
    const auto table = dims_.shared_embedding ? 0u : static_cast<std::size_t>(f);
    const auto V = static_cast<std::size_t>(dims_.vocab), E = static_cast<std::size_t>(dims_.embed_dim);
    return layout_.tables + (table * V + static_cast<std::size_t>(clamp_index(value))) * E;
  }

  friend bool operator==(const BasicRecModel& a, const BasicRecModel& b) {
    return a.dims_ == b.dims_ && a.space_hash_ == b.space_hash_ && a.params_ == b.params_;
  }

 private:
  ModelDims dims_;
  ParamLayout layout_;
  std::uint64_t space_hash_ = 0;
  std::vector<Scalar> params_;
};

using RecModel = BasicRecModel<float>;

/// Intermediate values of one forward pass, kept for backpropagation.
template <typename Scalar>
struct ForwardState {
  std::vector<Scalar> input;
  std::vector<Scalar> pre_hidden;
  std::vector<Scalar> hidden;
  std::vector<Scalar> logits;
  std::vector<Scalar> probs;
};

template <typename Scalar>
void forward_into(const BasicRecModel<Scalar>& model, const GemmWorkload& w, ForwardState<Scalar>& st) {
  const auto& d = model.dims();
  const auto& L = model.layout();
  const auto p = model.params();
  const auto E = static_cast<std::size_t>(d.embed_dim), H = static_cast<std::size_t>(d.hidden),
             C = static_cast<std::size_t>(d.classes), X = 3 * E;
  st.input.resize(X);
  st.pre_hidden.resize(H);
  st.hidden.resize(H);
  st.logits.resize(C);
  st.probs.resize(C);

  const Count values[3] = {w.m, w.n, w.k};
  for (int f = 0; f < 3; ++f) {
    const auto off = model.embedding_offset(f, values[f]);
    std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(off), E, st.input.begin() + static_cast<std::ptrdiff_t>(f * E));
  }

  std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(L.b1), H, st.pre_hidden.begin());
  for (std::size_t i = 0; i < X; ++i) {
    const Scalar xi = st.input[i];
    const Scalar* row = p.data() + L.w1 + i * H;
    for (std::size_t j = 0; j < H; ++j) st.pre_hidden[j] += xi * row[j];
  }
  for (std::size_t j = 0; j < H; ++j) st.hidden[j] = st.pre_hidden[j] > Scalar(0) ? st.pre_hidden[j] : Scalar(0);

  std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(L.b2), C, st.logits.begin());
  for (std::size_t j = 0; j < H; ++j) {
    const Scalar hj = st.hidden[j];
    if (hj == Scalar(0)) continue;
    const Scalar* row = p.data() + L.w2 + j * C;
    for (std::size_t c = 0; c < C; ++c) st.logits[c] += hj * row[c];
  }

  const Scalar peak = *std::max_element(st.logits.begin(), st.logits.end());
  Scalar sum = 0;
  for (std::size_t c = 0; c < C; ++c) {
    st.probs[c] = std::exp(st.logits[c] - peak);
    sum += st.probs[c];
  }
  for (auto& v : st.probs) v /= sum;
}

/// Class probabilities for one workload. Dimensions above vocab-1 share the
/// last embedding row.
template <typename Scalar>
std::vector<Scalar> forward(const BasicRecModel<Scalar>& model, const GemmWorkload& w) {
  ForwardState<Scalar> st;
  forward_into(model, w, st);
  return st.probs;
}

template <typename Scalar>
std::vector<Scalar> logits(const BasicRecModel<Scalar>& model, const GemmWorkload& w) {
  ForwardState<Scalar> st;
  forward_into(model, w, st);
  return st.logits;
}

/// First index of the maximum.
template <typename Scalar>
ClassId argmax(std::span<const Scalar> v) {
  return static_cast<ClassId>(std::max_element(v.begin(), v.end()) - v.begin());
}

template <typename Scalar>
ClassId predict(const BasicRecModel<Scalar>& model, const GemmWorkload& w) {
  ForwardState<Scalar> st;
  forward_into(model, w, st);
  return argmax<Scalar>(st.logits);
}

struct Example {
  GemmWorkload workload;
  ClassId label = 0;
};

/// Mean cross-entropy over `batch`; `grads` (same layout as the parameters)
/// is overwritten with d(loss)/d(param). Only embedding rows touched by the
/// batch receive non-zero gradient.
template <typename Scalar>
double loss_and_grads(const BasicRecModel<Scalar>& model, std::span<const Example> batch,
                      std::vector<Scalar>& grads, std::size_t* correct = nullptr) {
  if (batch.empty()) throw ValidationError("loss requires a non-empty batch");
  const auto& d = model.dims();
  const auto& L = model.layout();
  const auto p = model.params();
  const auto E = static_cast<std::size_t>(d.embed_dim), H = static_cast<std::size_t>(d.hidden),
             C = static_cast<std::size_t>(d.classes), X = 3 * E;
  grads.assign(L.total, Scalar(0));

  ForwardState<Scalar> st;
  std::vector<Scalar> dlogits(C), dhidden(H), dinput(X);
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(batch.size());
  double loss = 0.0;

  for (const auto& ex : batch) {
    if (ex.label < 0 || ex.label >= d.classes) {
      throw ValidationError("class id " + std::to_string(ex.label) + " outside [0, " +
                            std::to_string(d.classes) + ")");
    }
    forward_into(model, ex.workload, st);
    const auto y = static_cast<std::size_t>(ex.label);
    const Scalar peak = *std::max_element(st.logits.begin(), st.logits.end());
    double log_sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) log_sum += std::exp(static_cast<double>(st.logits[c] - peak));
    loss += std::log(log_sum) - static_cast<double>(st.logits[y] - peak);
    if (correct && argmax<Scalar>(st.logits) == ex.label) ++*correct;

    for (std::size_t c = 0; c < C; ++c) dlogits[c] = st.probs[c] * inv_batch;
    dlogits[y] -= inv_batch;

    for (std::size_t c = 0; c < C; ++c) grads[L.b2 + c] += dlogits[c];
    std::fill(dhidden.begin(), dhidden.end(), Scalar(0));
    for (std::size_t j = 0; j < H; ++j) {
      if (st.pre_hidden[j] <= Scalar(0)) continue;
      const Scalar hj = st.hidden[j];
      const Scalar* wrow = p.data() + L.w2 + j * C;
      Scalar* grow = grads.data() + L.w2 + j * C;
      Scalar acc = 0;
      for (std::size_t c = 0; c < C; ++c) {
        grow[c] += hj * dlogits[c];
        acc += wrow[c] * dlogits[c];
      }
      dhidden[j] = acc;
    }

    for (std::size_t j = 0; j < H; ++j) grads[L.b1 + j] += dhidden[j];
    for (std::size_t i = 0; i < X; ++i) {
      const Scalar xi = st.input[i];
      const Scalar* wrow = p.data() + L.w1 + i * H;
      Scalar* grow = grads.data() + L.w1 + i * H;
      Scalar acc = 0;
      for (std::size_t j = 0; j < H; ++j) {
        grow[j] += xi * dhidden[j];
        acc += wrow[j] * dhidden[j];
      }
      dinput[i] = acc;
    }

    const Count values[3] = {ex.workload.m, ex.workload.n, ex.workload.k};
    for (int f = 0; f < 3; ++f) {
      Scalar* grow = grads.data() + model.embedding_offset(f, values[f]);
      for (std::size_t e = 0; e < E; ++e) grow[e] += dinput[static_cast<std::size_t>(f) * E + e];
    }
  }
  return loss / static_cast<double>(batch.size());
}

template <typename Scalar>
double loss_and_grads(const BasicRecModel<Scalar>& model, const std::vector<Example>& batch,
                      std::vector<Scalar>& grads) {
  return loss_and_grads(model, std::span<const Example>(batch), grads);
}

/// Adam with bias correction.
template <typename Scalar>
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, Scalar(0)), v_(size, Scalar(0)) {}

  void step(std::span<Scalar> params, std::span<const Scalar> grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
    const auto step_size = static_cast<Scalar>(lr_ * std::sqrt(c2) / c1);
    const auto eps = static_cast<Scalar>(eps_ * std::sqrt(c2));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Scalar g = grads[i];
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g * g;
      params[i] -= step_size * m_[i] / (std::sqrt(v_[i]) + eps);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<Scalar> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  Count epochs = 30;
  Count batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  double train_fraction = 0.9;
  Count embed_dim = 16;
  Count hidden = 128;
  Count vocab = 0;  // 0: one past the largest dimension in the training set
  bool shared_embedding = false;
};

inline void validate(const TrainConfig& c) {
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  if (c.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (c.epochs < 0) throw ValidationError("epochs must be >= 0");
  if (!(c.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
}

struct EpochMetrics {
  Count epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// Deterministic shuffle-then-cut split. Both halves keep at least one sample
/// when the dataset has two or more.
inline DatasetSplit split_dataset(const std::vector<LabeledSample>& data, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed ^ 0x5eed5eed5eed5eedULL);
  shuffle(order.begin(), order.end(), rng);
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
  if (data.size() >= 2) cut = std::clamp<std::size_t>(cut, 1, data.size() - 1);
  DatasetSplit s;
  for (std::size_t i = 0; i < order.size(); ++i) (i < cut ? s.train : s.test).push_back(data[order[i]]);
  return s;
}

inline std::vector<Example> to_examples(const std::vector<LabeledSample>& samples) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.workload, s.class_id});
  return out;
}

/// Mean loss and top-1 accuracy without touching the parameters.
template <typename Scalar>
std::pair<double, double> loss_and_accuracy(const BasicRecModel<Scalar>& model, std::span<const Example> data) {
  if (data.empty()) return {0.0, 0.0};
  ForwardState<Scalar> st;
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    forward_into(model, ex.workload, st);
    const auto y = static_cast<std::size_t>(ex.label);
    loss -= std::log(std::max(static_cast<double>(st.probs[y]), 1e-30));
    if (argmax<Scalar>(st.logits) == ex.label) ++correct;
  }
  const auto n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

struct TrainResult {
  RecModel model;
  std::vector<EpochMetrics> history;
};

/// Minibatch Adam on softmax cross-entropy. `validation` may be empty.
inline TrainResult train(const std::vector<LabeledSample>& training, const std::vector<LabeledSample>& validation,
                         const ConfigSpace& space, const TrainConfig& cfg) {
  validate(cfg);
  if (training.empty()) throw ValidationError("training set is empty");
  for (const auto* set : {&training, &validation}) {
    for (const auto& s : *set) {
      if (s.class_id < 0 || static_cast<std::size_t>(s.class_id) >= space.size()) {
        throw ValidationError("sample label " + std::to_string(s.class_id) +
                              " is outside the configuration space");
      }
    }
  }

  ModelDims dims;
  dims.embed_dim = cfg.embed_dim;
  dims.hidden = cfg.hidden;
  dims.classes = static_cast<Count>(space.size());
  dims.shared_embedding = cfg.shared_embedding;
  if (cfg.vocab > 0) {
    dims.vocab = cfg.vocab;
  } else {
    Count largest = 1;
    for (const auto& s : training) largest = std::max({largest, s.workload.m, s.workload.n, s.workload.k});
    dims.vocab = largest + 1;
  }

  TrainResult result{RecModel(dims, space.hash()), {}};
  Rng rng(cfg.seed);
  result.model.initialize(rng);

  auto train_set = to_examples(training);
  const auto val_set = to_examples(validation);
  AdamOptimizer<float> adam(result.model.params().size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  std::vector<float> grads;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (Count epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(train_set.begin(), train_set.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t lo = 0; lo < train_set.size(); lo += batch) {
      const std::size_t hi = std::min(train_set.size(), lo + batch);
      const std::span<const Example> mb(train_set.data() + lo, hi - lo);
      loss_sum += loss_and_grads(result.model, mb, grads, &correct) * static_cast<double>(mb.size());
      adam.step(result.model.params(), grads);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(train_set.size());
    m.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    std::tie(m.val_loss, m.val_acc) = loss_and_accuracy(result.model, std::span<const Example>(val_set));
    result.history.push_back(m);
  }
  return result;
}

inline std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& m : history) {
    os << m.epoch << ',' << io::format_double(m.train_loss) << ',' << io::format_double(m.train_acc) << ','
       << io::format_double(m.val_loss) << ',' << io::format_double(m.val_acc) << '\n';
  }
  return os.str();
}

struct EvalMetrics {
  std::size_t samples = 0;
  double accuracy = 0.0;
  double geomean_ratio = 0.0;  // oracle cycles / predicted-config cycles
  double tail_fraction = 0.0;  // share of samples with ratio < 0.5
};

/// Accuracy and runtime quality of arbitrary per-sample choices.
template <typename Chooser>
EvalMetrics evaluate_choices(const std::vector<LabeledSample>& test, const ConfigSpace& space, ReadMode mode,
                             Chooser&& choose, const EnergyParams& params = {}) {
  EvalMetrics out;
  out.samples = test.size();
  if (test.empty()) return out;
  std::size_t correct = 0, tail = 0;
  double log_sum = 0.0;
  for (const auto& s : test) {
    const ClassId pred = choose(s.workload);
    if (pred == s.class_id) ++correct;
    const auto cycles = simulate_config(s.workload, space.at(pred), mode, params, space.geometry()).cycles;
    const double ratio = static_cast<double>(s.oracle_cycles) / static_cast<double>(cycles);
    if (ratio < 0.5) ++tail;
    log_sum += std::log(ratio);
  }
  const auto n = static_cast<double>(test.size());
  out.accuracy = static_cast<double>(correct) / n;
  out.geomean_ratio = std::exp(log_sum / n);
  out.tail_fraction = static_cast<double>(tail) / n;
  return out;
}

inline EvalMetrics evaluate(const RecModel& model, const std::vector<LabeledSample>& test, const ConfigSpace& space,
                            ReadMode mode, const EnergyParams& params = {}) {
  if (model.dims().classes != static_cast<Count>(space.size())) {
    throw ValidationError("model has " + std::to_string(model.dims().classes) + " classes but the space has " +
                          std::to_string(space.size()));
  }
  return evaluate_choices(
      test, space, mode, [&](const GemmWorkload& w) { return predict(model, w); }, params);
}

// ---- model files -----------------------------------------------------------
//
// Little-endian binary:
//   magic "SARAREC\0", u32 version, u32 flags (bit 0: shared embedding),
//   u64 vocab, u64 embed_dim, u64 hidden, u64 classes, u64 space_hash,
//   u64 param_count, then param_count IEEE-754 binary32 values in the flat
//   parameter order (tables, W1, b1, W2, b2; matrices row-major).

inline constexpr char kModelMagic[8] = {'S', 'A', 'R', 'A', 'R', 'E', 'C', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() { return take(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("model file is truncated");
  }
  std::uint64_t take(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize(const RecModel& model) {
  const auto& d = model.dims();
  std::string out(kModelMagic, sizeof kModelMagic);
  detail::put_u32(out, kModelVersion);
  detail::put_u32(out, d.shared_embedding ? 1u : 0u);
  for (Count v : {d.vocab, d.embed_dim, d.hidden, d.classes}) detail::put_u64(out, static_cast<std::uint64_t>(v));
  detail::put_u64(out, model.space_hash());
  detail::put_u64(out, model.params().size());
  for (float f : model.params()) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    detail::put_u32(out, bits);
  }
  return out;
}

inline RecModel deserialize(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.raw(sizeof kModelMagic) != std::string_view(kModelMagic, sizeof kModelMagic)) {
    throw FormatError("not a recommender model file");
  }
  if (const auto v = in.u32(); v != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(v));
  }
  ModelDims d;
  d.shared_embedding = (in.u32() & 1u) != 0;
  constexpr std::uint64_t kSane = std::uint64_t{1} << 32;
  for (Count* field : {&d.vocab, &d.embed_dim, &d.hidden, &d.classes}) {
    const auto v = in.u64();
    if (v == 0 || v > kSane) throw FormatError("model dimension out of range");
    *field = static_cast<Count>(v);
  }
  const auto hash = in.u64();
  RecModel model(d, hash);
  if (in.u64() != model.params().size()) throw FormatError("parameter count does not match model dimensions");
  for (float& f : model.params()) {
    const std::uint32_t bits = in.u32();
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) throw FormatError("model contains non-finite parameters");
  }
  if (!in.done()) throw FormatError("trailing bytes after model parameters");
  return model;
}

inline void save(const RecModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(model));
}

inline RecModel load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

/// Loads a model and checks it was trained for `space`.
inline RecModel load(const std::filesystem::path& path, const ConfigSpace& space) {
  auto model = load(path);
  if (model.space_hash() != space.hash()) {
    throw FormatError(path.string() + " was trained for configuration space " + hash_hex(model.space_hash()) +
                      ", not " + hash_hex(space.hash()));
  }
  if (model.dims().classes != static_cast<Count>(space.size())) {
    throw FormatError(path.string() + ": class count does not match the configuration space");
  }
  return model;
}

}  // namespace sara
