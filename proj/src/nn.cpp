#include "icupred/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "icupred/error.hpp"

namespace icupred::nn {

using preprocess::ChannelGrid;
using preprocess::LabeledWindow;

namespace {

constexpr double kLogClip = 1e-12;

// Sub-stream tags for train().
constexpr std::uint64_t kTagInit = 0x4e49;
constexpr std::uint64_t kTagShuffle = 0x4853;
constexpr std::uint64_t kTagDropout = 0x4f44;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void apply_sigmoid(Matrix& m) {
  for (double& v : m.data) v = sigmoid(v);
}

void apply_tanh(Matrix& m) {
  for (double& v : m.data) v = std::tanh(v);
}

// z = x * W^T + h_prev * U^T + b, then the gate nonlinearity.
void gate_preactivation(const Matrix& x, const Matrix& h_prev, const Matrix& w,
                        const Matrix& u, const std::vector<double>& b, Matrix& z) {
  gemm_nt(x, w, z, false);
  gemm_nt(h_prev, u, z, true);
  add_row_bias(z, b);
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden_units <= 0) throw ValidationError("hidden_units must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ValidationError("dropout_rate must be in [0,1)");
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
  if (epochs <= 0) throw ValidationError("epochs must be positive");
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (folds <= 0) throw ValidationError("folds must be positive");
}

LstmParams LstmParams::zeros(int hidden, int input) {
  LstmParams p;
  p.hidden = hidden;
  p.input = input;
  p.w_i = p.w_f = p.w_o = p.w_g = Matrix(hidden, input);
  p.u_i = p.u_f = p.u_o = p.u_g = Matrix(hidden, hidden);
  p.b_i.assign(hidden, 0.0);
  p.b_f.assign(hidden, 0.0);
  p.b_o.assign(hidden, 0.0);
  p.b_g.assign(hidden, 0.0);
  return p;
}

LstmParams LstmParams::init(int hidden, int input, RngStream& rng) {
  LstmParams p = zeros(hidden, input);
  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Matrix* m : {&p.w_i, &p.w_f, &p.w_o, &p.w_g, &p.u_i, &p.u_f, &p.u_o, &p.u_g})
    for (double& v : m->data) v = rng.uniform(-s, s);
  std::fill(p.b_f.begin(), p.b_f.end(), 1.0);
  return p;
}

HeadParams HeadParams::zeros(int classes, int hidden) {
  HeadParams h;
  h.w = Matrix(classes, hidden);
  h.b.assign(classes, 0.0);
  return h;
}

HeadParams HeadParams::init(int classes, int hidden, RngStream& rng) {
  HeadParams h = zeros(classes, hidden);
  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : h.w.data) v = rng.uniform(-s, s);
  return h;
}

void BatchCache::resize(int n_, int steps_, int hidden_, int input_, int classes_) {
  n = n_;
  steps = steps_;
  hidden = hidden_;
  input = input_;
  classes = classes_;
  auto fit = [&](std::vector<Matrix>& v, int count, int r, int c) {
    v.resize(count);
    for (auto& m : v)
      if (m.rows != r || m.cols != c) m = Matrix(r, c);
  };
  fit(x, steps, n, input);
  fit(gate_i, steps, n, hidden);
  fit(gate_f, steps, n, hidden);
  fit(gate_o, steps, n, hidden);
  fit(gate_g, steps, n, hidden);
  fit(cell, steps, n, hidden);
  fit(cell_tanh, steps, n, hidden);
  fit(hidden_state, steps + 1, n, hidden);
  if (dropout_mask.rows != n || dropout_mask.cols != hidden) dropout_mask = Matrix(n, hidden);
  if (head_input.rows != n || head_input.cols != hidden) head_input = Matrix(n, hidden);
  if (probs.rows != n || probs.cols != classes) probs = Matrix(n, classes);
}

CellResult lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                             std::span<const double> c_prev, const LstmParams& p) {
  if (static_cast<int>(x.size()) != p.input || static_cast<int>(h_prev.size()) != p.hidden ||
      static_cast<int>(c_prev.size()) != p.hidden)
    throw ValidationError("lstm_cell_forward: shape mismatch");

  const int H = p.hidden, D = p.input;
  CellResult r;
  r.h.resize(H);
  r.c.resize(H);
  r.gate_i.resize(H);
  r.gate_f.resize(H);
  r.gate_o.resize(H);
  r.gate_g.resize(H);
  for (int j = 0; j < H; ++j) {
    double zi = p.b_i[j], zf = p.b_f[j], zo = p.b_o[j], zg = p.b_g[j];
    for (int k = 0; k < D; ++k) {
      zi += p.w_i.at(j, k) * x[k];
      zf += p.w_f.at(j, k) * x[k];
      zo += p.w_o.at(j, k) * x[k];
      zg += p.w_g.at(j, k) * x[k];
    }
    for (int k = 0; k < H; ++k) {
      zi += p.u_i.at(j, k) * h_prev[k];
      zf += p.u_f.at(j, k) * h_prev[k];
      zo += p.u_o.at(j, k) * h_prev[k];
      zg += p.u_g.at(j, k) * h_prev[k];
    }
    r.gate_i[j] = sigmoid(zi);
    r.gate_f[j] = sigmoid(zf);
    r.gate_o[j] = sigmoid(zo);
    r.gate_g[j] = std::tanh(zg);
    r.c[j] = r.gate_f[j] * c_prev[j] + r.gate_i[j] * r.gate_g[j];
    r.h[j] = r.gate_o[j] * std::tanh(r.c[j]);
  }
  return r;
}

void forward_batch(const std::vector<Matrix>& x_steps, const LstmParams& p,
                   const HeadParams& head, Task task, const DropoutContext* dropout,
                   BatchCache& cache) {
  const int steps = static_cast<int>(x_steps.size());
  if (steps == 0) throw ValidationError("forward_batch: empty sequence");
  const int n = x_steps[0].rows;
  const int classes = head.w.rows;
  if (head.w.cols != p.hidden || x_steps[0].cols != p.input)
    throw ValidationError("forward_batch: shape mismatch");
  if (classes != output_classes(task))
    throw ValidationError("forward_batch: head does not match task");

  cache.resize(n, steps, p.hidden, p.input, classes);
  cache.hidden_state[0].zero();

  Matrix z(n, p.hidden);
  for (int t = 0; t < steps; ++t) {
    cache.x[t] = x_steps[t];
    const Matrix& h_prev = cache.hidden_state[t];

    gate_preactivation(cache.x[t], h_prev, p.w_i, p.u_i, p.b_i, cache.gate_i[t]);
    apply_sigmoid(cache.gate_i[t]);
    gate_preactivation(cache.x[t], h_prev, p.w_f, p.u_f, p.b_f, cache.gate_f[t]);
    apply_sigmoid(cache.gate_f[t]);
    gate_preactivation(cache.x[t], h_prev, p.w_o, p.u_o, p.b_o, cache.gate_o[t]);
    apply_sigmoid(cache.gate_o[t]);
    gate_preactivation(cache.x[t], h_prev, p.w_g, p.u_g, p.b_g, cache.gate_g[t]);
    apply_tanh(cache.gate_g[t]);

    Matrix& c = cache.cell[t];
    Matrix& tc = cache.cell_tanh[t];
    Matrix& h = cache.hidden_state[t + 1];
    const Matrix* c_prev = t > 0 ? &cache.cell[t - 1] : nullptr;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double prev = c_prev ? c_prev->data[k] : 0.0;
      c.data[k] = cache.gate_f[t].data[k] * prev + cache.gate_i[t].data[k] * cache.gate_g[t].data[k];
      tc.data[k] = std::tanh(c.data[k]);
      h.data[k] = cache.gate_o[t].data[k] * tc.data[k];
    }
  }

  // Dropout on the final hidden state only, inverted scaling.
  const bool drop = dropout != nullptr && dropout->rate > 0.0;
  if (drop) {
    const double keep = 1.0 - dropout->rate;
    for (double& v : cache.dropout_mask.data)
      v = dropout->rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  } else {
    std::fill(cache.dropout_mask.data.begin(), cache.dropout_mask.data.end(), 1.0);
  }
  const Matrix& h_final = cache.hidden_state[steps];
  for (std::size_t k = 0; k < cache.head_input.size(); ++k)
    cache.head_input.data[k] = h_final.data[k] * cache.dropout_mask.data[k];

  gemm_nt(cache.head_input, head.w, cache.probs, false);
  add_row_bias(cache.probs, head.b);

  if (task == Task::binary) {
    apply_sigmoid(cache.probs);
  } else {
    for (int i = 0; i < n; ++i) {
      double* row = cache.probs.row(i);
      const double mx = *std::max_element(row, row + classes);
      double sum = 0.0;
      for (int j = 0; j < classes; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (int j = 0; j < classes; ++j) row[j] /= sum;
    }
  }
  if (!all_finite(cache.probs))
    throw Error("forward_batch: non-finite output (diverged parameters?)");
}

ForwardResult forward_sequence(const ChannelGrid& grid, const LstmParams& p,
                               const HeadParams& head, Task task,
                               const DropoutContext* dropout) {
  if (grid.values.cols != p.input)
    throw ValidationError("forward_sequence: grid width does not match input size");
  std::vector<Matrix> x_steps(grid.frame_hours);
  for (int t = 0; t < grid.frame_hours; ++t) {
    x_steps[t] = Matrix(1, p.input);
    std::copy(grid.values.row(t), grid.values.row(t) + p.input, x_steps[t].row(0));
  }
  ForwardResult r;
  forward_batch(x_steps, p, head, task, dropout, r.cache);
  r.probs.assign(r.cache.probs.row(0), r.cache.probs.row(0) + r.cache.classes);
  return r;
}

double loss(std::span<const double> probs, int label, Task task) {
  auto clipped_log = [](double p) {
    return std::log(std::clamp(p, kLogClip, 1.0 - kLogClip));
  };
  if (task == Task::binary) {
    const double p = probs[0];
    return label == 1 ? -clipped_log(p) : -std::log(std::clamp(1.0 - p, kLogClip, 1.0 - kLogClip));
  }
  return -clipped_log(probs[label]);
}

Gradients backward_batch(const BatchCache& cache, std::span<const int> labels, Task task,
                         const LstmParams& p, const HeadParams& head) {
  const int n = cache.n, H = cache.hidden, steps = cache.steps, classes = cache.classes;
  if (static_cast<int>(labels.size()) != n)
    throw ValidationError("backward_batch: label count mismatch");

  Gradients g;
  g.lstm = LstmParams::zeros(H, cache.input);
  g.head = HeadParams::zeros(classes, H);

  // d(mean loss)/d(logits) for both heads is (p - onehot(y)) / n.
  Matrix dlogits(n, classes);
  for (int i = 0; i < n; ++i) {
    const double* prow = cache.probs.row(i);
    double* drow = dlogits.row(i);
    if (task == Task::binary) {
      drow[0] = (prow[0] - static_cast<double>(labels[i])) / n;
    } else {
      for (int j = 0; j < classes; ++j)
        drow[j] = (prow[j] - (labels[i] == j ? 1.0 : 0.0)) / n;
    }
  }

  gemm_tn(dlogits, cache.head_input, g.head.w, false);
  accumulate_col_sums(dlogits, g.head.b);

  Matrix dh(n, H);
  gemm_nn(dlogits, head.w, dh, false);
  // undo the dropout scaling applied to the head input
  for (std::size_t k = 0; k < dh.size(); ++k) dh.data[k] *= cache.dropout_mask.data[k];

  Matrix dc(n, H);
  Matrix dzi(n, H), dzf(n, H), dzo(n, H), dzg(n, H);
  for (int t = steps - 1; t >= 0; --t) {
    const Matrix& gi = cache.gate_i[t];
    const Matrix& gf = cache.gate_f[t];
    const Matrix& go = cache.gate_o[t];
    const Matrix& gg = cache.gate_g[t];
    const Matrix& tc = cache.cell_tanh[t];
    const Matrix* c_prev = t > 0 ? &cache.cell[t - 1] : nullptr;

    for (std::size_t k = 0; k < dh.size(); ++k) {
      const double dht = dh.data[k];
      const double dzo_pre = dht * tc.data[k];
      dzo.data[k] = dzo_pre * go.data[k] * (1.0 - go.data[k]);
      const double dct = dc.data[k] + dht * go.data[k] * (1.0 - tc.data[k] * tc.data[k]);
      const double prev = c_prev ? c_prev->data[k] : 0.0;
      dzf.data[k] = dct * prev * gf.data[k] * (1.0 - gf.data[k]);
      dzi.data[k] = dct * gg.data[k] * gi.data[k] * (1.0 - gi.data[k]);
      dzg.data[k] = dct * gi.data[k] * (1.0 - gg.data[k] * gg.data[k]);
      dc.data[k] = dct * gf.data[k];  // carried to t-1
    }

    const Matrix& h_prev = cache.hidden_state[t];
    gemm_tn(dzi, cache.x[t], g.lstm.w_i, true);
    gemm_tn(dzf, cache.x[t], g.lstm.w_f, true);
    gemm_tn(dzo, cache.x[t], g.lstm.w_o, true);
    gemm_tn(dzg, cache.x[t], g.lstm.w_g, true);
    gemm_tn(dzi, h_prev, g.lstm.u_i, true);
    gemm_tn(dzf, h_prev, g.lstm.u_f, true);
    gemm_tn(dzo, h_prev, g.lstm.u_o, true);
    gemm_tn(dzg, h_prev, g.lstm.u_g, true);
    accumulate_col_sums(dzi, g.lstm.b_i);
    accumulate_col_sums(dzf, g.lstm.b_f);
    accumulate_col_sums(dzo, g.lstm.b_o);
    accumulate_col_sums(dzg, g.lstm.b_g);

    gemm_nn(dzi, p.u_i, dh, false);
    gemm_nn(dzf, p.u_f, dh, true);
    gemm_nn(dzo, p.u_o, dh, true);
    gemm_nn(dzg, p.u_g, dh, true);
  }
  return g;
}

Gradients backward_bptt(const BatchCache& cache, int label, Task task, const LstmParams& p,
                        const HeadParams& head) {
  const int labels[1] = {label};
  return backward_batch(cache, labels, task, p, head);
}

std::vector<TensorRef> tensor_refs(LstmParams& p, HeadParams& head) {
  return {
      {"w_i", p.w_i.data.data(), p.w_i.size()},
      {"w_f", p.w_f.data.data(), p.w_f.size()},
      {"w_o", p.w_o.data.data(), p.w_o.size()},
      {"w_g", p.w_g.data.data(), p.w_g.size()},
      {"u_i", p.u_i.data.data(), p.u_i.size()},
      {"u_f", p.u_f.data.data(), p.u_f.size()},
      {"u_o", p.u_o.data.data(), p.u_o.size()},
      {"u_g", p.u_g.data.data(), p.u_g.size()},
      {"b_i", p.b_i.data(), p.b_i.size()},
      {"b_f", p.b_f.data(), p.b_f.size()},
      {"b_o", p.b_o.data(), p.b_o.size()},
      {"b_g", p.b_g.data(), p.b_g.size()},
      {"head_w", head.w.data.data(), head.w.size()},
      {"head_b", head.b.data(), head.b.size()},
  };
}

double clip_gradients(Gradients& grads, double max_norm) {
  const auto refs = tensor_refs(grads.lstm, grads.head);
  double sq = 0.0;
  for (const auto& r : refs)
    for (std::size_t k = 0; k < r.size; ++k) sq += r.data[k] * r.data[k];
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const auto& r : refs)
      for (std::size_t k = 0; k < r.size; ++k) r.data[k] *= scale;
  }
  return norm;
}

void adam_step(LstmParams& p, HeadParams& head, const Gradients& grads, AdamState& state,
               double learning_rate) {
  auto params = tensor_refs(p, head);
  auto grad_refs = tensor_refs(const_cast<LstmParams&>(grads.lstm),
                               const_cast<HeadParams&>(grads.head));
  std::size_t total = 0;
  for (const auto& r : params) total += r.size;
  if (state.m.empty()) {
    state.m.assign(total, 0.0);
    state.v.assign(total, 0.0);
  }
  if (state.m.size() != total) throw ValidationError("adam_step: state size mismatch");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));

  std::size_t offset = 0;
  for (std::size_t r = 0; r < params.size(); ++r) {
    double* theta = params[r].data;
    const double* grad = grad_refs[r].data;
    for (std::size_t k = 0; k < params[r].size; ++k) {
      double& m = state.m[offset + k];
      double& v = state.v[offset + k];
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad[k];
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad[k] * grad[k];
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      theta[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
    offset += params[r].size;
  }
}

namespace {

int label_for(const LabeledWindow& w, Task task) {
  if (task == Task::binary) return w.mortality_label;
  if (!w.los_class) throw ValidationError("train: multiclass window without los_class");
  return *w.los_class;
}

}  // namespace

TrainedModel train(const std::vector<LabeledWindow>& windows, Task task, const ModelConfig& cfg,
                   const preprocess::ChannelStats& stats) {
  cfg.validate();
  if (windows.empty()) throw ValidationError("train: empty training set");
  const int frame = windows.front().grid.frame_hours;
  for (const auto& w : windows)
    if (w.grid.frame_hours != frame)
      throw ValidationError("train: windows mix frame lengths");

  const int N = static_cast<int>(windows.size());
  const int D = data::kNumChannels;
  const int H = cfg.hidden_units;
  const int classes = output_classes(task);

  std::vector<int> labels(N);
  for (int i = 0; i < N; ++i) labels[i] = label_for(windows[i], task);

  RngStream init_rng(derive_seed(cfg.seed, kTagInit));
  RngStream shuffle_rng(derive_seed(cfg.seed, kTagShuffle));
  RngStream dropout_rng(derive_seed(cfg.seed, kTagDropout));

  TrainedModel model;
  model.task = task;
  model.frame_hours = frame;
  model.stats = stats;
  model.lstm = LstmParams::init(H, D, init_rng);
  model.head = HeadParams::init(classes, H, init_rng);

  AdamState adam;
  BatchCache cache;
  DropoutContext dropout{cfg.dropout_rate, &dropout_rng};

  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Matrix> x_steps;
  std::vector<int> batch_labels;

  model.training_log.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < N; start += cfg.batch_size) {
      const int nb = std::min(cfg.batch_size, N - start);
      x_steps.assign(frame, Matrix(nb, D));
      batch_labels.resize(nb);
      for (int b = 0; b < nb; ++b) {
        const int idx = order[start + b];
        batch_labels[b] = labels[idx];
        const Matrix& v = windows[idx].grid.values;
        for (int t = 0; t < frame; ++t)
          std::copy(v.row(t), v.row(t) + D, x_steps[t].row(b));
      }

      forward_batch(x_steps, model.lstm, model.head, task,
                    cfg.dropout_rate > 0.0 ? &dropout : nullptr, cache);

      double batch_loss = 0.0;
      for (int b = 0; b < nb; ++b) {
        std::span<const double> probs(cache.probs.row(b), static_cast<std::size_t>(classes));
        batch_loss += loss(probs, batch_labels[b], task);
      }
      batch_loss /= nb;
      if (!std::isfinite(batch_loss))
        throw Error("train: diverged (non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch starting at " + std::to_string(start) + ")");
      epoch_loss += batch_loss * nb;

      Gradients grads = backward_batch(cache, batch_labels, task, model.lstm, model.head);
      clip_gradients(grads, kGradClipNorm);
      adam_step(model.lstm, model.head, grads, adam, cfg.learning_rate);
    }
    model.training_log.push_back(epoch_loss / N);
  }
  return model;
}

std::vector<double> predict(const TrainedModel& model, const ChannelGrid& grid) {
  if (grid.frame_hours != model.frame_hours)
    throw ValidationError("predict: grid frame length " + std::to_string(grid.frame_hours) +
                          " does not match trained frame " + std::to_string(model.frame_hours));
  return forward_sequence(grid, model.lstm, model.head, model.task).probs;
}

int decide_binary(double p) { return p >= 0.5 ? 1 : 0; }

int decide_multiclass(std::span<const double> probs) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(probs.size()); ++j)
    if (probs[j] > probs[best]) best = j;
  return best;
}

namespace {

constexpr char kModelMagic[8] = {'I', 'C', 'U', 'P', 'R', 'E', 'D', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(kModelMagic, sizeof(kModelMagic));
  write_pod(out, kModelVersion);
  write_pod(out, static_cast<std::uint8_t>(model.task == Task::binary ? 0 : 1));
  write_pod(out, static_cast<std::uint32_t>(model.frame_hours));
  write_pod(out, static_cast<std::uint32_t>(model.lstm.hidden));
  write_pod(out, static_cast<std::uint32_t>(model.lstm.input));
  write_pod(out, static_cast<std::uint32_t>(model.head.w.rows));
  write_doubles(out, model.stats.mean.data(), model.stats.mean.size());
  write_doubles(out, model.stats.stddev.data(), model.stats.stddev.size());
  auto& mutable_model = const_cast<TrainedModel&>(model);
  for (const auto& r : tensor_refs(mutable_model.lstm, mutable_model.head)) {
    write_pod(out, static_cast<std::uint64_t>(r.size));
    write_doubles(out, r.data, r.size);
  }
  write_pod(out, static_cast<std::uint64_t>(model.training_log.size()));
  write_doubles(out, model.training_log.data(), model.training_log.size());
  if (!out) throw Error("failed writing model to '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw Error("'" + path + "' is not a model file");
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kModelVersion)
    throw Error("unsupported model version " + std::to_string(version));
  std::uint8_t task_tag = 0;
  std::uint32_t frame = 0, hidden = 0, input = 0, classes = 0;
  read_pod(in, task_tag);
  read_pod(in, frame);
  read_pod(in, hidden);
  read_pod(in, input);
  read_pod(in, classes);

  TrainedModel model;
  model.task = task_tag == 0 ? Task::binary : Task::multiclass4;
  model.frame_hours = static_cast<int>(frame);
  read_doubles(in, model.stats.mean.data(), model.stats.mean.size());
  read_doubles(in, model.stats.stddev.data(), model.stats.stddev.size());
  model.lstm = LstmParams::zeros(static_cast<int>(hidden), static_cast<int>(input));
  model.head = HeadParams::zeros(static_cast<int>(classes), static_cast<int>(hidden));
  for (const auto& r : tensor_refs(model.lstm, model.head)) {
    std::uint64_t size = 0;
    read_pod(in, size);
    if (size != r.size) throw Error("model file tensor size mismatch for " + std::string(r.name));
    read_doubles(in, r.data, r.size);
  }
  std::uint64_t log_len = 0;
  read_pod(in, log_len);
  model.training_log.resize(log_len);
  read_doubles(in, model.training_log.data(), model.training_log.size());
  if (!in) throw Error("truncated model file '" + path + "'");
  return model;
}

}  // namespace icupred::nn
