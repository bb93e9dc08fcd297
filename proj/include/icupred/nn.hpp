#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icupred/matrix.hpp"
#include "icupred/preprocess.hpp"
#include "icupred/prng.hpp"

namespace icupred::nn {

enum class Task { binary, multiclass4 };

inline int output_classes(Task task) { return task == Task::binary ? 1 : 4; }

// Gate parameters of a single LSTM layer. Input-to-hidden weights are
// hidden x input, hidden-to-hidden weights hidden x hidden.
struct LstmParams {
  int hidden = 0;
  int input = 0;
  Matrix w_i, w_f, w_o, w_g;
  Matrix u_i, u_f, u_o, u_g;
  std::vector<double> b_i, b_f, b_o, b_g;

  // uniform(-s, s) with s = 1/sqrt(hidden); all biases zero except the
  // forget-gate bias, which starts at 1 to keep early cell states stable.
  static LstmParams init(int hidden, int input, RngStream& rng);
  static LstmParams zeros(int hidden, int input);
};

// Dense output head: classes x hidden weights plus per-class bias.
struct HeadParams {
  Matrix w;
  std::vector<double> b;

  static HeadParams init(int classes, int hidden, RngStream& rng);
  static HeadParams zeros(int classes, int hidden);
};

struct ModelConfig {
  int hidden_units = 64;
  double dropout_rate = 0.2;
  double learning_rate = 1e-3;
  int epochs = 60;
  int batch_size = 100;
  int folds = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainedModel {
  Task task = Task::binary;
  int frame_hours = 0;
  LstmParams lstm;
  HeadParams head;
  preprocess::ChannelStats stats;       // normalization used at training time
  std::vector<double> training_log;     // per-epoch mean loss
};

// Single cell step; the returned gate activations are the cache needed for an
// exact backward pass.
struct CellResult {
  std::vector<double> h, c;
  std::vector<double> gate_i, gate_f, gate_o, gate_g;
};
CellResult lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                             std::span<const double> c_prev, const LstmParams& p);

// Training-time dropout on the final hidden state, inverted scaling.
struct DropoutContext {
  double rate = 0.0;
  RngStream* rng = nullptr;
};

// Everything the backward pass needs from one forward pass over a batch.
struct BatchCache {
  int n = 0, steps = 0, hidden = 0, input = 0, classes = 0;
  std::vector<Matrix> x;           // per step, n x input
  std::vector<Matrix> gate_i, gate_f, gate_o, gate_g;
  std::vector<Matrix> cell, cell_tanh;
  std::vector<Matrix> hidden_state;  // steps + 1 entries, [0] zeros
  Matrix dropout_mask;               // scaled keep mask, all ones when off
  Matrix head_input;                 // final hidden after dropout
  Matrix probs;                      // n x classes

  void resize(int n, int steps, int hidden, int input, int classes);
};

void forward_batch(const std::vector<Matrix>& x_steps, const LstmParams& p,
                   const HeadParams& head, Task task, const DropoutContext* dropout,
                   BatchCache& cache);

// Convenience single-example entry point over one normalized grid.
struct ForwardResult {
  std::vector<double> probs;  // size 1 (binary) or 4 (multiclass)
  BatchCache cache;
};
ForwardResult forward_sequence(const preprocess::ChannelGrid& grid, const LstmParams& p,
                               const HeadParams& head, Task task,
                               const DropoutContext* dropout = nullptr);

// Cross-entropy with probabilities clipped to [1e-12, 1 - 1e-12] inside the
// log only. Binary expects probs = {p(class 1)}.
double loss(std::span<const double> probs, int label, Task task);

struct Gradients {
  LstmParams lstm;
  HeadParams head;
};

// Gradients of the batch-mean loss; exact reverse-mode of forward_batch.
Gradients backward_batch(const BatchCache& cache, std::span<const int> labels, Task task,
                         const LstmParams& p, const HeadParams& head);

// Single-example wrapper matching the forward_sequence cache.
Gradients backward_bptt(const BatchCache& cache, int label, Task task, const LstmParams& p,
                        const HeadParams& head);

// Flat view over every parameter tensor, in a fixed documented order. Used by
// the optimizer, the serializer and the gradient checks.
struct TensorRef {
  const char* name;
  double* data;
  std::size_t size;
};
std::vector<TensorRef> tensor_refs(LstmParams& p, HeadParams& head);

struct AdamState {
  std::vector<double> m, v;  // flat over tensor_refs order
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;
inline constexpr double kGradClipNorm = 5.0;

void adam_step(LstmParams& p, HeadParams& head, const Gradients& grads, AdamState& state,
               double learning_rate);

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_gradients(Gradients& grads, double max_norm);

// Mini-batch training: seeded shuffle per epoch, batches of cfg.batch_size
// (last batch may be short), fresh dropout mask per example per batch,
// gradient clipping, Adam updates. Deterministic per cfg.seed. Throws on a
// non-finite loss.
TrainedModel train(const std::vector<preprocess::LabeledWindow>& windows, Task task,
                   const ModelConfig& cfg, const preprocess::ChannelStats& stats);

// Inference (dropout disabled). The grid must already be normalized with the
// model's own stats and match the trained frame length.
std::vector<double> predict(const TrainedModel& model, const preprocess::ChannelGrid& grid);

int decide_binary(double p);                        // p >= 0.5 -> 1
int decide_multiclass(std::span<const double> probs);  // argmax, lowest-index ties

// Flat binary dump: shape header, channel stats, tensors in tensor_refs
// order, training log. load(save(m)) reproduces predictions bit-exactly.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace icupred::nn
