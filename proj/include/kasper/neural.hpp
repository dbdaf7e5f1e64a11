#pragma once

// From-scratch 1-D CNN and simple RNN text classifiers: forward passes,
// analytic gradients of the cross-entropy loss, and plain SGD training.
// Training is single-threaded and bit-reproducible given (seed, config, data);
// embeddings stay frozen.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kasper/intent.hpp"

namespace kasper::intent {

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 40;
  std::uint64_t seed = 42;
  int filters_per_width = 16;  // F
  int hidden_size = 32;        // H
};

struct MissingClassInTrain : IntentError {
  explicit MissingClassInTrain(int class_idx);
};
struct NonFiniteLoss : IntentError {
  NonFiniteLoss() : IntentError("training diverged: loss is not finite") {}
};

// Full-corpus training paths call this before the trainer; degenerate sets
// (classifier research toys) may train without it.
void ensure_all_classes_present(const Dataset& train);

// ---- CNN -------------------------------------------------------------------

// RMS of all table entries; trainers divide inputs by it so the frozen
// embeddings reach the nets at unit scale regardless of the table's range.
double embedding_rms(const EmbeddingTable& table);

// Per filter width w in {2,3,4}: F filters of shape w x D, 1-D convolution
// over the token-vector sequence (zero-padded to w when shorter), ReLU,
// max-over-time pooling; the 3F pooled values feed a dense layer to 22 logits.
struct CnnModel {
  std::vector<int> widths{2, 3, 4};
  int dim = 0;
  int filters_per_width = 16;
  double input_scale = 1.0;  // token vectors are multiplied by this
  std::vector<std::vector<double>> filters;      // per width: F * w * dim, [f*w*dim + i*dim + d]
  std::vector<std::vector<double>> filter_bias;  // per width: F
  std::vector<double> dense_w;                   // (3F) * 22, [j*22 + c]
  std::vector<double> dense_b;                   // 22
  TrainConfig config;
};

struct CnnGradients {
  std::vector<std::vector<double>> filters;
  std::vector<std::vector<double>> filter_bias;
  std::vector<double> dense_w;
  std::vector<double> dense_b;
};

CnnModel init_cnn(int dim, const TrainConfig& config);

std::array<double, kNumClasses> cnn_forward(const CnnModel& model,
                                            const std::vector<std::vector<double>>& token_vecs);

// The 3F max-over-time pooled activations (widths ascending, filters in order).
std::vector<double> cnn_pooled_features(const CnnModel& model,
                                        const std::vector<std::vector<double>>& token_vecs);

// Cross-entropy loss for one example; fills grads when non-null.
double cnn_loss_and_gradients(const CnnModel& model,
                              const std::vector<std::vector<double>>& token_vecs, int label,
                              CnnGradients* grads);

CnnModel train_cnn(const Dataset& train, const EmbeddingTable& table, const TrainConfig& config);

Prediction predict(const CnnModel& model, const std::string& text, const EmbeddingTable& table);

// ---- RNN -------------------------------------------------------------------

// tanh recurrence over token vectors; the last hidden state feeds 22 logits.
// An empty sentence runs one step on the zero vector.
struct RnnModel {
  int dim = 0;
  int hidden = 32;
  double input_scale = 1.0;
  std::vector<double> w_xh;  // dim * H, [d*H + h]
  std::vector<double> w_hh;  // H * H, [prev*H + h]
  std::vector<double> b_h;   // H
  std::vector<double> w_hy;  // H * 22, [h*22 + c]
  std::vector<double> b_y;   // 22
  TrainConfig config;
};

struct RnnGradients {
  std::vector<double> w_xh, w_hh, b_h, w_hy, b_y;
};

RnnModel init_rnn(int dim, const TrainConfig& config);

std::array<double, kNumClasses> rnn_forward(const RnnModel& model,
                                            const std::vector<std::vector<double>>& token_vecs);

double rnn_loss_and_gradients(const RnnModel& model,
                              const std::vector<std::vector<double>>& token_vecs, int label,
                              RnnGradients* grads);

RnnModel train_rnn(const Dataset& train, const EmbeddingTable& table, const TrainConfig& config);

Prediction predict(const RnnModel& model, const std::string& text, const EmbeddingTable& table);

// ---- parameter access (checkpointing, gradient checks) ---------------------

// Pointers over every trainable scalar, in a fixed documented order.
std::vector<double*> parameter_refs(CnnModel& model);
std::vector<double*> parameter_refs(RnnModel& model);
std::vector<const double*> parameter_refs(const CnnModel& model);
std::vector<const double*> parameter_refs(const RnnModel& model);
std::vector<const double*> gradient_refs(const CnnGradients& grads);
std::vector<const double*> gradient_refs(const RnnGradients& grads);

// Numerically stable softmax (shared by both nets and tests).
std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& logits);

}  // namespace kasper::intent
