#include "kasper/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kasper/rng.hpp"

namespace kasper::intent {

MissingClassInTrain::MissingClassInTrain(int class_idx)
    : IntentError("class missing from training split: " + std::string(class_label(class_idx))) {}

std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& logits) {
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  std::array<double, kNumClasses> probs{};
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    probs[static_cast<std::size_t>(c)] = std::exp(logits[static_cast<std::size_t>(c)] - max_logit);
    sum += probs[static_cast<std::size_t>(c)];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

void ensure_all_classes_present(const Dataset& train) {
  if (train.examples.empty()) throw EmptyTrainingSet();
  std::array<bool, kNumClasses> present{};
  for (const auto& ex : train.examples) present[static_cast<std::size_t>(ex.label)] = true;
  for (int c = 0; c < kNumClasses; ++c) {
    if (!present[static_cast<std::size_t>(c)]) throw MissingClassInTrain(c);
  }
}

double embedding_rms(const EmbeddingTable& table) {
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& row : table.rows) {
    for (double v : row) {
      sum_sq += v * v;
      ++count;
    }
  }
  if (count == 0) return 1.0;
  const double rms = std::sqrt(sum_sq / static_cast<double>(count));
  return rms > 0.0 ? rms : 1.0;
}

namespace {

void check_trainable(const Dataset& train) {
  if (train.examples.empty()) throw EmptyTrainingSet();
  for (const auto& ex : train.examples) {
    if (ex.label < 0 || ex.label >= kNumClasses) {
      throw IntentError("training label out of range");
    }
  }
}

std::vector<std::vector<double>> padded(const std::vector<std::vector<double>>& vecs, int width,
                                        int dim, double scale) {
  std::vector<std::vector<double>> seq = vecs;
  for (auto& v : seq) {
    for (double& x : v) x *= scale;
  }
  while (seq.size() < static_cast<std::size_t>(width)) {
    seq.emplace_back(static_cast<std::size_t>(dim), 0.0);
  }
  return seq;
}

struct CnnTrace {
  // per pooled unit: best pre-activation value and its position
  std::vector<double> best_preact;
  std::vector<int> best_pos;
  std::vector<double> pooled;
  std::array<double, kNumClasses> logits{};
  std::array<double, kNumClasses> probs{};
};

CnnTrace cnn_trace(const CnnModel& model, const std::vector<std::vector<double>>& token_vecs) {
  const int dim = model.dim;
  const int f_count = model.filters_per_width;
  const std::size_t pooled_size = model.widths.size() * static_cast<std::size_t>(f_count);

  CnnTrace trace;
  trace.best_preact.assign(pooled_size, 0.0);
  trace.best_pos.assign(pooled_size, 0);
  trace.pooled.assign(pooled_size, 0.0);

  for (std::size_t wi = 0; wi < model.widths.size(); ++wi) {
    const int width = model.widths[wi];
    const auto seq = padded(token_vecs, width, dim, model.input_scale);
    const int positions = static_cast<int>(seq.size()) - width + 1;
    const auto& bank = model.filters[wi];
    const auto& bias = model.filter_bias[wi];

    for (int f = 0; f < f_count; ++f) {
      double best = -std::numeric_limits<double>::infinity();
      int best_p = 0;
      for (int p = 0; p < positions; ++p) {
        double act = bias[static_cast<std::size_t>(f)];
        for (int i = 0; i < width; ++i) {
          const auto& x = seq[static_cast<std::size_t>(p + i)];
          const std::size_t base = static_cast<std::size_t>((f * width + i) * dim);
          for (int d = 0; d < dim; ++d) {
            act += bank[base + static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
          }
        }
        if (act > best) {
          best = act;
          best_p = p;
        }
      }
      const std::size_t j = wi * static_cast<std::size_t>(f_count) + static_cast<std::size_t>(f);
      trace.best_preact[j] = best;
      trace.best_pos[j] = best_p;
      trace.pooled[j] = std::max(0.0, best);  // max-over-time of ReLU = ReLU of max
    }
  }

  for (int c = 0; c < kNumClasses; ++c) {
    double logit = model.dense_b[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < pooled_size; ++j) {
      logit += trace.pooled[j] * model.dense_w[j * kNumClasses + static_cast<std::size_t>(c)];
    }
    trace.logits[static_cast<std::size_t>(c)] = logit;
  }
  trace.probs = softmax(trace.logits);
  return trace;
}

}  // namespace

CnnModel init_cnn(int dim, const TrainConfig& config) {
  if (dim <= 0) throw IntentError("embedding dimension must be positive");
  if (config.filters_per_width <= 0) throw IntentError("filter count must be positive");
  CnnModel model;
  model.dim = dim;
  model.filters_per_width = config.filters_per_width;
  model.config = config;

  DetRng rng(config.seed);
  const int f_count = model.filters_per_width;
  for (int width : model.widths) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(width * dim));
    std::vector<double> bank(static_cast<std::size_t>(f_count * width * dim));
    for (double& v : bank) v = rng.next_in(-scale, scale);
    model.filters.push_back(std::move(bank));
    model.filter_bias.emplace_back(static_cast<std::size_t>(f_count), 0.0);
  }
  const std::size_t pooled_size = model.widths.size() * static_cast<std::size_t>(f_count);
  const double dense_scale = 1.0 / std::sqrt(static_cast<double>(pooled_size));
  model.dense_w.resize(pooled_size * kNumClasses);
  for (double& v : model.dense_w) v = rng.next_in(-dense_scale, dense_scale);
  model.dense_b.assign(kNumClasses, 0.0);
  return model;
}

std::array<double, kNumClasses> cnn_forward(const CnnModel& model,
                                            const std::vector<std::vector<double>>& token_vecs) {
  return cnn_trace(model, token_vecs).probs;
}

std::vector<double> cnn_pooled_features(const CnnModel& model,
                                        const std::vector<std::vector<double>>& token_vecs) {
  return cnn_trace(model, token_vecs).pooled;
}

double cnn_loss_and_gradients(const CnnModel& model,
                              const std::vector<std::vector<double>>& token_vecs, int label,
                              CnnGradients* grads) {
  const CnnTrace trace = cnn_trace(model, token_vecs);
  const double loss = -std::log(trace.probs[static_cast<std::size_t>(label)]);
  if (!grads) return loss;

  const int dim = model.dim;
  const int f_count = model.filters_per_width;
  const std::size_t pooled_size = trace.pooled.size();

  grads->filters.clear();
  grads->filter_bias.clear();
  for (std::size_t wi = 0; wi < model.widths.size(); ++wi) {
    grads->filters.emplace_back(model.filters[wi].size(), 0.0);
    grads->filter_bias.emplace_back(model.filter_bias[wi].size(), 0.0);
  }
  grads->dense_w.assign(model.dense_w.size(), 0.0);
  grads->dense_b.assign(model.dense_b.size(), 0.0);

  std::array<double, kNumClasses> dlogits{};
  for (int c = 0; c < kNumClasses; ++c) {
    dlogits[static_cast<std::size_t>(c)] =
        trace.probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);
  }

  std::vector<double> dpooled(pooled_size, 0.0);
  for (std::size_t j = 0; j < pooled_size; ++j) {
    for (int c = 0; c < kNumClasses; ++c) {
      const std::size_t ci = static_cast<std::size_t>(c);
      grads->dense_w[j * kNumClasses + ci] += trace.pooled[j] * dlogits[ci];
      dpooled[j] += model.dense_w[j * kNumClasses + ci] * dlogits[ci];
    }
  }
  for (int c = 0; c < kNumClasses; ++c) {
    grads->dense_b[static_cast<std::size_t>(c)] = dlogits[static_cast<std::size_t>(c)];
  }

  for (std::size_t wi = 0; wi < model.widths.size(); ++wi) {
    const int width = model.widths[wi];
    const auto seq = padded(token_vecs, width, dim, model.input_scale);
    for (int f = 0; f < f_count; ++f) {
      const std::size_t j = wi * static_cast<std::size_t>(f_count) + static_cast<std::size_t>(f);
      if (trace.best_preact[j] <= 0.0) continue;  // ReLU gate closed
      const double g = dpooled[j];
      const int p = trace.best_pos[j];
      grads->filter_bias[wi][static_cast<std::size_t>(f)] += g;
      for (int i = 0; i < width; ++i) {
        const auto& x = seq[static_cast<std::size_t>(p + i)];
        const std::size_t base = static_cast<std::size_t>((f * width + i) * dim);
        for (int d = 0; d < dim; ++d) {
          grads->filters[wi][base + static_cast<std::size_t>(d)] +=
              g * x[static_cast<std::size_t>(d)];
        }
      }
    }
  }
  return loss;
}

namespace {

// per-example global-norm clip; keeps plain SGD stable through the
// ReLU/max-pool and BPTT feedback paths
constexpr double kGradClipNorm = 5.0;

double clip_factor(const std::vector<const double*>& grads) {
  double norm_sq = 0.0;
  for (const double* g : grads) norm_sq += *g * *g;
  const double norm = std::sqrt(norm_sq);
  return norm > kGradClipNorm ? kGradClipNorm / norm : 1.0;
}

template <typename Model, typename Grads, typename LossFn, typename UpdateFn>
Model train_loop(Model model, const Dataset& train, const EmbeddingTable& table,
                 const TrainConfig& config, DetRng& rng, LossFn loss_fn, UpdateFn update_fn) {
  std::vector<std::size_t> order(train.examples.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::vector<std::vector<double>>> inputs;
  inputs.reserve(train.examples.size());
  for (const auto& ex : train.examples) inputs.push_back(table.embed(tokenize(ex.text)));

  Grads grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    for (std::size_t idx : order) {
      const double loss = loss_fn(model, inputs[idx], train.examples[idx].label, &grads);
      if (!std::isfinite(loss)) throw NonFiniteLoss();
      update_fn(model, grads, config.learning_rate * clip_factor(gradient_refs(grads)));
    }
  }
  return model;
}

}  // namespace

CnnModel train_cnn(const Dataset& train, const EmbeddingTable& table, const TrainConfig& config) {
  check_trainable(train);
  CnnModel model = init_cnn(table.dim, config);
  model.input_scale = 1.0 / embedding_rms(table);
  DetRng rng(config.seed ^ 0xC0FFEEull);  // separate stream from init
  return train_loop<CnnModel, CnnGradients>(
      std::move(model), train, table, config, rng,
      [](const CnnModel& m, const std::vector<std::vector<double>>& x, int y, CnnGradients* g) {
        return cnn_loss_and_gradients(m, x, y, g);
      },
      [](CnnModel& m, const CnnGradients& g, double lr) {
        for (std::size_t wi = 0; wi < m.filters.size(); ++wi) {
          for (std::size_t i = 0; i < m.filters[wi].size(); ++i)
            m.filters[wi][i] -= lr * g.filters[wi][i];
          for (std::size_t i = 0; i < m.filter_bias[wi].size(); ++i)
            m.filter_bias[wi][i] -= lr * g.filter_bias[wi][i];
        }
        for (std::size_t i = 0; i < m.dense_w.size(); ++i) m.dense_w[i] -= lr * g.dense_w[i];
        for (std::size_t i = 0; i < m.dense_b.size(); ++i) m.dense_b[i] -= lr * g.dense_b[i];
      });
}

Prediction predict(const CnnModel& model, const std::string& text, const EmbeddingTable& table) {
  const auto probs = cnn_forward(model, table.embed(tokenize(text)));
  return make_prediction(probs);
}

// ---- RNN --------------------------------------------------------------------

RnnModel init_rnn(int dim, const TrainConfig& config) {
  if (dim <= 0) throw IntentError("embedding dimension must be positive");
  if (config.hidden_size <= 0) throw IntentError("hidden size must be positive");
  RnnModel model;
  model.dim = dim;
  model.hidden = config.hidden_size;
  model.config = config;

  DetRng rng(config.seed);
  const int h = model.hidden;
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  const double rec_scale = 1.0 / std::sqrt(static_cast<double>(h));
  model.w_xh.resize(static_cast<std::size_t>(dim * h));
  for (double& v : model.w_xh) v = rng.next_in(-in_scale, in_scale);
  model.w_hh.resize(static_cast<std::size_t>(h * h));
  for (double& v : model.w_hh) v = rng.next_in(-rec_scale, rec_scale);
  model.b_h.assign(static_cast<std::size_t>(h), 0.0);
  model.w_hy.resize(static_cast<std::size_t>(h * kNumClasses));
  for (double& v : model.w_hy) v = rng.next_in(-rec_scale, rec_scale);
  model.b_y.assign(kNumClasses, 0.0);
  return model;
}

namespace {

struct RnnTrace {
  std::vector<std::vector<double>> inputs;   // after empty-sentence padding
  std::vector<std::vector<double>> hiddens;  // hiddens[t] after step t, t in [0, T)
  std::array<double, kNumClasses> logits{};
  std::array<double, kNumClasses> probs{};
};

RnnTrace rnn_trace(const RnnModel& model, const std::vector<std::vector<double>>& token_vecs) {
  RnnTrace trace;
  trace.inputs = token_vecs;
  for (auto& v : trace.inputs) {
    for (double& x : v) x *= model.input_scale;
  }
  if (trace.inputs.empty()) {
    trace.inputs.emplace_back(static_cast<std::size_t>(model.dim), 0.0);
  }
  const int h_size = model.hidden;

  std::vector<double> h_prev(static_cast<std::size_t>(h_size), 0.0);
  for (const auto& x : trace.inputs) {
    std::vector<double> h(static_cast<std::size_t>(h_size), 0.0);
    for (int j = 0; j < h_size; ++j) {
      double a = model.b_h[static_cast<std::size_t>(j)];
      for (int d = 0; d < model.dim; ++d) {
        a += x[static_cast<std::size_t>(d)] *
             model.w_xh[static_cast<std::size_t>(d * h_size + j)];
      }
      for (int p = 0; p < h_size; ++p) {
        a += h_prev[static_cast<std::size_t>(p)] *
             model.w_hh[static_cast<std::size_t>(p * h_size + j)];
      }
      h[static_cast<std::size_t>(j)] = std::tanh(a);
    }
    trace.hiddens.push_back(h);
    h_prev = std::move(h);
  }

  const auto& last = trace.hiddens.back();
  for (int c = 0; c < kNumClasses; ++c) {
    double logit = model.b_y[static_cast<std::size_t>(c)];
    for (int j = 0; j < h_size; ++j) {
      logit += last[static_cast<std::size_t>(j)] *
               model.w_hy[static_cast<std::size_t>(j * kNumClasses + c)];
    }
    trace.logits[static_cast<std::size_t>(c)] = logit;
  }
  trace.probs = softmax(trace.logits);
  return trace;
}

}  // namespace

std::array<double, kNumClasses> rnn_forward(const RnnModel& model,
                                            const std::vector<std::vector<double>>& token_vecs) {
  return rnn_trace(model, token_vecs).probs;
}

double rnn_loss_and_gradients(const RnnModel& model,
                              const std::vector<std::vector<double>>& token_vecs, int label,
                              RnnGradients* grads) {
  const RnnTrace trace = rnn_trace(model, token_vecs);
  const double loss = -std::log(trace.probs[static_cast<std::size_t>(label)]);
  if (!grads) return loss;

  const int h_size = model.hidden;
  const int dim = model.dim;
  grads->w_xh.assign(model.w_xh.size(), 0.0);
  grads->w_hh.assign(model.w_hh.size(), 0.0);
  grads->b_h.assign(model.b_h.size(), 0.0);
  grads->w_hy.assign(model.w_hy.size(), 0.0);
  grads->b_y.assign(model.b_y.size(), 0.0);

  std::array<double, kNumClasses> dlogits{};
  for (int c = 0; c < kNumClasses; ++c) {
    dlogits[static_cast<std::size_t>(c)] =
        trace.probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);
  }

  const auto& last = trace.hiddens.back();
  std::vector<double> dh(static_cast<std::size_t>(h_size), 0.0);
  for (int j = 0; j < h_size; ++j) {
    for (int c = 0; c < kNumClasses; ++c) {
      const std::size_t idx = static_cast<std::size_t>(j * kNumClasses + c);
      grads->w_hy[idx] += last[static_cast<std::size_t>(j)] * dlogits[static_cast<std::size_t>(c)];
      dh[static_cast<std::size_t>(j)] += model.w_hy[idx] * dlogits[static_cast<std::size_t>(c)];
    }
  }
  for (int c = 0; c < kNumClasses; ++c) {
    grads->b_y[static_cast<std::size_t>(c)] = dlogits[static_cast<std::size_t>(c)];
  }

  for (int t = static_cast<int>(trace.hiddens.size()) - 1; t >= 0; --t) {
    const auto& h = trace.hiddens[static_cast<std::size_t>(t)];
    const auto& x = trace.inputs[static_cast<std::size_t>(t)];
    std::vector<double> da(static_cast<std::size_t>(h_size));
    for (int j = 0; j < h_size; ++j) {
      const double hj = h[static_cast<std::size_t>(j)];
      da[static_cast<std::size_t>(j)] = dh[static_cast<std::size_t>(j)] * (1.0 - hj * hj);
    }
    std::vector<double> dh_prev(static_cast<std::size_t>(h_size), 0.0);
    for (int j = 0; j < h_size; ++j) {
      const double daj = da[static_cast<std::size_t>(j)];
      grads->b_h[static_cast<std::size_t>(j)] += daj;
      for (int d = 0; d < dim; ++d) {
        grads->w_xh[static_cast<std::size_t>(d * h_size + j)] +=
            x[static_cast<std::size_t>(d)] * daj;
      }
      if (t > 0) {
        const auto& prev = trace.hiddens[static_cast<std::size_t>(t - 1)];
        for (int p = 0; p < h_size; ++p) {
          grads->w_hh[static_cast<std::size_t>(p * h_size + j)] +=
              prev[static_cast<std::size_t>(p)] * daj;
          dh_prev[static_cast<std::size_t>(p)] +=
              model.w_hh[static_cast<std::size_t>(p * h_size + j)] * daj;
        }
      }
      // initial hidden state is the zero constant; nothing flows further back
    }
    dh = std::move(dh_prev);
  }
  return loss;
}

RnnModel train_rnn(const Dataset& train, const EmbeddingTable& table, const TrainConfig& config) {
  check_trainable(train);
  RnnModel model = init_rnn(table.dim, config);
  model.input_scale = 1.0 / embedding_rms(table);
  DetRng rng(config.seed ^ 0xC0FFEEull);
  return train_loop<RnnModel, RnnGradients>(
      std::move(model), train, table, config, rng,
      [](const RnnModel& m, const std::vector<std::vector<double>>& x, int y, RnnGradients* g) {
        return rnn_loss_and_gradients(m, x, y, g);
      },
      [](RnnModel& m, const RnnGradients& g, double lr) {
        for (std::size_t i = 0; i < m.w_xh.size(); ++i) m.w_xh[i] -= lr * g.w_xh[i];
        for (std::size_t i = 0; i < m.w_hh.size(); ++i) m.w_hh[i] -= lr * g.w_hh[i];
        for (std::size_t i = 0; i < m.b_h.size(); ++i) m.b_h[i] -= lr * g.b_h[i];
        for (std::size_t i = 0; i < m.w_hy.size(); ++i) m.w_hy[i] -= lr * g.w_hy[i];
        for (std::size_t i = 0; i < m.b_y.size(); ++i) m.b_y[i] -= lr * g.b_y[i];
      });
}

Prediction predict(const RnnModel& model, const std::string& text, const EmbeddingTable& table) {
  const auto probs = rnn_forward(model, table.embed(tokenize(text)));
  return make_prediction(probs);
}

// ---- parameter access ---------------------------------------------------------

namespace {

template <typename M, typename P>
std::vector<P*> cnn_refs(M& model) {
  std::vector<P*> refs;
  for (std::size_t wi = 0; wi < model.filters.size(); ++wi) {
    for (auto& v : model.filters[wi]) refs.push_back(&v);
    for (auto& v : model.filter_bias[wi]) refs.push_back(&v);
  }
  for (auto& v : model.dense_w) refs.push_back(&v);
  for (auto& v : model.dense_b) refs.push_back(&v);
  return refs;
}

template <typename M, typename P>
std::vector<P*> rnn_refs(M& model) {
  std::vector<P*> refs;
  for (auto& v : model.w_xh) refs.push_back(&v);
  for (auto& v : model.w_hh) refs.push_back(&v);
  for (auto& v : model.b_h) refs.push_back(&v);
  for (auto& v : model.w_hy) refs.push_back(&v);
  for (auto& v : model.b_y) refs.push_back(&v);
  return refs;
}

}  // namespace

std::vector<double*> parameter_refs(CnnModel& model) { return cnn_refs<CnnModel, double>(model); }
std::vector<double*> parameter_refs(RnnModel& model) { return rnn_refs<RnnModel, double>(model); }
std::vector<const double*> parameter_refs(const CnnModel& model) {
  return cnn_refs<const CnnModel, const double>(model);
}
std::vector<const double*> parameter_refs(const RnnModel& model) {
  return rnn_refs<const RnnModel, const double>(model);
}
std::vector<const double*> gradient_refs(const CnnGradients& grads) {
  return cnn_refs<const CnnGradients, const double>(grads);
}
std::vector<const double*> gradient_refs(const RnnGradients& grads) {
  return rnn_refs<const RnnGradients, const double>(grads);
}

}  // namespace kasper::intent
