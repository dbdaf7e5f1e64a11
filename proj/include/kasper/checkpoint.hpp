#pragma once

// Versioned text checkpoint: training config, seed, embedding table, the
// train-split exemplars (for knn/fuzzy), and the trained net. Doubles are
// stored as C hexfloats so save -> load -> save round-trips bit-exactly.
// Layout is documented in docs/checkpoint_format.md.

#include <optional>
#include <string>

#include "kasper/intent.hpp"
#include "kasper/neural.hpp"

namespace kasper::intent {

struct CheckpointError : IntentError {
  using IntentError::IntentError;
};
struct AlgorithmUnavailable : IntentError {
  explicit AlgorithmUnavailable(const std::string& algo)
      : IntentError("algorithm not in checkpoint: " + algo) {}
};

struct ModelBundle {
  EmbeddingTable table;
  Dataset exemplars;  // train split, drives knn/fuzzy
  std::optional<CnnModel> cnn;
  std::optional<RnnModel> rnn;
  std::string default_algo = "cnn";
  int knn_k = 5;
};

void save_checkpoint(const ModelBundle& bundle, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

bool is_known_algorithm(const std::string& algo);  // cnn|rnn|knn|fuzzy

// Classifies via the named algorithm (empty = bundle default); throws
// AlgorithmUnavailable when the checkpoint lacks the requested net.
Prediction classify_with(const ModelBundle& bundle, const std::string& algo,
                         const std::string& text);

}  // namespace kasper::intent
