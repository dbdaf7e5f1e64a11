#pragma once

// Intent classification over the 22 query classes: tokenization, embedding
// tables, edit-distance fuzzy matching, and KNN, plus the shared dataset and
// evaluation harness. The CNN/RNN classifiers live in kasper/neural.hpp.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kasper::intent {

inline constexpr int kNumClasses = 22;

// Byte-exact class labels, in canonical (tie-break) order.
const std::array<std::string_view, kNumClasses>& class_labels();
int class_index(std::string_view label);  // -1 if unknown
std::string_view class_label(int index);

struct IntentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyQuery : IntentError {
  EmptyQuery() : IntentError("query text is empty") {}
};
struct EmptyExemplars : IntentError {
  EmptyExemplars() : IntentError("exemplar set is empty") {}
};
struct EmptyTrainingSet : IntentError {
  EmptyTrainingSet() : IntentError("training set is empty") {}
};
struct KTooLarge : IntentError {
  KTooLarge() : IntentError("k exceeds the training set size") {}
};
struct EmptySplit : IntentError {
  EmptySplit() : IntentError("evaluation split is empty") {}
};
struct MalformedLine : IntentError {
  MalformedLine(const std::string& path, int line_no, const std::string& why);
  int line_no;
};
struct InconsistentDimension : IntentError {
  explicit InconsistentDimension(const std::string& why) : IntentError(why) {}
};

// ---- dataset --------------------------------------------------------------

struct Example {
  std::string text;
  int label = 0;  // class index
};

struct Dataset {
  std::vector<Example> examples;
};

struct Split {
  Dataset train;
  Dataset held_out;
};

// Seeded shuffle, first fraction goes to train.
Split split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed);

// File format: one example per line, "<class-label>\t<utterance>".
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

// ---- tokenize ---------------------------------------------------------------

// Lowercase, split on maximal runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

// ---- embeddings -------------------------------------------------------------

struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> tokens;  // row order
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, int> index;

  // OOV tokens map to the zero vector.
  std::vector<double> lookup(const std::string& token) const;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) const;
  // Mean of token embeddings; zero vector for an empty/all-OOV sentence.
  std::vector<double> sentence_mean(const std::vector<std::string>& tokens) const;
};

// Whitespace-separated text: per line a token then D decimals.
EmbeddingTable load_embeddings(const std::string& path);

// Seeded random table over a vocabulary, values uniform in [-0.5/D, 0.5/D].
EmbeddingTable random_table(const std::vector<std::string>& vocabulary, int dim,
                            std::uint64_t seed);

// Sorted unique tokens over a dataset's utterances.
std::vector<std::string> corpus_vocabulary(const Dataset& data);

// 0 when either vector has zero norm.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// ---- classifiers ------------------------------------------------------------

struct Prediction {
  std::array<double, kNumClasses> distribution{};
  int argmax = 0;      // ties broken by class-list order
  double confidence = 0.0;
};

// Fills argmax/confidence from the distribution with class-order tie-break.
Prediction make_prediction(const std::array<double, kNumClasses>& distribution);

// Unit-cost edit distance.
int levenshtein(std::string_view a, std::string_view b);

// Nearest exemplar under normalized edit-distance similarity
// sim = 1 - lev(norm(text), norm(ex)) / max(len); distribution is the
// per-class max similarity, normalized.
Prediction fuzzy_classify(const std::string& text, const Dataset& exemplars);

// Majority vote among the k most cosine-similar sentence means; vote ties by
// summed similarity then class order; distribution is the vote shares.
Prediction knn_classify(const std::string& text, const Dataset& train,
                        const EmbeddingTable& table, int k);

// ---- evaluation -------------------------------------------------------------

using Predictor = std::function<Prediction(const std::string&)>;

struct EvalResult {
  double accuracy = 0.0;
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // [true][predicted]
  int total = 0;
};

EvalResult evaluate(const Predictor& predict, const Dataset& held_out);

}  // namespace kasper::intent
