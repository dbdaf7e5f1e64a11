#include "kasper/intent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kasper/rng.hpp"

namespace kasper::intent {

const std::array<std::string_view, kNumClasses>& class_labels() {
  static const std::array<std::string_view, kNumClasses> labels = {
      "Art and Beauty",
      "Business and Finance",
      "Communication",
      "Connected Car",
      "Food and Drink",
      "Games, Trivia, and Accessories",
      "Health and Fitness",
      "Interests",
      "Knowledge",
      "Lifestyle",
      "Movies and TV Shows",
      "Music and Audio",
      "News",
      "Novelty and Humour",
      "Problem Solving",
      "Productivity",
      "Shopping",
      "Social",
      "Sports",
      "Travel and Transportation",
      "Utilities",
      "Weather",
  };
  return labels;
}

int class_index(std::string_view label) {
  const auto& labels = class_labels();
  for (int i = 0; i < kNumClasses; ++i) {
    if (labels[static_cast<std::size_t>(i)] == label) return i;
  }
  return -1;
}

std::string_view class_label(int index) {
  if (index < 0 || index >= kNumClasses) throw IntentError("class index out of range");
  return class_labels()[static_cast<std::size_t>(index)];
}

MalformedLine::MalformedLine(const std::string& path, int line, const std::string& why)
    : IntentError(path + ":" + std::to_string(line) + ": " + why), line_no(line) {}

Split split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0) {
    throw IntentError("train fraction must be in [0, 1]");
  }
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), 0);
  DetRng rng(seed);
  deterministic_shuffle(order, rng);

  const auto train_count =
      static_cast<std::size_t>(train_fraction * static_cast<double>(order.size()));
  Split split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dest = i < train_count ? split.train : split.held_out;
    dest.examples.push_back(data.examples[order[i]]);
  }
  return split;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IntentError("cannot open dataset file: " + path);
  Dataset data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw MalformedLine(path, line_no, "missing tab separator");
    int label = class_index(line.substr(0, tab));
    if (label < 0) throw MalformedLine(path, line_no, "unknown class label");
    std::string text = line.substr(tab + 1);
    if (text.empty()) throw MalformedLine(path, line_no, "empty utterance");
    data.examples.push_back({std::move(text), label});
  }
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IntentError("cannot write dataset file: " + path);
  for (const auto& ex : data.examples) {
    out << class_label(ex.label) << "\t" << ex.text << "\n";
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  auto it = index.find(token);
  if (it == index.end()) return std::vector<double>(static_cast<std::size_t>(dim), 0.0);
  return rows[static_cast<std::size_t>(it->second)];
}

std::vector<std::vector<double>> EmbeddingTable::embed(
    const std::vector<std::string>& tokens) const {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lookup(t));
  return out;
}

std::vector<double> EmbeddingTable::sentence_mean(const std::vector<std::string>& tokens) const {
  std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
  if (tokens.empty()) return mean;
  for (const auto& t : tokens) {
    auto it = index.find(t);
    if (it == index.end()) continue;
    const auto& row = rows[static_cast<std::size_t>(it->second)];
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += row[d];
  }
  for (double& v : mean) v /= static_cast<double>(tokens.size());
  return mean;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IntentError("cannot open embeddings file: " + path);
  EmbeddingTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) throw MalformedLine(path, line_no, "missing token");
    std::vector<double> row;
    std::string field;
    while (fields >> field) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(field, &pos));
        if (pos != field.size()) throw std::invalid_argument("trailing garbage");
      } catch (const std::exception&) {
        throw MalformedLine(path, line_no, "bad value '" + field + "'");
      }
    }
    if (row.empty()) throw MalformedLine(path, line_no, "no vector values");
    if (table.dim == 0) {
      table.dim = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != table.dim) {
      throw InconsistentDimension(path + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(table.dim) + " values, got " +
                                  std::to_string(row.size()));
    }
    table.index[token] = static_cast<int>(table.tokens.size());
    table.tokens.push_back(std::move(token));
    table.rows.push_back(std::move(row));
  }
  if (table.tokens.empty()) throw IntentError("embeddings file is empty: " + path);
  return table;
}

EmbeddingTable random_table(const std::vector<std::string>& vocabulary, int dim,
                            std::uint64_t seed) {
  if (dim <= 0) throw IntentError("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim = dim;
  DetRng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (const auto& token : vocabulary) {
    if (table.index.contains(token)) continue;
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (double& v : row) v = rng.next_in(-half, half);
    table.index[token] = static_cast<int>(table.tokens.size());
    table.tokens.push_back(token);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> corpus_vocabulary(const Dataset& data) {
  std::vector<std::string> vocab;
  for (const auto& ex : data.examples) {
    for (auto& tok : tokenize(ex.text)) vocab.push_back(std::move(tok));
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw IntentError("cosine: dimension mismatch");
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

Prediction make_prediction(const std::array<double, kNumClasses>& distribution) {
  Prediction p;
  p.distribution = distribution;
  p.argmax = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (distribution[static_cast<std::size_t>(c)] >
        distribution[static_cast<std::size_t>(p.argmax)]) {
      p.argmax = c;
    }
  }
  p.confidence = distribution[static_cast<std::size_t>(p.argmax)];
  return p;
}

int levenshtein(std::string_view a, std::string_view b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<int> prev(n + 1), curr(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const int subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
    }
    std::swap(prev, curr);
  }
  return prev[n];
}

namespace {

// Shared text normalization for edit-distance matching: lowercase tokens
// re-joined with single spaces.
std::string normalize_for_fuzzy(const std::string& text) {
  std::string out;
  for (const auto& tok : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace

Prediction fuzzy_classify(const std::string& text, const Dataset& exemplars) {
  if (exemplars.examples.empty()) throw EmptyExemplars();
  const std::string query = normalize_for_fuzzy(text);
  if (query.empty()) throw EmptyQuery();

  std::array<double, kNumClasses> best{};
  for (const auto& ex : exemplars.examples) {
    const std::string norm = normalize_for_fuzzy(ex.text);
    const std::size_t max_len = std::max(query.size(), norm.size());
    if (max_len == 0) continue;
    const double sim =
        1.0 - static_cast<double>(levenshtein(query, norm)) / static_cast<double>(max_len);
    auto& slot = best[static_cast<std::size_t>(ex.label)];
    if (sim > slot) slot = sim;
  }

  double sum = 0.0;
  for (double v : best) sum += v;
  std::array<double, kNumClasses> dist{};
  if (sum > 0.0) {
    for (int c = 0; c < kNumClasses; ++c) dist[static_cast<std::size_t>(c)] =
        best[static_cast<std::size_t>(c)] / sum;
  } else {
    dist.fill(1.0 / kNumClasses);
  }
  Prediction p = make_prediction(dist);
  // confidence reports the winning exemplar similarity rather than the
  // normalized share; the distribution itself stays a distribution
  p.confidence = best[static_cast<std::size_t>(p.argmax)];
  return p;
}

Prediction knn_classify(const std::string& text, const Dataset& train,
                        const EmbeddingTable& table, int k) {
  if (train.examples.empty()) throw EmptyTrainingSet();
  if (k < 1) throw IntentError("k must be >= 1");
  if (static_cast<std::size_t>(k) > train.examples.size()) throw KTooLarge();

  const std::vector<double> query = table.sentence_mean(tokenize(text));

  struct Neighbor {
    double similarity;
    std::size_t index;
  };
  std::vector<Neighbor> neighbors;
  neighbors.reserve(train.examples.size());
  for (std::size_t i = 0; i < train.examples.size(); ++i) {
    const auto mean = table.sentence_mean(tokenize(train.examples[i].text));
    neighbors.push_back({cosine_similarity(query, mean), i});
  }
  std::stable_sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.index < b.index;
  });

  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> summed_similarity{};
  for (int i = 0; i < k; ++i) {
    const auto& n = neighbors[static_cast<std::size_t>(i)];
    const int label = train.examples[n.index].label;
    votes[static_cast<std::size_t>(label)] += 1;
    summed_similarity[static_cast<std::size_t>(label)] += n.similarity;
  }

  int winner = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const auto wi = static_cast<std::size_t>(winner);
    if (votes[ci] > votes[wi] ||
        (votes[ci] == votes[wi] && summed_similarity[ci] > summed_similarity[wi])) {
      winner = c;
    }
  }

  std::array<double, kNumClasses> dist{};
  for (int c = 0; c < kNumClasses; ++c) {
    dist[static_cast<std::size_t>(c)] =
        static_cast<double>(votes[static_cast<std::size_t>(c)]) / static_cast<double>(k);
  }
  Prediction p = make_prediction(dist);
  p.argmax = winner;
  p.confidence = dist[static_cast<std::size_t>(winner)];
  return p;
}

EvalResult evaluate(const Predictor& predict, const Dataset& held_out) {
  if (held_out.examples.empty()) throw EmptySplit();
  EvalResult result;
  int correct = 0;
  for (const auto& ex : held_out.examples) {
    const Prediction p = predict(ex.text);
    result.confusion[static_cast<std::size_t>(ex.label)][static_cast<std::size_t>(p.argmax)] += 1;
    if (p.argmax == ex.label) ++correct;
  }
  result.total = static_cast<int>(held_out.examples.size());
  result.accuracy = static_cast<double>(correct) / static_cast<double>(result.total);
  return result;
}

}  // namespace kasper::intent
