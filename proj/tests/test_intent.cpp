#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kasper/intent.hpp"
#include "kasper/rng.hpp"

using namespace kasper;
using intent::Dataset;
using intent::EmbeddingTable;

namespace {

// the exponential recursive definition, no memoization
int lev_oracle(std::string_view a, std::string_view b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  const int subst = lev_oracle(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1)) +
                    (a.back() == b.back() ? 0 : 1);
  const int del = lev_oracle(a.substr(0, a.size() - 1), b) + 1;
  const int ins = lev_oracle(a, b.substr(0, b.size() - 1)) + 1;
  return std::min({subst, del, ins});
}

std::string temp_file(const std::string& name, const std::string& contents) {
  const std::string path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("the 22 class labels are fixed and byte-exact") {
  const auto& labels = intent::class_labels();
  CHECK(labels.size() == 22);
  CHECK(labels[0] == "Art and Beauty");
  CHECK(labels[5] == "Games, Trivia, and Accessories");
  CHECK(labels[11] == "Music and Audio");
  CHECK(labels[21] == "Weather");
  for (int i = 0; i < intent::kNumClasses; ++i) {
    CHECK(intent::class_index(intent::class_label(i)) == i);
  }
  CHECK(intent::class_index("weather") == -1);  // case matters
}

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
  CHECK(intent::tokenize("What's the Weather?") ==
        std::vector<std::string>{"what", "s", "the", "weather"});
  CHECK(intent::tokenize("").empty());
  CHECK(intent::tokenize("play  JAZZ-01") == std::vector<std::string>{"play", "jazz", "01"});
  CHECK(intent::tokenize("...!?").empty());
}

TEST_CASE("load_embeddings parses the whitespace text layout") {
  const std::string path =
      temp_file("kasper_emb_ok.txt", "hot 0.1 0.2\ncold -0.1 0.0\n");
  const EmbeddingTable table = intent::load_embeddings(path);
  CHECK(table.tokens.size() == 2);
  CHECK(table.dim == 2);
  CHECK(table.lookup("hot") == std::vector<double>{0.1, 0.2});
  CHECK(table.lookup("zzz") == std::vector<double>{0.0, 0.0});  // OOV -> zero vector
  std::remove(path.c_str());
}

TEST_CASE("load_embeddings reports malformed lines and dimension drift") {
  const std::string bad = temp_file("kasper_emb_bad.txt", "hot 0.1 x\n");
  CHECK_THROWS_AS(intent::load_embeddings(bad), intent::MalformedLine);
  std::remove(bad.c_str());

  const std::string drift = temp_file("kasper_emb_dim.txt", "hot 0.1 0.2\ncold 0.3\n");
  CHECK_THROWS_AS(intent::load_embeddings(drift), intent::InconsistentDimension);
  std::remove(drift.c_str());
}

TEST_CASE("random_table is seeded, bounded and covers the vocabulary") {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma"};
  const EmbeddingTable a = intent::random_table(vocab, 8, 42);
  const EmbeddingTable b = intent::random_table(vocab, 8, 42);
  const EmbeddingTable c = intent::random_table(vocab, 8, 43);
  CHECK(a.tokens == vocab);
  CHECK(a.rows == b.rows);
  CHECK(a.rows != c.rows);
  for (const auto& row : a.rows) {
    for (double v : row) {
      CHECK(v >= -0.5 / 8);
      CHECK(v < 0.5 / 8);
    }
  }
}

TEST_CASE("levenshtein matches the spec examples") {
  CHECK(intent::levenshtein("", "abc") == 3);
  CHECK(intent::levenshtein("kitten", "sitting") == 3);
  CHECK(intent::levenshtein("mumbai", "mumbai") == 0);
}

TEST_CASE("levenshtein equals the recursive oracle on short {a,b} strings") {
  std::vector<std::string> strings = {""};
  for (int len = 1; len <= 5; ++len) {
    std::vector<std::string> next;
    for (const auto& s : strings) {
      if (s.size() == static_cast<std::size_t>(len) - 1) {
        next.push_back(s + "a");
        next.push_back(s + "b");
      }
    }
    strings.insert(strings.end(), next.begin(), next.end());
  }
  int checked = 0;
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      if (a.size() + b.size() > 8) continue;  // keep the unit run fast; acceptance does <= 7
      CHECK(intent::levenshtein(a, b) == lev_oracle(a, b));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("levenshtein is symmetric and triangular on random strings") {
  DetRng rng(11);
  const auto random_string = [&rng]() {
    std::string s;
    const std::size_t len = rng.next_below(10);
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(static_cast<char>('a' + rng.next_below(3)));
    }
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    const std::string a = random_string(), b = random_string(), c = random_string();
    CHECK(intent::levenshtein(a, b) == intent::levenshtein(b, a));
    CHECK(intent::levenshtein(a, c) <= intent::levenshtein(a, b) + intent::levenshtein(b, c));
    CHECK((intent::levenshtein(a, b) == 0) == (a == b));
  }
}

TEST_CASE("fuzzy_classify follows the normalized-similarity rule") {
  Dataset exemplars;
  exemplars.examples.push_back({"what is the weather", intent::class_index("Weather")});
  exemplars.examples.push_back({"play some music", intent::class_index("Music and Audio")});

  SUBCASE("exact match wins with similarity 1") {
    const auto p = intent::fuzzy_classify("what is the weather", exemplars);
    CHECK(p.argmax == intent::class_index("Weather"));
    CHECK(p.confidence == doctest::Approx(1.0));
  }
  SUBCASE("near match beats the other class") {
    const auto p = intent::fuzzy_classify("whats the weather", exemplars);
    CHECK(p.argmax == intent::class_index("Weather"));

    // brute-force both similarity ratios (normalization joins tokens)
    const int d_weather = intent::levenshtein("whats the weather", "what is the weather");
    const int d_music = intent::levenshtein("whats the weather", "play some music");
    const double s_weather = 1.0 - static_cast<double>(d_weather) / 19.0;
    const double s_music = 1.0 - static_cast<double>(d_music) / 17.0;
    CHECK(s_weather > s_music);
    CHECK(p.confidence == doctest::Approx(s_weather).epsilon(1e-12));
  }
  SUBCASE("empty query is rejected") {
    CHECK_THROWS_AS(intent::fuzzy_classify("", exemplars), intent::EmptyQuery);
    CHECK_THROWS_AS(intent::fuzzy_classify("?!", exemplars), intent::EmptyQuery);
  }
  SUBCASE("empty exemplar set is rejected") {
    CHECK_THROWS_AS(intent::fuzzy_classify("hello", Dataset{}), intent::EmptyExemplars);
  }
  SUBCASE("the distribution is normalized") {
    const auto p = intent::fuzzy_classify("what is music", exemplars);
    double sum = 0.0;
    for (double v : p.distribution) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("knn_classify votes among the nearest sentence means") {
  EmbeddingTable table;
  table.dim = 3;
  const auto add = [&table](const std::string& tok, std::vector<double> row) {
    table.index[tok] = static_cast<int>(table.tokens.size());
    table.tokens.push_back(tok);
    table.rows.push_back(std::move(row));
  };
  add("q", {1.0, 0.0, 0.0});
  add("n1", {0.95, 0.05, 0.0});
  add("n2", {0.9, 0.1, 0.0});
  add("w1", {0.8, 0.2, 0.0});

  Dataset train;
  const int news = intent::class_index("News");
  const int weather = intent::class_index("Weather");
  train.examples.push_back({"n1", news});
  train.examples.push_back({"n2", news});
  train.examples.push_back({"w1", weather});

  SUBCASE("k=1 self-similarity wins") {
    Dataset self = train;
    self.examples.push_back({"q", intent::class_index("Sports")});
    const auto p = intent::knn_classify("q", self, table, 1);
    CHECK(p.argmax == intent::class_index("Sports"));
    CHECK(p.confidence == doctest::Approx(1.0));
  }
  SUBCASE("k=3 majority 2/3 wins") {
    const auto p = intent::knn_classify("q", train, table, 3);
    CHECK(p.argmax == news);
    CHECK(p.distribution[static_cast<std::size_t>(news)] == doctest::Approx(2.0 / 3.0));
    CHECK(p.distribution[static_cast<std::size_t>(weather)] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("k larger than the training set is rejected") {
    CHECK_THROWS_AS(intent::knn_classify("q", train, table, 10), intent::KTooLarge);
  }
  SUBCASE("k = |train| predicts the global majority for any query") {
    for (const char* query : {"q", "w1", "zzz unseen words"}) {
      const auto p = intent::knn_classify(query, train, table, 3);
      CHECK(p.argmax == news);
    }
  }
  SUBCASE("empty training set is rejected") {
    CHECK_THROWS_AS(intent::knn_classify("q", Dataset{}, table, 1), intent::EmptyTrainingSet);
  }
}

TEST_CASE("cosine treats zero vectors as similarity 0") {
  CHECK(intent::cosine_similarity({0.0, 0.0}, {1.0, 0.0}) == 0.0);
  CHECK(intent::cosine_similarity({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(intent::cosine_similarity({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(-1.0));
}

TEST_CASE("evaluate computes accuracy and a consistent confusion matrix") {
  Dataset balanced;
  for (int c = 0; c < intent::kNumClasses; ++c) {
    balanced.examples.push_back({"example " + std::to_string(c), c});
  }

  SUBCASE("an oracle predictor scores 1.0 with a diagonal confusion") {
    Dataset labeled = balanced;
    const auto result = intent::evaluate(
        [&](const std::string& text) {
          for (const auto& ex : labeled.examples) {
            if (ex.text == text) {
              std::array<double, intent::kNumClasses> d{};
              d[static_cast<std::size_t>(ex.label)] = 1.0;
              return intent::make_prediction(d);
            }
          }
          return intent::make_prediction({});
        },
        balanced);
    CHECK(result.accuracy == doctest::Approx(1.0));
    for (int i = 0; i < intent::kNumClasses; ++i) {
      for (int j = 0; j < intent::kNumClasses; ++j) {
        CHECK(result.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
              (i == j ? 1 : 0));
      }
    }
  }
  SUBCASE("a constant predictor on a balanced set scores 1/22") {
    const auto result = intent::evaluate(
        [](const std::string&) {
          std::array<double, intent::kNumClasses> d{};
          d[0] = 1.0;
          return intent::make_prediction(d);
        },
        balanced);
    CHECK(result.accuracy == doctest::Approx(1.0 / 22.0));
    // trace(confusion) / total == accuracy by definition
    int diag = 0;
    for (int i = 0; i < intent::kNumClasses; ++i) {
      diag += result.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    CHECK(static_cast<double>(diag) / result.total == doctest::Approx(result.accuracy));
  }
  SUBCASE("an empty split is rejected") {
    CHECK_THROWS_AS(intent::evaluate([](const std::string&) { return intent::Prediction{}; },
                                     Dataset{}),
                    intent::EmptySplit);
  }
}

TEST_CASE("prediction ties break by class-list order") {
  std::array<double, intent::kNumClasses> d{};
  d[3] = 0.4;
  d[7] = 0.4;
  d[1] = 0.2;
  const auto p = intent::make_prediction(d);
  CHECK(p.argmax == 3);
  CHECK(p.confidence == doctest::Approx(0.4));
}

TEST_CASE("dataset files round-trip and validate") {
  Dataset data;
  data.examples.push_back({"what is the weather", intent::class_index("Weather")});
  data.examples.push_back({"play some jazz", intent::class_index("Music and Audio")});
  const std::string path = std::filesystem::temp_directory_path() / "kasper_dataset.tsv";
  intent::save_dataset(data, path);
  const Dataset loaded = intent::load_dataset(path);
  REQUIRE(loaded.examples.size() == 2);
  CHECK(loaded.examples[0].text == data.examples[0].text);
  CHECK(loaded.examples[0].label == data.examples[0].label);
  std::remove(path.c_str());

  const std::string bad = temp_file("kasper_dataset_bad.tsv", "NotAClass\thello\n");
  CHECK_THROWS_AS(intent::load_dataset(bad), intent::MalformedLine);
  std::remove(bad.c_str());
}

TEST_CASE("split_dataset is seeded and size-exact") {
  Dataset data;
  for (int i = 0; i < 100; ++i) {
    data.examples.push_back({"u" + std::to_string(i), i % intent::kNumClasses});
  }
  const auto a = intent::split_dataset(data, 0.8, 42);
  const auto b = intent::split_dataset(data, 0.8, 42);
  const auto c = intent::split_dataset(data, 0.8, 7);
  CHECK(a.train.examples.size() == 80);
  CHECK(a.held_out.examples.size() == 20);
  CHECK(a.train.examples[0].text == b.train.examples[0].text);
  bool differs = false;
  for (std::size_t i = 0; i < a.train.examples.size(); ++i) {
    if (a.train.examples[i].text != c.train.examples[i].text) differs = true;
  }
  CHECK(differs);
}
