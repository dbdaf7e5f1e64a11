#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kasper/checkpoint.hpp"
#include "kasper/intent.hpp"
#include "kasper/neural.hpp"

using namespace kasper;
using intent::Dataset;
using intent::ModelBundle;

namespace {

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ModelBundle small_bundle() {
  ModelBundle bundle;
  bundle.table = intent::random_table({"play", "jazz", "weather", "news", "the"}, 6, 7);
  for (int c = 0; c < intent::kNumClasses; ++c) {
    bundle.exemplars.examples.push_back({"exemplar for class " + std::to_string(c), c});
  }
  bundle.exemplars.examples.push_back({"what is the weather", intent::class_index("Weather")});
  bundle.exemplars.examples.push_back({"play some jazz", intent::class_index("Music and Audio")});

  intent::TrainConfig config;
  config.epochs = 2;
  config.seed = 11;
  config.filters_per_width = 2;
  config.hidden_size = 3;
  bundle.cnn = intent::train_cnn(bundle.exemplars, bundle.table, config);
  bundle.rnn = intent::train_rnn(bundle.exemplars, bundle.table, config);
  bundle.default_algo = "cnn";
  bundle.knn_k = 3;
  return bundle;
}

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly") {
  const ModelBundle bundle = small_bundle();
  const std::string p1 = std::filesystem::temp_directory_path() / "kasper_ckpt_1";
  const std::string p2 = std::filesystem::temp_directory_path() / "kasper_ckpt_2";

  intent::save_checkpoint(bundle, p1);
  const ModelBundle loaded = intent::load_checkpoint(p1);
  intent::save_checkpoint(loaded, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));

  CHECK(loaded.default_algo == "cnn");
  CHECK(loaded.knn_k == 3);
  CHECK(loaded.table.dim == bundle.table.dim);
  CHECK(loaded.table.tokens == bundle.table.tokens);
  CHECK(loaded.exemplars.examples.size() == bundle.exemplars.examples.size());

  REQUIRE(loaded.cnn.has_value());
  REQUIRE(loaded.rnn.has_value());
  CHECK(loaded.cnn->input_scale == bundle.cnn->input_scale);
  const auto a = parameter_refs(*bundle.cnn), b = parameter_refs(*loaded.cnn);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  const auto c = parameter_refs(*bundle.rnn), d = parameter_refs(*loaded.rnn);
  REQUIRE(c.size() == d.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(*c[i] == *d[i]);

  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("classify_with matches direct classifier calls on every algorithm") {
  const ModelBundle bundle = small_bundle();
  const std::string query = "what is the weather like";

  const auto via_cnn = intent::classify_with(bundle, "cnn", query);
  const auto direct_cnn = intent::predict(*bundle.cnn, query, bundle.table);
  CHECK(via_cnn.argmax == direct_cnn.argmax);
  CHECK(via_cnn.confidence == direct_cnn.confidence);

  const auto via_rnn = intent::classify_with(bundle, "rnn", query);
  const auto direct_rnn = intent::predict(*bundle.rnn, query, bundle.table);
  CHECK(via_rnn.argmax == direct_rnn.argmax);
  CHECK(via_rnn.confidence == direct_rnn.confidence);

  const auto via_knn = intent::classify_with(bundle, "knn", query);
  const auto direct_knn = intent::knn_classify(query, bundle.exemplars, bundle.table, 3);
  CHECK(via_knn.argmax == direct_knn.argmax);
  CHECK(via_knn.confidence == direct_knn.confidence);

  const auto via_fuzzy = intent::classify_with(bundle, "fuzzy", query);
  const auto direct_fuzzy = intent::fuzzy_classify(query, bundle.exemplars);
  CHECK(via_fuzzy.argmax == direct_fuzzy.argmax);
  CHECK(via_fuzzy.confidence == direct_fuzzy.confidence);

  // empty algo means the bundle default
  const auto via_default = intent::classify_with(bundle, "", query);
  CHECK(via_default.argmax == via_cnn.argmax);
}

TEST_CASE("requesting a net the checkpoint lacks is an explicit error") {
  ModelBundle bundle = small_bundle();
  bundle.rnn.reset();
  CHECK_THROWS_AS(intent::classify_with(bundle, "rnn", "hello"), intent::AlgorithmUnavailable);
  CHECK_THROWS_AS(intent::classify_with(bundle, "transformer", "hello"), intent::IntentError);
}

TEST_CASE("malformed checkpoints are rejected with a location") {
  const std::string path = std::filesystem::temp_directory_path() / "kasper_ckpt_bad";
  {
    std::ofstream out(path);
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(intent::load_checkpoint(path), intent::CheckpointError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(intent::load_checkpoint("/nonexistent/ckpt"), intent::CheckpointError);
}
