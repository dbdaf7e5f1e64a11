#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "httplib.h"
#include "json.hpp"

#include "kasper/brain.hpp"
#include "kasper/corpus.hpp"

using namespace kasper;
using brain::SkillRegistry;
using nlohmann::json;

namespace {

std::shared_ptr<const intent::ModelBundle> fuzzy_bundle() {
  auto bundle = std::make_shared<intent::ModelBundle>();
  corpus::CorpusSpec spec = corpus::default_spec();
  spec.per_class = 5;
  bundle->exemplars = corpus::generate_corpus(spec);
  bundle->default_algo = "fuzzy";
  return bundle;
}

}  // namespace

TEST_CASE("route substitutes the query into the class template") {
  const SkillRegistry registry = SkillRegistry::defaults();
  CHECK(brain::route(intent::class_index("Weather"), "weather in delhi", registry) ==
        "Here is the weather for: weather in delhi");
  const std::string music =
      brain::route(intent::class_index("Music and Audio"), "play jazz", registry);
  CHECK(music.find("play jazz") != std::string::npos);
  for (int c = 0; c < intent::kNumClasses; ++c) {
    CHECK(registry.templates[static_cast<std::size_t>(c)].find("{query}") != std::string::npos);
  }
}

TEST_CASE("skill overrides replace templates verbatim") {
  SkillRegistry registry = SkillRegistry::defaults();
  const std::string path = std::filesystem::temp_directory_path() / "kasper_skills.tsv";
  {
    std::ofstream out(path);
    out << "Weather\tForecast engaged -> {query} <-\n";
  }
  registry.load_overrides(path);
  CHECK(brain::route(intent::class_index("Weather"), "rain?", registry) ==
        "Forecast engaged -> rain? <-");
  // other classes untouched
  CHECK(brain::route(intent::class_index("News"), "x", registry) ==
        "Here are the headlines for: x");
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "NotAClass\twhatever\n";
  }
  CHECK_THROWS_AS(registry.load_overrides(path), intent::MalformedLine);
  std::remove(path.c_str());
}

TEST_CASE("handle_query validates input and reports service state") {
  const SkillRegistry registry = SkillRegistry::defaults();
  const auto bundle = fuzzy_bundle();

  SUBCASE("no bundle loaded is a 503") {
    try {
      brain::handle_query("hello", nullptr, registry);
      FAIL("expected QueryError");
    } catch (const brain::QueryError& e) {
      CHECK(e.http_status == 503);
    }
  }
  SUBCASE("empty or whitespace text is a 400") {
    for (const char* text : {"", "   ", "\t\n"}) {
      try {
        brain::handle_query(text, bundle.get(), registry);
        FAIL("expected QueryError");
      } catch (const brain::QueryError& e) {
        CHECK(e.http_status == 400);
      }
    }
  }
  SUBCASE("unknown algorithm is a 400") {
    try {
      brain::handle_query("hello", bundle.get(), registry, "svm");
      FAIL("expected QueryError");
    } catch (const brain::QueryError& e) {
      CHECK(e.http_status == 400);
    }
  }
  SUBCASE("a missing net is a 400") {
    try {
      brain::handle_query("hello", bundle.get(), registry, "cnn");
      FAIL("expected QueryError");
    } catch (const brain::QueryError& e) {
      CHECK(e.http_status == 400);
    }
  }
  SUBCASE("a good query routes through the classifier") {
    const auto qr = brain::handle_query("what is the weather like in delhi", bundle.get(),
                                        registry, "fuzzy");
    CHECK(qr.classifier == "fuzzy");
    CHECK(intent::class_index(qr.intent) >= 0);
    CHECK(qr.response.find("weather") != std::string::npos);
  }
}

TEST_CASE("the HTTP service mirrors the in-process brain bit for bit") {
  brain::BrainService service;
  const int port = service.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  httplib::Client client(base);

  SUBCASE("health is 503 before a checkpoint and 200 after") {
    auto before = client.Get("/health");
    REQUIRE(before);
    CHECK(before->status == 503);

    service.set_bundle(fuzzy_bundle());
    auto after = client.Get("/health");
    REQUIRE(after);
    CHECK(after->status == 200);
    CHECK(json::parse(after->body)["status"] == "ok");
  }

  SUBCASE("query parity, statelessness and validation") {
    const auto bundle = fuzzy_bundle();
    service.set_bundle(bundle);
    brain::InProcessBrain local(bundle, SkillRegistry::defaults());
    brain::HttpBrain remote(base);

    for (const char* text : {"what is the weather like in delhi", "play some jazz please",
                             "tell me a joke about cats"}) {
      const auto a = local.query(text);
      const auto b = remote.query(text);
      CHECK(a.intent == b.intent);
      CHECK(a.confidence == b.confidence);  // bit-equal through the JSON wire
      CHECK(a.response == b.response);
      CHECK(a.classifier == b.classifier);
    }

    // repeating a request yields an identical body
    const json body = {{"text", "what is the weather"}};
    auto r1 = client.Post("/query", body.dump(), "application/json");
    auto r2 = client.Post("/query", body.dump(), "application/json");
    REQUIRE(r1);
    REQUIRE(r2);
    CHECK(r1->status == 200);
    CHECK(r1->body == r2->body);

    auto empty = client.Post("/query", json{{"text", ""}}.dump(), "application/json");
    REQUIRE(empty);
    CHECK(empty->status == 400);
    CHECK(json::parse(empty->body).contains("error"));

    auto bad_json = client.Post("/query", "{not json", "application/json");
    REQUIRE(bad_json);
    CHECK(bad_json->status == 400);

    auto bad_algo = client.Post("/query?algo=svm", body.dump(), "application/json");
    REQUIRE(bad_algo);
    CHECK(bad_algo->status == 400);
  }

  service.stop();
}
