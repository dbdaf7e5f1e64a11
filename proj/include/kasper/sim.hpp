#pragma once

// Deterministic discrete-event conversation simulator (virtual clock, no
// sleeping), the four-algorithm evaluation harness, and the REPL core the
// CLI wraps. Scenario files drive handle_event; all assistant invariants are
// checked continuously and land in the report's violation list.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kasper/assistant.hpp"
#include "kasper/brain.hpp"
#include "kasper/checkpoint.hpp"
#include "kasper/corpus.hpp"
#include "kasper/intent.hpp"
#include "kasper/neural.hpp"

namespace kasper::sim {

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& reason);
  int line;
};
struct NonMonotoneTimestamps : std::runtime_error {
  explicit NonMonotoneTimestamps(int line);
  int line;
};
struct BrainUnavailable : std::runtime_error {
  explicit BrainUnavailable(const std::string& why)
      : std::runtime_error("brain unavailable: " + why) {}
};

// ---- scenarios ---------------------------------------------------------------

struct ScenarioEntry {
  std::int64_t t_ms = 0;
  bool is_audio_fixture = false;
  assistant::Event event;     // when !is_audio_fixture
  std::string signal_path;    // when is_audio_fixture
  std::string template_path;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioEntry> entries;
};

// Lines: "t=<ms> <EventKind>[ <args>]"; '#' comments and blanks ignored;
// timestamps must be non-decreasing.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& name);
std::string scenario_to_text(const Scenario& s);

// ---- simulation --------------------------------------------------------------

struct SimOptions {
  brain::BrainClient* brain = nullptr;  // null: CallBrain actions are logged only
  std::string fixture_dir;              // resolves relative AudioFixture paths
};

struct SimReport {
  std::string scenario_name;
  std::vector<std::string> event_lines;
  std::vector<std::string> media_log;
  std::vector<std::string> warnings;
  std::string final_state;
  std::size_t interrupt_stack_depth = 0;
  std::vector<std::string> violations;

  std::string to_text() const;
};

SimReport run_scenario(const Scenario& s, assistant::AssistantContext& ctx,
                       const SimOptions& opts = {});

// ---- evaluation harness --------------------------------------------------------

struct ComparisonRow {
  std::string algorithm;
  double accuracy = 0.0;
  double train_seconds = -1.0;  // < 0: not a trained model
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // fuzzy-dp, knn, cnn, rnn
  intent::ModelBundle bundle;       // trained cnn + rnn over the same split
  int train_size = 0;
  int held_out_size = 0;

  std::string table_text() const;
  double accuracy_of(const std::string& algorithm) const;
};

// Splits 80/20 with config.seed, builds a seeded random embedding table over
// the corpus vocabulary unless one is provided, trains CNN and RNN (timed),
// and scores all four algorithms on the held-out split.
ComparisonReport run_comparison(const intent::Dataset& data, const intent::TrainConfig& config,
                                int dim, int knn_k,
                                const std::optional<intent::EmbeddingTable>& provided = {});

// ---- REPL --------------------------------------------------------------------

// Turn-based text interface. Input mapping: "!wake" -> HotwordDetected,
// "!play <id>" / "!pause" / "!stop" -> MediaCommand, "!fail <msg>" ->
// RecognitionFailed, anything else -> TranscriptReady. A turn auto-completes
// the query: CallBrain is resolved through the client and the ResponseReady/
// ResponseSpoken follow-ups are injected; errors are auto-announced.
class ReplSession {
 public:
  explicit ReplSession(std::shared_ptr<brain::BrainClient> brain);

  std::vector<std::string> turn(const std::string& input);
  const assistant::AssistantContext& context() const { return ctx_; }

 private:
  void dispatch(const assistant::Event& ev, std::vector<std::string>& out);

  assistant::AssistantContext ctx_;
  std::shared_ptr<brain::BrainClient> brain_;
  std::int64_t now_ms_ = 0;
  std::size_t warnings_seen_ = 0;
};

}  // namespace kasper::sim
