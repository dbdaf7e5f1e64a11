#include "kasper/sim.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kasper/audio.hpp"

namespace kasper::sim {

using assistant::Action;
using assistant::AssistantContext;
using assistant::Event;

ParseError::ParseError(int l, const std::string& reason)
    : std::runtime_error("scenario line " + std::to_string(l) + ": " + reason), line(l) {}

NonMonotoneTimestamps::NonMonotoneTimestamps(int l)
    : std::runtime_error("scenario line " + std::to_string(l) +
                         ": timestamps must be non-decreasing"),
      line(l) {}

namespace {

// splits a scenario line into fields; double quotes group words
std::vector<std::string> split_fields(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '"') {
      auto close = line.find('"', i + 1);
      if (close == std::string::npos) throw ParseError(line_no, "unterminated quote");
      fields.push_back(line.substr(i + 1, close - i - 1));
      i = close + 1;
    } else {
      auto end = line.find_first_of(" \t", i);
      if (end == std::string::npos) end = line.size();
      fields.push_back(line.substr(i, end - i));
      i = end;
    }
  }
  return fields;
}

ScenarioEntry parse_entry(const std::vector<std::string>& fields, int line_no) {
  if (fields.size() < 2) throw ParseError(line_no, "expected 't=<ms> <EventKind>'");
  if (fields[0].rfind("t=", 0) != 0) throw ParseError(line_no, "line must start with t=<ms>");
  std::int64_t t = 0;
  try {
    std::size_t pos = 0;
    t = std::stoll(fields[0].substr(2), &pos);
    if (pos != fields[0].size() - 2) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ParseError(line_no, "bad timestamp '" + fields[0] + "'");
  }
  if (t < 0) throw ParseError(line_no, "timestamp must be non-negative");

  const std::string& kind = fields[1];
  const auto need_arg = [&](const char* what) -> const std::string& {
    if (fields.size() < 3 || fields[2].empty()) {
      throw ParseError(line_no, std::string(kind) + " needs " + what);
    }
    return fields[2];
  };

  ScenarioEntry entry;
  entry.t_ms = t;
  try {
    if (kind == "HotwordDetected") {
      entry.event = Event::hotword(t);
    } else if (kind == "WakeButtonPressed") {
      entry.event = Event::wake_button(t);
    } else if (kind == "TranscriptReady") {
      entry.event = Event::transcript_ready(t, need_arg("quoted text"));
    } else if (kind == "RecognitionFailed") {
      entry.event = Event::recognition_failed(t, need_arg("a quoted message"));
    } else if (kind == "ResponseReady") {
      entry.event = Event::response_ready(t, "", need_arg("quoted text"));
    } else if (kind == "ResponseSpoken") {
      entry.event = Event::response_spoken(t);
    } else if (kind == "QueryFailed") {
      entry.event = Event::query_failed(t, need_arg("a quoted message"));
    } else if (kind == "ErrorAnnounced") {
      entry.event = Event::error_announced(t);
    } else if (kind == "MediaCommand") {
      const std::string& op = need_arg("play|pause|stop");
      if (op == "play") {
        if (fields.size() < 4) throw ParseError(line_no, "MediaCommand play needs a track id");
        entry.event = Event::media_play(t, fields[3]);
      } else if (op == "pause") {
        entry.event = Event::media_pause(t);
      } else if (op == "stop") {
        entry.event = Event::media_stop(t);
      } else {
        throw ParseError(line_no, "unknown media op '" + op + "'");
      }
    } else if (kind == "AudioFixture") {
      if (fields.size() < 4) {
        throw ParseError(line_no, "AudioFixture needs <signal-file> <template-file>");
      }
      entry.is_audio_fixture = true;
      entry.signal_path = fields[2];
      entry.template_path = fields[3];
    } else {
      throw ParseError(line_no, "unknown event kind '" + kind + "'");
    }
  } catch (const assistant::InvalidEvent& e) {
    throw ParseError(line_no, e.what());
  }
  return entry;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& name) {
  Scenario scenario;
  scenario.name = name;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::int64_t last_t = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto entry = parse_entry(split_fields(line, line_no), line_no);
    if (entry.t_ms < last_t) throw NonMonotoneTimestamps(line_no);
    last_t = entry.t_ms;
    scenario.entries.push_back(std::move(entry));
  }
  return scenario;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  std::string name = path;
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  return parse_scenario_text(text.str(), name);
}

std::string scenario_to_text(const Scenario& s) {
  std::ostringstream out;
  for (const auto& entry : s.entries) {
    out << "t=" << entry.t_ms << " ";
    if (entry.is_audio_fixture) {
      out << "AudioFixture " << entry.signal_path << " " << entry.template_path;
    } else {
      out << assistant::to_string(entry.event);
    }
    out << "\n";
  }
  return out.str();
}

namespace {

// Tracks the assistant invariants across a run; failures become report
// violations rather than exceptions.
class InvariantChecker {
 public:
  explicit InvariantChecker(std::vector<std::string>& violations) : violations_(violations) {}

  void after_event(const AssistantContext& ctx, const Event& ev, const fsm::StateId& before,
                   const fsm::StateId& after, const std::vector<Action>& actions) {
    static const std::set<fsm::StateId> declared = {assistant::kIdle, assistant::kRecognizing,
                                                    assistant::kBusy, assistant::kError};
    if (!declared.contains(after)) violate("undeclared state: " + after);

    for (const auto& action : actions) {
      switch (action.kind) {
        case Action::Kind::StartBusyHotwordDetector:
          if (detector_on_) violate("busy detector started twice");
          if (after != assistant::kBusy) violate("busy detector started outside Busy");
          detector_on_ = true;
          break;
        case Action::Kind::StopBusyHotwordDetector:
          if (!detector_on_) violate("busy detector stopped while not running");
          if (before != assistant::kBusy) violate("busy detector stopped outside Busy");
          detector_on_ = false;
          break;
        case Action::Kind::StartRecognizer:
          if (after != assistant::kRecognizing) violate("recognizer started outside Recognizing");
          break;
        case Action::Kind::PauseMedia:
          if (ev.kind != Event::Kind::MediaCommand) ++pending_resumes_;
          break;
        case Action::Kind::ResumeMedia:
          if (pending_resumes_ == 0) {
            violate("ResumeMedia without a matching interrupt PauseMedia");
          } else {
            --pending_resumes_;
          }
          break;
        default:
          break;
      }
    }

    if (detector_on_ && after != assistant::kBusy) {
      violate("busy detector running outside Busy");
    }
    if (after == assistant::kIdle && !ctx.interrupt_stack.empty()) {
      violate("interrupt stack not empty in Idle");
    }
  }

  void at_end(const AssistantContext& ctx) {
    if (ctx.state() == assistant::kIdle && !ctx.interrupt_stack.empty()) {
      violate("interrupt stack not empty at scenario end");
    }
  }

 private:
  void violate(const std::string& what) { violations_.push_back(what); }

  std::vector<std::string>& violations_;
  bool detector_on_ = false;
  int pending_resumes_ = 0;
};

std::string format_confidence(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::optional<Event> resolve_audio_fixture(const ScenarioEntry& entry, const SimOptions& opts,
                                           std::string& note) {
  auto resolve = [&](const std::string& p) {
    if (!opts.fixture_dir.empty() && !p.empty() && p[0] != '/') {
      return opts.fixture_dir + "/" + p;
    }
    return p;
  };
  const audio::AudioSignal sig = audio::load_signal(resolve(entry.signal_path));
  const audio::HotwordTemplate tmpl = audio::load_hotword_template(resolve(entry.template_path));
  const auto frames = audio::frame_signal(sig);
  const auto offset = audio::detect_hotword(frames, tmpl);
  if (offset) {
    note = "hit offset=" + std::to_string(*offset);
    return Event::hotword(entry.t_ms);
  }
  note = "no-detection";
  return std::nullopt;
}

}  // namespace

SimReport run_scenario(const Scenario& s, AssistantContext& ctx, const SimOptions& opts) {
  SimReport report;
  report.scenario_name = s.name;
  InvariantChecker checker(report.violations);

  for (const auto& entry : s.entries) {
    std::string described;
    std::optional<Event> event;
    if (entry.is_audio_fixture) {
      std::string note;
      event = resolve_audio_fixture(entry, opts, note);
      described = "AudioFixture " + entry.signal_path + " -> " + note;
      if (!event) {
        report.event_lines.push_back("t=" + std::to_string(entry.t_ms) + " " + described +
                                     " | state:" + ctx.state() + "->" + ctx.state() +
                                     " | actions:[]");
        continue;
      }
    } else {
      event = entry.event;
      described = assistant::to_string(entry.event);
    }

    const fsm::StateId before = ctx.state();
    const std::size_t warnings_before = ctx.warnings.size();
    const std::vector<Action> actions = assistant::handle_event(ctx, *event);
    const fsm::StateId after = ctx.state();

    report.event_lines.push_back("t=" + std::to_string(entry.t_ms) + " " + described +
                                 " | state:" + before + "->" + after +
                                 " | actions:" + assistant::to_string(actions));

    for (const auto& action : actions) {
      switch (action.kind) {
        case Action::Kind::PlayMedia:
        case Action::Kind::PauseMedia:
        case Action::Kind::ResumeMedia:
          report.media_log.push_back("t=" + std::to_string(entry.t_ms) + " " +
                                     assistant::to_string(action));
          break;
        case Action::Kind::CallBrain:
          if (opts.brain) {
            try {
              const brain::QueryResponse qr = opts.brain->query(action.arg);
              report.event_lines.push_back("    brain: intent=\"" + qr.intent +
                                           "\" confidence=" + format_confidence(qr.confidence) +
                                           " response=\"" + qr.response + "\"");
            } catch (const brain::QueryError& e) {
              if (e.http_status == 503) throw BrainUnavailable(e.what());
              report.event_lines.push_back(std::string("    brain: error \"") + e.what() + "\"");
            }
          }
          break;
        default:
          break;
      }
    }

    for (std::size_t w = warnings_before; w < ctx.warnings.size(); ++w) {
      report.warnings.push_back("t=" + std::to_string(entry.t_ms) + " " + ctx.warnings[w]);
    }
    checker.after_event(ctx, *event, before, after, actions);
  }

  checker.at_end(ctx);
  report.final_state = ctx.state();
  report.interrupt_stack_depth = ctx.interrupt_stack.size();
  return report;
}

std::string SimReport::to_text() const {
  std::ostringstream out;
  out << "kasper simulation report\n";
  out << "scenario: " << scenario_name << "\n";
  const auto section = [&out](const char* title, const std::vector<std::string>& lines) {
    out << title << "\n";
    if (lines.empty()) {
      out << "  (none)\n";
    } else {
      for (const auto& l : lines) out << "  " << l << "\n";
    }
  };
  section("events:", event_lines);
  section("media log:", media_log);
  section("warnings:", warnings);
  out << "final state: " << final_state << "\n";
  out << "interrupt stack depth: " << interrupt_stack_depth << "\n";
  section("violations:", violations);
  return out.str();
}

// ---- evaluation harness ---------------------------------------------------------

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ComparisonReport run_comparison(const intent::Dataset& data, const intent::TrainConfig& config,
                                int dim, int knn_k,
                                const std::optional<intent::EmbeddingTable>& provided) {
  const intent::Split split = intent::split_dataset(data, 0.8, config.seed);
  intent::ensure_all_classes_present(split.train);
  intent::EmbeddingTable table =
      provided ? *provided : intent::random_table(intent::corpus_vocabulary(data), dim, config.seed);

  ComparisonReport report;
  report.train_size = static_cast<int>(split.train.examples.size());
  report.held_out_size = static_cast<int>(split.held_out.examples.size());

  const auto fuzzy_eval = intent::evaluate(
      [&](const std::string& text) { return intent::fuzzy_classify(text, split.train); },
      split.held_out);
  report.rows.push_back({"fuzzy-dp", fuzzy_eval.accuracy, -1.0});

  const auto knn_eval = intent::evaluate(
      [&](const std::string& text) {
        return intent::knn_classify(text, split.train, table, knn_k);
      },
      split.held_out);
  report.rows.push_back({"knn", knn_eval.accuracy, -1.0});

  auto start = std::chrono::steady_clock::now();
  intent::CnnModel cnn = intent::train_cnn(split.train, table, config);
  const double cnn_seconds = seconds_since(start);
  const auto cnn_eval = intent::evaluate(
      [&](const std::string& text) { return intent::predict(cnn, text, table); }, split.held_out);
  report.rows.push_back({"cnn", cnn_eval.accuracy, cnn_seconds});

  start = std::chrono::steady_clock::now();
  intent::RnnModel rnn = intent::train_rnn(split.train, table, config);
  const double rnn_seconds = seconds_since(start);
  const auto rnn_eval = intent::evaluate(
      [&](const std::string& text) { return intent::predict(rnn, text, table); }, split.held_out);
  report.rows.push_back({"rnn", rnn_eval.accuracy, rnn_seconds});

  report.bundle.table = std::move(table);
  report.bundle.exemplars = split.train;
  report.bundle.cnn = std::move(cnn);
  report.bundle.rnn = std::move(rnn);
  report.bundle.default_algo = "cnn";
  report.bundle.knn_k = knn_k;
  return report;
}

std::string ComparisonReport::table_text() const {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s %-20s %s", "algorithm", "held-out accuracy",
                "train wall-clock");
  out << buf << "\n";
  out << "--------------------------------------------------\n";
  for (const auto& row : rows) {
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.2f%%", row.accuracy * 100.0);
    char clock[32];
    if (row.train_seconds < 0) {
      std::snprintf(clock, sizeof(clock), "-");
    } else {
      std::snprintf(clock, sizeof(clock), "%.2f s", row.train_seconds);
    }
    std::snprintf(buf, sizeof(buf), "%-10s %-20s %s", row.algorithm.c_str(), acc, clock);
    out << buf << "\n";
  }
  return out.str();
}

double ComparisonReport::accuracy_of(const std::string& algorithm) const {
  for (const auto& row : rows) {
    if (row.algorithm == algorithm) return row.accuracy;
  }
  throw intent::IntentError("no such comparison row: " + algorithm);
}

// ---- REPL -----------------------------------------------------------------------

ReplSession::ReplSession(std::shared_ptr<brain::BrainClient> brain) : brain_(std::move(brain)) {}

void ReplSession::dispatch(const Event& ev, std::vector<std::string>& out) {
  const fsm::StateId before = ctx_.state();
  const std::vector<Action> actions = assistant::handle_event(ctx_, ev);
  const fsm::StateId after = ctx_.state();
  out.push_back("state: " + before + " -> " + after);
  if (!actions.empty()) out.push_back("actions: " + assistant::to_string(actions));

  for (const auto& action : actions) {
    if (action.kind == Action::Kind::Speak) {
      out.push_back("speak: \"" + action.arg + "\"");
    } else if (action.kind == Action::Kind::CallBrain) {
      now_ms_ += 100;
      if (!brain_) {
        dispatch(Event::query_failed(now_ms_, "no brain configured"), out);
        continue;
      }
      try {
        const brain::QueryResponse qr = brain_->query(action.arg);
        out.push_back("brain: intent=\"" + qr.intent +
                      "\" confidence=" + format_confidence(qr.confidence) + " classifier=" +
                      qr.classifier + " response=\"" + qr.response + "\"");
        dispatch(Event::response_ready(now_ms_, qr.intent, qr.response), out);
        now_ms_ += 100;
        dispatch(Event::response_spoken(now_ms_), out);
      } catch (const brain::QueryError& e) {
        dispatch(Event::query_failed(now_ms_, e.what()), out);
      }
    }
  }

  if (ctx_.state() == assistant::kError) {
    now_ms_ += 100;
    dispatch(Event::error_announced(now_ms_), out);
  }
}

std::vector<std::string> ReplSession::turn(const std::string& input) {
  std::vector<std::string> out;
  now_ms_ += 100;
  try {
    if (input == "!wake") {
      dispatch(Event::hotword(now_ms_), out);
    } else if (input.rfind("!play ", 0) == 0) {
      dispatch(Event::media_play(now_ms_, input.substr(6)), out);
    } else if (input == "!pause") {
      dispatch(Event::media_pause(now_ms_), out);
    } else if (input == "!stop") {
      dispatch(Event::media_stop(now_ms_), out);
    } else if (input.rfind("!fail", 0) == 0) {
      const std::string msg = input.size() > 6 ? input.substr(6) : "simulated failure";
      dispatch(Event::recognition_failed(now_ms_, msg), out);
    } else if (!input.empty()) {
      dispatch(Event::transcript_ready(now_ms_, input), out);
    }
  } catch (const assistant::InvalidEvent& e) {
    out.push_back(std::string("error: ") + e.what());
  }
  const std::size_t recent = ctx_.warnings.size();
  if (recent > warnings_seen_) {
    for (std::size_t i = warnings_seen_; i < recent; ++i) {
      out.push_back("warning: " + ctx_.warnings[i]);
    }
  }
  warnings_seen_ = recent;
  return out;
}

}  // namespace kasper::sim
