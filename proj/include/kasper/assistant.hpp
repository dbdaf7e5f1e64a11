#pragma once

// The Kasper-specific state machine: event dispatch over the four states,
// a second hotword detector live during Busy, and music pause/resume around
// interrupting queries.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kasper/fsm.hpp"

namespace kasper::assistant {

using fsm::MediaStatus;

inline const fsm::StateId kIdle = "Idle";
inline const fsm::StateId kRecognizing = "Recognizing";
inline const fsm::StateId kBusy = "Busy";
inline const fsm::StateId kError = "Error";

// ---- events -------------------------------------------------------------

enum class MediaOp { Play, Pause, Stop };

struct Event {
  enum class Kind {
    HotwordDetected,
    WakeButtonPressed,
    TranscriptReady,
    RecognitionFailed,
    ResponseReady,
    ResponseSpoken,
    QueryFailed,
    ErrorAnnounced,
    MediaCommand,
  };

  Kind kind = Kind::HotwordDetected;
  std::int64_t t_ms = 0;
  std::string text;     // TranscriptReady transcript / ResponseReady response
  std::string message;  // RecognitionFailed / QueryFailed
  std::string intent;   // ResponseReady (informational)
  MediaOp media_op = MediaOp::Play;
  std::string track;    // MediaCommand play

  // Factories validate the event invariants (non-empty texts, t >= 0).
  static Event hotword(std::int64_t t);
  static Event wake_button(std::int64_t t);
  static Event transcript_ready(std::int64_t t, std::string text);
  static Event recognition_failed(std::int64_t t, std::string message);
  static Event response_ready(std::int64_t t, std::string intent, std::string text);
  static Event response_spoken(std::int64_t t);
  static Event query_failed(std::int64_t t, std::string message);
  static Event error_announced(std::int64_t t);
  static Event media_play(std::int64_t t, std::string track);
  static Event media_pause(std::int64_t t);
  static Event media_stop(std::int64_t t);
};

std::string kind_name(Event::Kind k);
std::string to_string(const Event& ev);

struct InvalidEvent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- actions ------------------------------------------------------------

struct Action {
  enum class Kind {
    StartRecognizer,
    StopRecognizer,
    StartBusyHotwordDetector,
    StopBusyHotwordDetector,
    CallBrain,
    Speak,
    PauseMedia,
    ResumeMedia,
    PlayMedia,
  };
  Kind kind;
  std::string arg;  // CallBrain/Speak text, PlayMedia track

  bool operator==(const Action&) const = default;
};

std::string to_string(const Action& a);
std::string to_string(const std::vector<Action>& actions);

// ---- context ------------------------------------------------------------

struct MediaSession {
  MediaStatus status = MediaStatus::Stopped;
  std::optional<std::string> track;
};

struct AssistantContext {
  fsm::Machine machine;
  MediaSession media;
  std::vector<fsm::InterruptContext> interrupt_stack;
  std::vector<std::string> spoken_log;
  std::vector<std::string> warnings;   // dropped events, ignored media commands
  bool user_paused = false;            // last pause came from a user MediaCommand
  std::string brain_endpoint = "in-process";

  AssistantContext();
  const fsm::StateId& state() const { return machine.current(); }
};

// ---- operations ---------------------------------------------------------

// Exactly the Fig 2 edges plus the Busy->Recognizing modification, with the
// Error conventions: Idle->{Recognizing,Error}; Recognizing->{Busy,Idle,Error};
// Busy->{Idle,Recognizing,Error}; Error->{Idle}.
fsm::TransitionTable kasper_table();

// Dispatches one event; returns the emitted actions in deterministic order.
// Unknown (state, event) pairs are dropped with a warning and no state change.
std::vector<Action> handle_event(AssistantContext& ctx, const Event& ev);

struct NotBusy : std::runtime_error {
  NotBusy() : std::runtime_error("interrupt_busy called outside Busy") {}
};

// The Busy-state hotword path: saves media state on the interrupt stack,
// pauses playing music, and re-enters Recognizing for the nested query.
std::vector<Action> interrupt_busy(AssistantContext& ctx);

// ---- event queue --------------------------------------------------------

// FIFO consumed by one logical dispatcher; producers may enqueue concurrently.
class EventQueue {
 public:
  void push(Event ev);
  std::optional<Event> try_pop();
  Event pop_blocking();
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> events_;
};

}  // namespace kasper::assistant
