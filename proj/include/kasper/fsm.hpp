#pragma once

// Generic finite-state-machine engine: named states with enter/exit hooks,
// a permission table, payload-carrying transitions, and the error-state
// convention (every state may fail into Error; Error recovers to Idle only).

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kasper::fsm {

using StateId = std::string;

inline const StateId kIdleState = "Idle";
inline const StateId kErrorState = "Error";

enum class MediaStatus { Playing, Paused, Stopped };

std::string to_string(MediaStatus s);

// ---- transition payloads ----------------------------------------------

struct NonePayload {};

struct TranscriptText {
  std::string text;  // never empty
};

struct ErrorInfo {
  int code = 0;
  std::string message;
};

// Media state saved when an in-flight response is interrupted.
struct InterruptContext {
  MediaStatus saved_status = MediaStatus::Stopped;
  std::optional<std::string> saved_track;
};

using Payload = std::variant<NonePayload, TranscriptText, ErrorInfo, InterruptContext>;

std::string payload_kind(const Payload& p);

// ---- permission table ---------------------------------------------------

struct TransitionTable {
  std::map<StateId, std::set<StateId>> allowed;
};

struct TableViolation {
  enum class Kind {
    UnknownTarget,        // an edge points at a state that is not a key
    MissingErrorEdge,     // a non-Error state cannot fail into Error
    ErrorMustOnlyGoIdle,  // allowed[Error] != {Idle}
    ErrorStateMissing,    // Error is not a state at all
  };
  Kind kind;
  StateId state;
  std::string detail;
};

std::string to_string(const TableViolation& v);

// Total check of the table conventions; empty result means the table is sound.
std::vector<TableViolation> validate_table(const TransitionTable& table);

// ---- errors -------------------------------------------------------------

struct FsmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownInitialState : FsmError {
  explicit UnknownInitialState(const StateId& s);
};

struct TableKeyMismatch : FsmError {
  explicit TableKeyMismatch(const std::string& detail);
};

struct InvalidTransition : FsmError {
  StateId from, to;
  InvalidTransition(StateId f, StateId t);
};

// A hook failed while already handling a failure (Error's own enter hook threw).
struct FatalHookError : FsmError {
  explicit FatalHookError(const std::string& detail);
};

struct PayloadInvariantViolation : FsmError {
  explicit PayloadInvariantViolation(const std::string& detail);
};

// ---- machine ------------------------------------------------------------

struct TraceRecord {
  StateId from;
  StateId to;
  std::string payload_kind;
  bool operator==(const TraceRecord&) const = default;
};

// Serializes as "FROM -> TO [payload-kind]".
std::string to_string(const TraceRecord& r);

class Machine {
 public:
  using EnterHook = std::function<void(const Payload&)>;
  using ExitHook = std::function<void()>;

  // Throws UnknownInitialState / TableKeyMismatch. The trace is a ring of
  // at most trace_capacity records; older records are discarded.
  Machine(std::set<StateId> states, TransitionTable table, StateId initial,
          std::size_t trace_capacity = 10000);

  const StateId& current() const { return current_; }
  const StateId& initial() const { return initial_; }
  const TransitionTable& table() const { return table_; }
  const std::set<StateId>& states() const { return states_; }
  const std::deque<TraceRecord>& trace() const { return trace_; }
  std::size_t trace_capacity() const { return trace_capacity_; }

  void on_enter(const StateId& state, EnterHook hook);
  void on_exit(const StateId& state, ExitHook hook);

  // Runs exit(current), updates current, appends a trace record, then runs
  // enter(target, payload). Throws InvalidTransition (machine untouched) if
  // target is not permitted from the current state. A throwing hook converts
  // into an automatic transition to Error carrying ErrorInfo; a throw from
  // Error's own enter hook surfaces as FatalHookError.
  void transition(const StateId& target, Payload payload = NonePayload{});

 private:
  void run_enter(const StateId& state, const Payload& payload);
  void run_exit_suppressed(const StateId& state);
  void fail_to_error(const std::string& what);
  void append_trace(const StateId& from, const StateId& to, const Payload& p);

  std::set<StateId> states_;
  TransitionTable table_;
  StateId initial_;
  StateId current_;
  std::size_t trace_capacity_;
  std::deque<TraceRecord> trace_;
  std::map<StateId, EnterHook> enter_hooks_;
  std::map<StateId, ExitHook> exit_hooks_;
};

// Free-function form of the constructor.
Machine build_machine(std::set<StateId> states, TransitionTable table, StateId initial,
                      std::size_t trace_capacity = 10000);

// Replays a recorded trace on a fresh hookless machine and returns it.
// Records whose `from` does not match the machine's current state are
// skipped: those are auto-generated error hops that only a failing hook
// produces, and a hookless replay cannot re-trigger them.
Machine replay_trace(const std::set<StateId>& states, const TransitionTable& table,
                     const StateId& initial, const std::deque<TraceRecord>& trace);

}  // namespace kasper::fsm
