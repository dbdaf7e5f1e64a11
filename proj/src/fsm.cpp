#include "kasper/fsm.hpp"

#include <sstream>

namespace kasper::fsm {

std::string to_string(MediaStatus s) {
  switch (s) {
    case MediaStatus::Playing: return "Playing";
    case MediaStatus::Paused: return "Paused";
    case MediaStatus::Stopped: return "Stopped";
  }
  return "?";
}

std::string payload_kind(const Payload& p) {
  struct Visitor {
    std::string operator()(const NonePayload&) const { return "None"; }
    std::string operator()(const TranscriptText&) const { return "TranscriptText"; }
    std::string operator()(const ErrorInfo&) const { return "ErrorInfo"; }
    std::string operator()(const InterruptContext&) const { return "InterruptContext"; }
  };
  return std::visit(Visitor{}, p);
}

std::string to_string(const TableViolation& v) {
  std::ostringstream out;
  switch (v.kind) {
    case TableViolation::Kind::UnknownTarget: out << "UnknownTarget(" << v.state << ")"; break;
    case TableViolation::Kind::MissingErrorEdge: out << "MissingErrorEdge(" << v.state << ")"; break;
    case TableViolation::Kind::ErrorMustOnlyGoIdle: out << "ErrorMustOnlyGoIdle"; break;
    case TableViolation::Kind::ErrorStateMissing: out << "ErrorStateMissing"; break;
  }
  if (!v.detail.empty()) out << ": " << v.detail;
  return out.str();
}

std::vector<TableViolation> validate_table(const TransitionTable& table) {
  std::vector<TableViolation> out;
  const bool has_error_state = table.allowed.contains(kErrorState);
  if (!has_error_state) {
    out.push_back({TableViolation::Kind::ErrorStateMissing, kErrorState,
                   "table has no Error state"});
  }
  for (const auto& [state, targets] : table.allowed) {
    for (const auto& target : targets) {
      if (!table.allowed.contains(target)) {
        out.push_back({TableViolation::Kind::UnknownTarget, state,
                       "edge " + state + " -> " + target + " points outside the table"});
      }
    }
    if (state != kErrorState && !targets.contains(kErrorState)) {
      out.push_back({TableViolation::Kind::MissingErrorEdge, state,
                     state + " cannot fail into Error"});
    }
  }
  if (has_error_state) {
    const auto& error_targets = table.allowed.at(kErrorState);
    if (error_targets != std::set<StateId>{kIdleState}) {
      out.push_back({TableViolation::Kind::ErrorMustOnlyGoIdle, kErrorState,
                     "allowed[Error] must be exactly {Idle}"});
    }
  }
  return out;
}

UnknownInitialState::UnknownInitialState(const StateId& s)
    : FsmError("unknown initial state: " + s) {}

TableKeyMismatch::TableKeyMismatch(const std::string& detail)
    : FsmError("table keys do not match the state set: " + detail) {}

InvalidTransition::InvalidTransition(StateId f, StateId t)
    : FsmError("invalid transition: " + f + " -> " + t), from(std::move(f)), to(std::move(t)) {}

FatalHookError::FatalHookError(const std::string& detail)
    : FsmError("fatal: Error-state enter hook failed: " + detail) {}

PayloadInvariantViolation::PayloadInvariantViolation(const std::string& detail)
    : FsmError("payload invariant violated: " + detail) {}

std::string to_string(const TraceRecord& r) {
  return r.from + " -> " + r.to + " [" + r.payload_kind + "]";
}

namespace {

void check_payload(const Payload& p) {
  if (const auto* t = std::get_if<TranscriptText>(&p); t && t->text.empty()) {
    throw PayloadInvariantViolation("TranscriptText carries empty text");
  }
}

}  // namespace

Machine::Machine(std::set<StateId> states, TransitionTable table, StateId initial,
                 std::size_t trace_capacity)
    : states_(std::move(states)),
      table_(std::move(table)),
      initial_(std::move(initial)),
      current_(initial_),
      trace_capacity_(trace_capacity) {
  if (!states_.contains(initial_)) throw UnknownInitialState(initial_);
  std::set<StateId> keys;
  for (const auto& [k, _] : table_.allowed) keys.insert(k);
  if (keys != states_) {
    std::ostringstream detail;
    for (const auto& s : states_)
      if (!keys.contains(s)) detail << "state without table entry: " << s << "; ";
    for (const auto& k : keys)
      if (!states_.contains(k)) detail << "table entry without state: " << k << "; ";
    throw TableKeyMismatch(detail.str());
  }
}

void Machine::on_enter(const StateId& state, EnterHook hook) {
  if (!states_.contains(state)) throw FsmError("on_enter: unknown state " + state);
  enter_hooks_[state] = std::move(hook);
}

void Machine::on_exit(const StateId& state, ExitHook hook) {
  if (!states_.contains(state)) throw FsmError("on_exit: unknown state " + state);
  exit_hooks_[state] = std::move(hook);
}

void Machine::append_trace(const StateId& from, const StateId& to, const Payload& p) {
  trace_.push_back({from, to, payload_kind(p)});
  while (trace_.size() > trace_capacity_) trace_.pop_front();
}

void Machine::run_enter(const StateId& state, const Payload& payload) {
  auto it = enter_hooks_.find(state);
  if (it != enter_hooks_.end() && it->second) it->second(payload);
}

void Machine::run_exit_suppressed(const StateId& state) {
  auto it = exit_hooks_.find(state);
  if (it == exit_hooks_.end() || !it->second) return;
  try {
    it->second();
  } catch (...) {
    // already failing; the pairing matters more than the second error
  }
}

void Machine::fail_to_error(const std::string& what) {
  if (current_ == kErrorState) throw FatalHookError(what);
  Payload info = ErrorInfo{1, what};
  StateId from = current_;
  current_ = kErrorState;
  append_trace(from, kErrorState, info);
  try {
    run_enter(kErrorState, info);
  } catch (const std::exception& e) {
    throw FatalHookError(e.what());
  }
}

void Machine::transition(const StateId& target, Payload payload) {
  check_payload(payload);
  auto it = table_.allowed.find(current_);
  if (it == table_.allowed.end() || !it->second.contains(target) ||
      !table_.allowed.contains(target)) {
    throw InvalidTransition(current_, target);
  }

  // exit(old) -> update current -> enter(new, payload); a hook failure
  // converts into an automatic hop to Error (permitted by table convention).
  auto exit_it = exit_hooks_.find(current_);
  if (exit_it != exit_hooks_.end() && exit_it->second) {
    try {
      exit_it->second();
    } catch (const std::exception& e) {
      fail_to_error(e.what());
      return;
    }
  }

  StateId from = current_;
  current_ = target;
  append_trace(from, target, payload);
  try {
    run_enter(target, payload);
  } catch (const std::exception& e) {
    run_exit_suppressed(target);
    fail_to_error(e.what());
  }
}

Machine build_machine(std::set<StateId> states, TransitionTable table, StateId initial,
                      std::size_t trace_capacity) {
  return Machine(std::move(states), std::move(table), std::move(initial), trace_capacity);
}

namespace {

Payload payload_of_kind(const std::string& kind) {
  if (kind == "TranscriptText") return TranscriptText{"replay"};
  if (kind == "ErrorInfo") return ErrorInfo{1, "replay"};
  if (kind == "InterruptContext") return InterruptContext{};
  return NonePayload{};
}

}  // namespace

Machine replay_trace(const std::set<StateId>& states, const TransitionTable& table,
                     const StateId& initial, const std::deque<TraceRecord>& trace) {
  Machine m(states, table, initial, std::max<std::size_t>(trace.size() + 1, 1));
  for (const auto& rec : trace) {
    if (rec.from != m.current()) continue;  // auto-generated error hop
    m.transition(rec.to, payload_of_kind(rec.payload_kind));
  }
  return m;
}

}  // namespace kasper::fsm
