#include "kasper/assistant.hpp"

#include <sstream>

namespace kasper::assistant {

namespace {

Event make(Event::Kind kind, std::int64_t t) {
  if (t < 0) throw InvalidEvent("event timestamp must be non-negative");
  Event ev;
  ev.kind = kind;
  ev.t_ms = t;
  return ev;
}

}  // namespace

Event Event::hotword(std::int64_t t) { return make(Kind::HotwordDetected, t); }
Event Event::wake_button(std::int64_t t) { return make(Kind::WakeButtonPressed, t); }

Event Event::transcript_ready(std::int64_t t, std::string text) {
  if (text.empty()) throw InvalidEvent("TranscriptReady requires non-empty text");
  Event ev = make(Kind::TranscriptReady, t);
  ev.text = std::move(text);
  return ev;
}

Event Event::recognition_failed(std::int64_t t, std::string message) {
  Event ev = make(Kind::RecognitionFailed, t);
  ev.message = std::move(message);
  return ev;
}

Event Event::response_ready(std::int64_t t, std::string intent, std::string text) {
  if (text.empty()) throw InvalidEvent("ResponseReady requires non-empty text");
  Event ev = make(Kind::ResponseReady, t);
  ev.intent = std::move(intent);
  ev.text = std::move(text);
  return ev;
}

Event Event::response_spoken(std::int64_t t) { return make(Kind::ResponseSpoken, t); }

Event Event::query_failed(std::int64_t t, std::string message) {
  Event ev = make(Kind::QueryFailed, t);
  ev.message = std::move(message);
  return ev;
}

Event Event::error_announced(std::int64_t t) { return make(Kind::ErrorAnnounced, t); }

Event Event::media_play(std::int64_t t, std::string track) {
  if (track.empty()) throw InvalidEvent("MediaCommand play requires a track id");
  Event ev = make(Kind::MediaCommand, t);
  ev.media_op = MediaOp::Play;
  ev.track = std::move(track);
  return ev;
}

Event Event::media_pause(std::int64_t t) {
  Event ev = make(Kind::MediaCommand, t);
  ev.media_op = MediaOp::Pause;
  return ev;
}

Event Event::media_stop(std::int64_t t) {
  Event ev = make(Kind::MediaCommand, t);
  ev.media_op = MediaOp::Stop;
  return ev;
}

std::string kind_name(Event::Kind k) {
  switch (k) {
    case Event::Kind::HotwordDetected: return "HotwordDetected";
    case Event::Kind::WakeButtonPressed: return "WakeButtonPressed";
    case Event::Kind::TranscriptReady: return "TranscriptReady";
    case Event::Kind::RecognitionFailed: return "RecognitionFailed";
    case Event::Kind::ResponseReady: return "ResponseReady";
    case Event::Kind::ResponseSpoken: return "ResponseSpoken";
    case Event::Kind::QueryFailed: return "QueryFailed";
    case Event::Kind::ErrorAnnounced: return "ErrorAnnounced";
    case Event::Kind::MediaCommand: return "MediaCommand";
  }
  return "?";
}

std::string to_string(const Event& ev) {
  std::ostringstream out;
  out << kind_name(ev.kind);
  switch (ev.kind) {
    case Event::Kind::TranscriptReady:
    case Event::Kind::ResponseReady:
      out << " \"" << ev.text << "\"";
      break;
    case Event::Kind::RecognitionFailed:
    case Event::Kind::QueryFailed:
      out << " \"" << ev.message << "\"";
      break;
    case Event::Kind::MediaCommand:
      switch (ev.media_op) {
        case MediaOp::Play: out << " play \"" << ev.track << "\""; break;
        case MediaOp::Pause: out << " pause"; break;
        case MediaOp::Stop: out << " stop"; break;
      }
      break;
    default:
      break;
  }
  return out.str();
}

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::StartRecognizer: return "StartRecognizer";
    case Action::Kind::StopRecognizer: return "StopRecognizer";
    case Action::Kind::StartBusyHotwordDetector: return "StartBusyHotwordDetector";
    case Action::Kind::StopBusyHotwordDetector: return "StopBusyHotwordDetector";
    case Action::Kind::CallBrain: return "CallBrain(\"" + a.arg + "\")";
    case Action::Kind::Speak: return "Speak(\"" + a.arg + "\")";
    case Action::Kind::PauseMedia: return "PauseMedia";
    case Action::Kind::ResumeMedia: return "ResumeMedia";
    case Action::Kind::PlayMedia: return "PlayMedia(\"" + a.arg + "\")";
  }
  return "?";
}

std::string to_string(const std::vector<Action>& actions) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out << ", ";
    out << to_string(actions[i]);
  }
  out << "]";
  return out.str();
}

fsm::TransitionTable kasper_table() {
  fsm::TransitionTable table;
  table.allowed[kIdle] = {kRecognizing, kError};
  table.allowed[kRecognizing] = {kBusy, kIdle, kError};
  table.allowed[kBusy] = {kIdle, kRecognizing, kError};  // Busy->Recognizing is the interrupt edge
  table.allowed[kError] = {kIdle};
  return table;
}

AssistantContext::AssistantContext()
    : machine({kIdle, kRecognizing, kBusy, kError}, kasper_table(), kIdle) {}

namespace {

constexpr const char* kErrorTemplate = "Sorry, something went wrong: ";

void warn(AssistantContext& ctx, const Event& ev, const std::string& why) {
  ctx.warnings.push_back("dropped " + kind_name(ev.kind) + " in state " +
                         ctx.state() + ": " + why);
}

std::vector<Action> apply_media(AssistantContext& ctx, const Event& ev) {
  std::vector<Action> actions;
  switch (ev.media_op) {
    case MediaOp::Play:
      ctx.media = {MediaStatus::Playing, ev.track};
      ctx.user_paused = false;
      actions.push_back({Action::Kind::PlayMedia, ev.track});
      break;
    case MediaOp::Pause:
      if (ctx.media.status == MediaStatus::Playing) {
        ctx.media.status = MediaStatus::Paused;
        ctx.user_paused = true;
        actions.push_back({Action::Kind::PauseMedia, ""});
      } else {
        warn(ctx, ev, "pause with nothing playing");
      }
      break;
    case MediaOp::Stop:
      ctx.media = {MediaStatus::Stopped, std::nullopt};
      ctx.user_paused = false;
      break;
  }
  return actions;
}

std::vector<Action> fail(AssistantContext& ctx, const std::string& message,
                         std::vector<Action> pre_actions) {
  ctx.machine.transition(kError, fsm::ErrorInfo{1, message});
  std::string spoken = kErrorTemplate + message;
  ctx.spoken_log.push_back(spoken);
  pre_actions.push_back({Action::Kind::Speak, spoken});
  return pre_actions;
}

// The whole interrupt chain is over once the machine settles back in Idle
// (query completed or errored out); the bottom context holds the media state
// from before the first interrupt.
void drain_interrupts(AssistantContext& ctx, std::vector<Action>& actions) {
  if (ctx.interrupt_stack.empty()) return;
  fsm::InterruptContext original = ctx.interrupt_stack.front();
  ctx.interrupt_stack.clear();
  if (original.saved_status == MediaStatus::Playing) {
    ctx.media = {MediaStatus::Playing, original.saved_track};
    ctx.user_paused = false;
    actions.push_back({Action::Kind::ResumeMedia, ""});
  } else {
    ctx.media = {original.saved_status, original.saved_track};
    ctx.user_paused = original.saved_status == MediaStatus::Paused;
  }
}

}  // namespace

std::vector<Action> interrupt_busy(AssistantContext& ctx) {
  if (ctx.state() != kBusy) throw NotBusy();

  fsm::InterruptContext saved{ctx.media.status, ctx.media.track};
  ctx.interrupt_stack.push_back(saved);

  std::vector<Action> actions;
  if (ctx.media.status == MediaStatus::Playing) {
    ctx.media.status = MediaStatus::Paused;
    ctx.user_paused = false;
    actions.push_back({Action::Kind::PauseMedia, ""});
  }
  ctx.machine.transition(kRecognizing, saved);
  actions.push_back({Action::Kind::StopBusyHotwordDetector, ""});
  actions.push_back({Action::Kind::StartRecognizer, ""});
  return actions;
}

std::vector<Action> handle_event(AssistantContext& ctx, const Event& ev) {
  const fsm::StateId& state = ctx.state();

  if (ev.kind == Event::Kind::MediaCommand) {
    // valid in Idle and Busy only; recognition must not be perturbed
    if (state == kIdle || state == kBusy) return apply_media(ctx, ev);
    warn(ctx, ev, "media commands are ignored here");
    return {};
  }

  if (state == kIdle) {
    switch (ev.kind) {
      case Event::Kind::HotwordDetected:
      case Event::Kind::WakeButtonPressed:
        ctx.machine.transition(kRecognizing);
        return {{Action::Kind::StartRecognizer, ""}};
      default:
        break;
    }
  } else if (state == kRecognizing) {
    switch (ev.kind) {
      case Event::Kind::TranscriptReady: {
        ctx.machine.transition(kBusy, fsm::TranscriptText{ev.text});
        return {{Action::Kind::StopRecognizer, ""},
                {Action::Kind::CallBrain, ev.text},
                {Action::Kind::StartBusyHotwordDetector, ""}};
      }
      case Event::Kind::RecognitionFailed:
        return fail(ctx, ev.message, {{Action::Kind::StopRecognizer, ""}});
      default:
        break;
    }
  } else if (state == kBusy) {
    switch (ev.kind) {
      case Event::Kind::ResponseReady:
        ctx.spoken_log.push_back(ev.text);
        return {{Action::Kind::Speak, ev.text}};
      case Event::Kind::ResponseSpoken: {
        ctx.machine.transition(kIdle);
        std::vector<Action> actions{{Action::Kind::StopBusyHotwordDetector, ""}};
        drain_interrupts(ctx, actions);
        return actions;
      }
      case Event::Kind::HotwordDetected:
      case Event::Kind::WakeButtonPressed:
        return interrupt_busy(ctx);
      case Event::Kind::QueryFailed:
        return fail(ctx, ev.message, {{Action::Kind::StopBusyHotwordDetector, ""}});
      default:
        break;
    }
  } else if (state == kError) {
    if (ev.kind == Event::Kind::ErrorAnnounced) {
      ctx.machine.transition(kIdle);
      std::vector<Action> actions;
      drain_interrupts(ctx, actions);
      return actions;
    }
  }

  warn(ctx, ev, "no dispatch rule for this pair");
  return {};
}

void EventQueue::push(Event ev) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    events_.push_back(std::move(ev));
  }
  cv_.notify_one();
}

std::optional<Event> EventQueue::try_pop() {
  std::lock_guard<std::mutex> lock(mu_);
  if (events_.empty()) return std::nullopt;
  Event ev = std::move(events_.front());
  events_.pop_front();
  return ev;
}

Event EventQueue::pop_blocking() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return !events_.empty(); });
  Event ev = std::move(events_.front());
  events_.pop_front();
  return ev;
}

std::size_t EventQueue::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return events_.size();
}

}  // namespace kasper::assistant
