#pragma once

// Sampled-signal model, Nyquist validation, 20 ms framing, and a
// deterministic template-correlation hotword detector. Pure functions over
// immutable inputs; safe to call concurrently.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kasper::audio {

struct AudioSignal {
  int rate = 16000;             // samples per second, > 0
  std::vector<double> samples;  // amplitudes in [-1, 1]
};

struct Frame {
  std::vector<double> samples;  // exactly one 20 ms window
  std::size_t index = 0;
  double energy = 0.0;          // mean of squared samples
};

struct HotwordTemplate {
  std::vector<double> envelope;  // per-frame energies, length >= 2
  double threshold = 0.90;       // correlation threshold in (0, 1]
};

struct AudioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySignal : AudioError {
  EmptySignal() : AudioError("signal has no samples") {}
};
struct TemplateTooLong : AudioError {
  TemplateTooLong() : AudioError("template envelope longer than the frame sequence") {}
};
struct MalformedSignalFile : AudioError {
  using AudioError::AudioError;
};

// 20 ms of samples, floor(rate * 0.020), computed in exact integer arithmetic.
std::size_t window_length(int rate);

struct SamplingCheck {
  bool ok = false;
  int required_min_rate = 0;  // any rate strictly above 2 * max_frequency
  std::string message;
};

// Nyquist: ok iff rate > 2 * max_frequency (strict).
SamplingCheck validate_sampling(int rate, int max_frequency);

// Non-overlapping consecutive 20 ms windows; a trailing partial window is
// dropped. Throws EmptySignal.
std::vector<Frame> frame_signal(const AudioSignal& sig);

// Smallest offset whose window of frame energies has Pearson correlation
// >= tmpl.threshold with tmpl.envelope; zero-variance windows correlate as 0.
std::optional<std::size_t> detect_hotword(const std::vector<Frame>& frames,
                                          const HotwordTemplate& tmpl);

// Pearson correlation; 0 when either side has zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Signal fixture file: line 1 "rate=<Hz>", then one amplitude per line.
AudioSignal load_signal(const std::string& path);
void save_signal(const AudioSignal& sig, const std::string& path);

// Template fixture file: line 1 "threshold=<value>", then one energy per line.
HotwordTemplate load_hotword_template(const std::string& path);
void save_hotword_template(const HotwordTemplate& tmpl, const std::string& path);

}  // namespace kasper::audio
