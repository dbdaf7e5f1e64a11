#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "kasper/audio.hpp"
#include "kasper/rng.hpp"

using namespace kasper;
using audio::AudioSignal;
using audio::Frame;
using audio::HotwordTemplate;

namespace {

// brute-force oracle: best correlation at every offset, no early return
std::optional<std::size_t> detect_oracle(const std::vector<Frame>& frames,
                                         const HotwordTemplate& tmpl) {
  const std::size_t len = tmpl.envelope.size();
  for (std::size_t o = 0; o + len <= frames.size(); ++o) {
    std::vector<double> window;
    for (std::size_t i = 0; i < len; ++i) window.push_back(frames[o + i].energy);
    if (audio::pearson(tmpl.envelope, window) >= tmpl.threshold) return o;
  }
  return std::nullopt;
}

AudioSignal constant_amplitude_signal(int rate, const std::vector<double>& per_frame_amp) {
  AudioSignal sig;
  sig.rate = rate;
  const std::size_t window = audio::window_length(rate);
  for (double amp : per_frame_amp) {
    for (std::size_t i = 0; i < window; ++i) sig.samples.push_back(amp);
  }
  return sig;
}

}  // namespace

TEST_CASE("validate_sampling is strict about the Nyquist bound") {
  CHECK(audio::validate_sampling(16000, 7999).ok);
  CHECK_FALSE(audio::validate_sampling(16000, 8000).ok);
  CHECK_FALSE(audio::validate_sampling(8000, 8000).ok);

  const auto v = audio::validate_sampling(16000, 8000);
  CHECK(v.required_min_rate == 16000);
  CHECK(v.message.find("16000") != std::string::npos);
}

TEST_CASE("frame_signal cuts exact 20 ms windows and drops the tail") {
  AudioSignal sig;
  sig.rate = 16000;
  sig.samples.assign(6400, 0.25);
  const auto frames = audio::frame_signal(sig);
  REQUIRE(frames.size() == 20);
  CHECK(frames[0].samples.size() == 320);
  CHECK(frames[19].index == 19);
  CHECK(frames[0].energy == doctest::Approx(0.0625));

  sig.rate = 8000;
  sig.samples.assign(159, 0.1);
  CHECK(audio::frame_signal(sig).empty());

  sig.rate = 16000;
  sig.samples.assign(329, 0.1);
  CHECK(audio::frame_signal(sig).size() == 1);

  sig.samples.clear();
  CHECK_THROWS_AS(audio::frame_signal(sig), audio::EmptySignal);
}

TEST_CASE("framing conservation holds for random rates and lengths") {
  DetRng rng(7);
  for (int i = 0; i < 200; ++i) {
    const int rate = 1000 + static_cast<int>(rng.next_below(47000));
    const std::size_t total = 1 + static_cast<std::size_t>(rng.next_below(20000));
    AudioSignal sig;
    sig.rate = rate;
    sig.samples.assign(total, 0.0);
    const std::size_t window = audio::window_length(rate);
    const auto frames = audio::frame_signal(sig);
    CHECK(frames.size() == total / window);
    const std::size_t discarded = total - frames.size() * window;
    CHECK(discarded < window);
  }
}

TEST_CASE("a self-matching envelope is found at the right offset") {
  // frames with energies ~ [0, 1, 16, 1, 0, 0] via amplitudes 0, 1, 4, ...
  const AudioSignal sig = constant_amplitude_signal(1000, {0.0, 0.25, 1.0, 0.25, 0.0, 0.0});
  const auto frames = audio::frame_signal(sig);
  REQUIRE(frames.size() == 6);

  HotwordTemplate tmpl;
  tmpl.envelope = {0.0625, 1.0, 0.0625};
  tmpl.threshold = 0.999;
  const auto hit = audio::detect_hotword(frames, tmpl);
  REQUIRE(hit.has_value());
  CHECK(*hit == 1);
  CHECK(detect_oracle(frames, tmpl) == hit);
}

TEST_CASE("all-zero signal never matches a nonconstant template") {
  const AudioSignal sig = constant_amplitude_signal(1000, {0.0, 0.0, 0.0, 0.0});
  const auto frames = audio::frame_signal(sig);
  HotwordTemplate tmpl;
  tmpl.envelope = {0.1, 0.9};
  CHECK_FALSE(audio::detect_hotword(frames, tmpl).has_value());
}

TEST_CASE("template embedded in low-amplitude noise is found at offset 3") {
  DetRng rng(13);
  std::vector<double> amps;
  for (int i = 0; i < 3; ++i) amps.push_back(0.005 + 0.004 * rng.next_double());
  amps.insert(amps.end(), {0.2, 0.8, 0.2});  // energies 0.04, 0.64, 0.04 ~ shape [1, 16, 1]
  for (int i = 0; i < 3; ++i) amps.push_back(0.005 + 0.004 * rng.next_double());

  const AudioSignal sig = constant_amplitude_signal(2000, amps);
  const auto frames = audio::frame_signal(sig);
  HotwordTemplate tmpl;
  tmpl.envelope = {1.0, 16.0, 1.0};
  tmpl.threshold = 0.9;
  const auto hit = audio::detect_hotword(frames, tmpl);
  REQUIRE(hit.has_value());
  CHECK(*hit == 3);
  CHECK(detect_oracle(frames, tmpl) == hit);
}

TEST_CASE("detection is invariant under amplitude scaling") {
  DetRng rng(31);
  std::vector<double> amps;
  for (int i = 0; i < 12; ++i) amps.push_back(0.02 + 0.28 * rng.next_double());
  HotwordTemplate tmpl;
  tmpl.envelope = {amps[4] * amps[4], amps[5] * amps[5], amps[6] * amps[6]};
  tmpl.threshold = 0.95;

  const AudioSignal base = constant_amplitude_signal(1000, amps);
  const auto base_frames = audio::frame_signal(base);
  const auto base_hit = audio::detect_hotword(base_frames, tmpl);
  REQUIRE(base_hit.has_value());

  for (double c : {0.5, 2.0, 3.2}) {  // amplitudes stay within [-1, 1]
    AudioSignal scaled = base;
    for (double& s : scaled.samples) s *= c;
    const auto frames = audio::frame_signal(scaled);
    CHECK(audio::detect_hotword(frames, tmpl) == base_hit);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      CHECK(frames[i].energy == doctest::Approx(c * c * base_frames[i].energy));
    }
  }
}

TEST_CASE("detect_hotword rejects templates longer than the signal") {
  const AudioSignal sig = constant_amplitude_signal(1000, {0.1, 0.2});
  HotwordTemplate tmpl;
  tmpl.envelope = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(audio::detect_hotword(audio::frame_signal(sig), tmpl),
                  audio::TemplateTooLong);
}

TEST_CASE("signal files round-trip through the text format") {
  AudioSignal sig;
  sig.rate = 16000;
  DetRng rng(5);
  for (int i = 0; i < 700; ++i) sig.samples.push_back(rng.next_in(-1.0, 1.0));

  const std::string path = std::filesystem::temp_directory_path() / "kasper_sig_test.sig";
  audio::save_signal(sig, path);
  const AudioSignal loaded = audio::load_signal(path);
  CHECK(loaded.rate == sig.rate);
  REQUIRE(loaded.samples.size() == sig.samples.size());
  for (std::size_t i = 0; i < sig.samples.size(); ++i) {
    CHECK(loaded.samples[i] == doctest::Approx(sig.samples[i]).epsilon(1e-8));
  }
  std::remove(path.c_str());
}
