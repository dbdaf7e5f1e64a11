#include "kasper/audio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kasper::audio {

std::size_t window_length(int rate) {
  if (rate <= 0) throw AudioError("sample rate must be positive");
  return static_cast<std::size_t>((static_cast<long long>(rate) * 20) / 1000);
}

SamplingCheck validate_sampling(int rate, int max_frequency) {
  if (rate <= 0 || max_frequency <= 0) throw AudioError("rate and max_frequency must be positive");
  SamplingCheck check;
  check.required_min_rate = 2 * max_frequency;
  if (rate > 2 * max_frequency) {
    check.ok = true;
  } else {
    std::ostringstream msg;
    msg << "rate " << rate << " Hz undersamples a " << max_frequency
        << " Hz signal; need strictly more than " << check.required_min_rate << " Hz";
    check.message = msg.str();
  }
  return check;
}

std::vector<Frame> frame_signal(const AudioSignal& sig) {
  if (sig.samples.empty()) throw EmptySignal();
  const std::size_t window = window_length(sig.rate);
  if (window == 0) throw AudioError("rate too low for a 20 ms window");

  std::vector<Frame> frames;
  const std::size_t count = sig.samples.size() / window;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Frame f;
    f.index = i;
    f.samples.assign(sig.samples.begin() + static_cast<std::ptrdiff_t>(i * window),
                     sig.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * window));
    double sum_sq = 0.0;
    for (double s : f.samples) sum_sq += s * s;
    f.energy = sum_sq / static_cast<double>(window);
    frames.push_back(std::move(f));
  }
  return frames;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n == 0) throw AudioError("pearson: length mismatch");
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

std::optional<std::size_t> detect_hotword(const std::vector<Frame>& frames,
                                          const HotwordTemplate& tmpl) {
  const std::size_t len = tmpl.envelope.size();
  if (len < 2) throw AudioError("template envelope needs at least 2 frames");
  if (frames.size() < len) throw TemplateTooLong();

  std::vector<double> window(len);
  for (std::size_t offset = 0; offset + len <= frames.size(); ++offset) {
    for (std::size_t i = 0; i < len; ++i) window[i] = frames[offset + i].energy;
    if (pearson(tmpl.envelope, window) >= tmpl.threshold) return offset;
  }
  return std::nullopt;
}

namespace {

double parse_amplitude(const std::string& line, int line_no, const std::string& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(line, &pos);
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r')) ++pos;
    if (pos != line.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw MalformedSignalFile(path + ":" + std::to_string(line_no) + ": bad value '" + line + "'");
  }
}

}  // namespace

AudioSignal load_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AudioError("cannot open signal file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("rate=", 0) != 0) {
    throw MalformedSignalFile(path + ": first line must be rate=<Hz>");
  }
  AudioSignal sig;
  sig.rate = std::stoi(line.substr(5));
  if (sig.rate <= 0) throw MalformedSignalFile(path + ": rate must be positive");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    double v = parse_amplitude(line, line_no, path);
    if (v < -1.0 || v > 1.0) {
      throw MalformedSignalFile(path + ":" + std::to_string(line_no) + ": amplitude out of [-1,1]");
    }
    sig.samples.push_back(v);
  }
  return sig;
}

void save_signal(const AudioSignal& sig, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AudioError("cannot write signal file: " + path);
  out << "rate=" << sig.rate << "\n";
  char buf[64];
  for (double s : sig.samples) {
    std::snprintf(buf, sizeof(buf), "%.9f", s);
    out << buf << "\n";
  }
}

HotwordTemplate load_hotword_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AudioError("cannot open template file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("threshold=", 0) != 0) {
    throw MalformedSignalFile(path + ": first line must be threshold=<value>");
  }
  HotwordTemplate tmpl;
  tmpl.threshold = std::stod(line.substr(10));
  if (tmpl.threshold <= 0.0 || tmpl.threshold > 1.0) {
    throw MalformedSignalFile(path + ": threshold must be in (0, 1]");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    tmpl.envelope.push_back(parse_amplitude(line, line_no, path));
  }
  if (tmpl.envelope.size() < 2) {
    throw MalformedSignalFile(path + ": envelope needs at least 2 values");
  }
  return tmpl;
}

void save_hotword_template(const HotwordTemplate& tmpl, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw AudioError("cannot write template file: " + path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", tmpl.threshold);
  out << "threshold=" << buf << "\n";
  for (double e : tmpl.envelope) {
    std::snprintf(buf, sizeof(buf), "%.9f", e);
    out << buf << "\n";
  }
}

}  // namespace kasper::audio
