#include "kasper/transcriber.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace kasper::stt {

int symbol_index(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c == ' ') return kSpaceIndex;
  if (c == '\'') return kApostropheIndex;
  return -1;
}

char symbol_char(int index) {
  if (index >= 0 && index < 26) return static_cast<char>('A' + index);
  if (index == kSpaceIndex) return ' ';
  if (index == kApostropheIndex) return '\'';
  throw SttError("symbol index " + std::to_string(index) + " has no character");
}

std::string symbol_name(int index) {
  if (index >= 0 && index < 26) return std::string(1, static_cast<char>('A' + index));
  if (index == kSpaceIndex) return "SPACE";
  if (index == kApostropheIndex) return "APOS";
  if (index == kBlankIndex) return "BLANK";
  throw SttError("bad symbol index " + std::to_string(index));
}

std::optional<int> symbol_from_name(const std::string& name) {
  if (name.size() == 1) {
    int idx = symbol_index(name[0]);
    if (idx >= 0) return idx;
    return std::nullopt;
  }
  if (name == "SPACE") return kSpaceIndex;
  if (name == "APOS") return kApostropheIndex;
  if (name == "BLANK") return kBlankIndex;
  return std::nullopt;
}

IllegalSymbol::IllegalSymbol(const std::string& w, std::size_t p)
    : SttError("illegal symbol in \"" + w + "\" at position " + std::to_string(p)),
      word(w),
      position(p) {}

MissingTemplate::MissingTemplate(int symbol)
    : SttError("missing letter template for symbol " + symbol_name(symbol)) {}

double BigramLM::prob(int prev, int next) const {
  return (static_cast<double>(counts[prev][next]) + 1.0) /
         (static_cast<double>(row_totals[prev]) + static_cast<double>(kNonBlankCount));
}

double BigramLM::log_prob(int prev, int next) const { return std::log(prob(prev, next)); }

BigramLM train_bigram_lm(const std::vector<std::string>& corpus) {
  BigramLM lm;
  for (const auto& word : corpus) {
    std::vector<int> symbols;
    symbols.reserve(word.size());
    for (std::size_t i = 0; i < word.size(); ++i) {
      int idx = symbol_index(word[i]);
      if (idx < 0) throw IllegalSymbol(word, i);
      symbols.push_back(idx);
    }
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      lm.counts[symbols[i]][symbols[i + 1]] += 1;
      lm.row_totals[symbols[i]] += 1;
    }
  }
  return lm;
}

std::string collapse(const std::vector<int>& symbols) {
  std::string text;
  int prev = -1;
  for (int s : symbols) {
    if (s != prev && s != kBlankIndex) text.push_back(symbol_char(s));
    prev = s;
  }
  return text;
}

std::vector<double> frame_features(const audio::Frame& frame, std::size_t chunks) {
  if (chunks == 0) throw SttError("chunk count must be positive");
  if (frame.samples.size() < chunks) {
    throw SttError("frame too short for " + std::to_string(chunks) + " chunks");
  }
  std::vector<double> features(chunks, 0.0);
  const std::size_t n = frame.samples.size();
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * n / chunks;
    const std::size_t end = (c + 1) * n / chunks;
    double sum_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum_sq += frame.samples[i] * frame.samples[i];
    features[c] = sum_sq / static_cast<double>(end - begin);
  }
  return features;
}

LetterScores classify_frames(const std::vector<audio::Frame>& frames,
                             const LetterTemplates& templates) {
  if (frames.empty()) throw SttError("classify_frames: no frames");
  for (int sym = 0; sym < kAlphabetSize; ++sym) {
    if (!templates.prototypes.contains(sym)) throw MissingTemplate(sym);
  }
  const std::size_t k = templates.prototypes.begin()->second.size();
  for (const auto& [sym, proto] : templates.prototypes) {
    if (proto.size() != k) {
      throw SttError("letter templates disagree on prototype length (symbol " +
                     symbol_name(sym) + ")");
    }
  }

  LetterScores scores;
  scores.rows.reserve(frames.size());
  for (const auto& frame : frames) {
    std::vector<double> features = frame_features(frame, k);
    std::array<double, kAlphabetSize> row{};
    double sum = 0.0;
    for (int sym = 0; sym < kAlphabetSize; ++sym) {
      const auto& proto = templates.prototypes.at(sym);
      double dist_sq = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double d = features[i] - proto[i];
        dist_sq += d * d;
      }
      row[sym] = std::exp(-std::sqrt(dist_sq));
      sum += row[sym];
    }
    if (sum <= 0.0) {
      row.fill(1.0 / kAlphabetSize);
    } else {
      for (double& p : row) p /= sum;
    }
    scores.rows.push_back(row);
  }
  return scores;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// LM contribution for appending `next` after `prev`, centered so the
// uniform LM scores exactly zero.
double lm_term(const BigramLM& lm, int prev, int next) {
  return lm.log_prob(prev, next) - std::log(1.0 / kNonBlankCount);
}

struct BeamEntry {
  std::string text;  // collapsed so far
  int last_raw = kBlankIndex;
  double score = kNegInf;
  std::vector<int> raw_path;
};

bool better(const BeamEntry& a, const BeamEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.text != b.text) return a.text < b.text;
  return a.last_raw < b.last_raw;
}

}  // namespace

BeamHypothesis decode_beam_detailed(const LetterScores& scores, const BigramLM& lm,
                                    int beam_width, double lm_weight) {
  if (beam_width < 1) throw InvalidBeamWidth();

  std::vector<BeamEntry> beam;
  beam.push_back({"", kBlankIndex, 0.0, {}});

  for (const auto& row : scores.rows) {
    // expand every entry by every symbol, merging duplicate (text, last) states
    std::unordered_map<std::string, std::size_t> seen;
    std::vector<BeamEntry> next;
    next.reserve(beam.size() * kAlphabetSize);

    for (const auto& entry : beam) {
      for (int sym = 0; sym < kAlphabetSize; ++sym) {
        BeamEntry cand;
        cand.text = entry.text;
        cand.last_raw = sym;
        cand.score = entry.score + safe_log(row[sym]);
        if (sym != kBlankIndex && sym != entry.last_raw) {
          if (!cand.text.empty()) {
            const int prev = symbol_index(cand.text.back());
            cand.score += lm_weight * lm_term(lm, prev, sym);
          }
          cand.text.push_back(symbol_char(sym));
        }
        cand.raw_path = entry.raw_path;
        cand.raw_path.push_back(sym);

        std::string key = cand.text + '\x1f' + std::to_string(sym);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen.emplace(std::move(key), next.size());
          next.push_back(std::move(cand));
        } else if (better(cand, next[it->second])) {
          next[it->second] = std::move(cand);
        }
      }
    }

    std::stable_sort(next.begin(), next.end(), better);
    if (next.size() > static_cast<std::size_t>(beam_width)) {
      next.resize(static_cast<std::size_t>(beam_width));
    }
    beam = std::move(next);
  }

  const BeamEntry* best = &beam.front();
  for (const auto& entry : beam) {
    if (better(entry, *best)) best = &entry;
  }
  return {best->text, best->score, best->raw_path};
}

Transcript decode_beam(const LetterScores& scores, const BigramLM& lm, int beam_width,
                       double lm_weight) {
  BeamHypothesis hyp = decode_beam_detailed(scores, lm, beam_width, lm_weight);
  return {hyp.text, hyp.score};
}

double score_raw_path(const std::vector<int>& raw_path, const LetterScores& scores,
                      const BigramLM& lm, double lm_weight) {
  if (raw_path.size() != scores.rows.size()) {
    throw SttError("raw path length does not match frame count");
  }
  double acoustic = 0.0;
  for (std::size_t t = 0; t < raw_path.size(); ++t) {
    acoustic += safe_log(scores.rows[t][raw_path[t]]);
  }
  const std::string text = collapse(raw_path);
  double lm_sum = 0.0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    lm_sum += lm_term(lm, symbol_index(text[i]), symbol_index(text[i + 1]));
  }
  return acoustic + lm_weight * lm_sum;
}

LetterTemplates load_letter_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SttError("cannot open letter template file: " + path);
  LetterTemplates templates;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw SttError(path + ":" + std::to_string(line_no) + ": expected 'SYM: e1 e2 ...'");
    }
    auto sym = symbol_from_name(line.substr(0, colon));
    if (!sym) {
      throw SttError(path + ":" + std::to_string(line_no) + ": unknown symbol name");
    }
    std::istringstream values(line.substr(colon + 1));
    std::vector<double> proto;
    double v;
    while (values >> v) proto.push_back(v);
    if (proto.empty()) {
      throw SttError(path + ":" + std::to_string(line_no) + ": empty prototype");
    }
    templates.prototypes[*sym] = std::move(proto);
  }
  return templates;
}

void save_letter_templates(const LetterTemplates& templates, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SttError("cannot write letter template file: " + path);
  char buf[64];
  for (const auto& [sym, proto] : templates.prototypes) {
    out << symbol_name(sym) << ":";
    for (double e : proto) {
      std::snprintf(buf, sizeof(buf), "%.9f", e);
      out << " " << buf;
    }
    out << "\n";
  }
}

}  // namespace kasper::stt
