#pragma once

// Desk-scale speech decoder: per-frame letter scoring against energy
// prototypes, repeat-collapse, and bigram language-model beam search.
// All functions are pure; a trained BigramLM is immutable.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kasper/audio.hpp"

namespace kasper::stt {

// Alphabet: A-Z, space, apostrophe (28 non-blank symbols) plus blank.
inline constexpr int kAlphabetSize = 29;
inline constexpr int kNonBlankCount = 28;
inline constexpr int kSpaceIndex = 26;
inline constexpr int kApostropheIndex = 27;
inline constexpr int kBlankIndex = 28;

// Index for 'A'..'Z', ' ', '\''; -1 for anything else (blank has no char).
int symbol_index(char c);
char symbol_char(int index);        // non-blank indices only
std::string symbol_name(int index); // "A".."Z", "SPACE", "APOS", "BLANK"
std::optional<int> symbol_from_name(const std::string& name);

struct SttError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllegalSymbol : SttError {
  IllegalSymbol(const std::string& word, std::size_t position);
  std::string word;
  std::size_t position;
};
struct MissingTemplate : SttError {
  explicit MissingTemplate(int symbol);
};
struct InvalidBeamWidth : SttError {
  InvalidBeamWidth() : SttError("beam width must be >= 1") {}
};

// Per-frame probability rows over the 29-symbol alphabet; each row sums to 1.
struct LetterScores {
  std::vector<std::array<double, kAlphabetSize>> rows;
};

struct BigramLM {
  // Adjacent-pair counts over the 28 non-blank symbols, add-one smoothed:
  // P(b|a) = (count(a,b) + 1) / (count(a,.) + 28). Strictly positive.
  std::array<std::array<std::uint64_t, kNonBlankCount>, kNonBlankCount> counts{};
  std::array<std::uint64_t, kNonBlankCount> row_totals{};

  double prob(int prev, int next) const;
  double log_prob(int prev, int next) const;
};

struct Transcript {
  std::string text;   // collapsed, no blanks, no framing repeats
  double score = 0.0; // total log-probability (acoustic + weighted LM terms)
};

// Per-symbol energy prototypes; all prototypes share one length.
struct LetterTemplates {
  std::map<int, std::vector<double>> prototypes;
};

// Fixture format: one line per symbol, "SYM: e1 e2 ... ek".
LetterTemplates load_letter_templates(const std::string& path);
void save_letter_templates(const LetterTemplates& templates, const std::string& path);

// Frame similarity to each prototype via exponentiated negative Euclidean
// distance between the frame's chunk-energy vector and the prototype,
// normalized to a distribution. Throws MissingTemplate.
LetterScores classify_frames(const std::vector<audio::Frame>& frames,
                             const LetterTemplates& templates);

// Chunk-energy feature: the frame split into `chunks` contiguous runs, each
// reduced to its mean squared amplitude.
std::vector<double> frame_features(const audio::Frame& frame, std::size_t chunks);

// Removes blanks and merges maximal runs of identical adjacent symbols.
std::string collapse(const std::vector<int>& symbols);

// Counts adjacent pairs inside each word (case-folded to upper);
// throws IllegalSymbol for characters outside the 28-symbol alphabet.
BigramLM train_bigram_lm(const std::vector<std::string>& corpus);

// Beam search maximizing sum(log P_acoustic) plus, per consecutive character
// pair of the collapsed hypothesis, lambda * (log P_lm(next|prev) - log 1/28).
// LM terms are centered against the uniform baseline so a uniform LM is
// exactly neutral and lambda acts purely as a disambiguator, not a length
// penalty. With lambda = 0 and width 1 this reduces to per-frame argmax +
// collapse.
Transcript decode_beam(const LetterScores& scores, const BigramLM& lm,
                       int beam_width, double lm_weight);

struct BeamHypothesis {
  std::string text;
  double score = 0.0;
  std::vector<int> raw_path;  // one symbol per frame, pre-collapse
};

// decode_beam plus the winning raw path, for score self-consistency checks.
BeamHypothesis decode_beam_detailed(const LetterScores& scores, const BigramLM& lm,
                                    int beam_width, double lm_weight);

// Recomputes a raw path's score term by term (test oracle support).
double score_raw_path(const std::vector<int>& raw_path, const LetterScores& scores,
                      const BigramLM& lm, double lm_weight);

}  // namespace kasper::stt
