#pragma once

// Deterministic synthetic-corpus generator for the 22 intent classes:
// per-class utterance templates with slot-filler word lists, expanded by a
// seeded choice of fillers. Generation is a pure function of (spec, seed).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kasper/intent.hpp"

namespace kasper::corpus {

struct CorpusSpec {
  // templates[class index] -> patterns with {slot} placeholders (>= 3 each)
  std::map<int, std::vector<std::string>> templates;
  std::map<std::string, std::vector<std::string>> slots;
  std::uint64_t seed = 42;
  int per_class = 50;
};

struct ClassWithoutTemplates : intent::IntentError {
  explicit ClassWithoutTemplates(int class_idx)
      : intent::IntentError("corpus spec has no templates for class: " +
                            std::string(intent::class_label(class_idx))) {}
};
struct UnknownSlot : intent::IntentError {
  explicit UnknownSlot(const std::string& name)
      : intent::IntentError("template references unknown slot: " + name) {}
};

// The bundled spec: every class mixes class-specific templates with sentence
// frames shared across classes, so surface form alone does not give the
// class away.
CorpusSpec default_spec();

intent::Dataset generate_corpus(const CorpusSpec& spec);

}  // namespace kasper::corpus
