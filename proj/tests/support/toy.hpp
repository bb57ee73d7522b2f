// Deterministic synthetic GEC corpus with planted coupled edits and planted
// Corrected/Reasonable labels, used by the end-to-end tests.
//
// Sentence template (token positions in brackets):
//   the[0] SUBJ[1] ADV[2] then[3] VERB[4] it[5] PRT[6] before[7] NOUN[8] .[9]
// The ADV slot is optional. Each corrupted source carries:
//   - a coupled verb+particle error (two separated substitutions) whose
//     combined form produces a trigram never seen in the fluent corpus,
//     while either half-corrected form is a frequent fluent pattern;
//   - an out-of-vocabulary misspelled noun (clearly critical);
//   - optionally a synonym swap in the ADV slot (stylistic).
// Ranking the synonym swap above either coupling half is an inversion; the
// fluent-corpus frequencies are tuned so leave-one-out scoring from the full
// target does exactly that, while merged scoring does not.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "editimpact/eval.hpp"
#include "editimpact/rng.hpp"

namespace toy {

struct Slots {
  std::vector<std::string> subjects = {"cat",  "dog",  "girl",   "boy",  "man",    "woman",
                                       "bird", "fox",  "cook",   "nurse", "farmer", "guard"};
  std::vector<std::string> verbs = {"turn", "bring", "shut", "pick", "put",  "set",
                                    "take", "give",  "hold", "send", "drop", "keep",
                                    "pull", "push",  "call", "hand"};
  std::vector<std::string> particles = {"off",  "in",   "up",    "down", "over", "back",
                                        "away", "out",  "on",    "along", "about", "around",
                                        "after", "by",  "near",  "past"};
  std::vector<std::string> adv_primary = {"quickly", "slowly",  "quietly", "loudly",
                                          "bravely", "calmly",  "eagerly", "gladly",
                                          "neatly",  "proudly", "rarely",  "safely",
                                          "sadly",   "warmly",  "wisely",  "badly"};
  std::vector<std::string> adv_alt = {"swiftly",  "gently",   "softly",   "noisily",
                                      "boldly",   "coolly",   "keenly",   "happily",
                                      "tidily",   "grandly",  "seldomly", "surely",
                                      "gloomily", "kindly",   "shrewdly", "poorly"};
  std::vector<std::string> nouns;

  Slots() {
    const std::vector<std::string> stems = {
        "dinner", "school", "market", "garden", "branch", "bridge", "window", "basket",
        "candle", "barrel", "butter", "camera", "carpet", "cellar", "collar", "corner",
        "cotton", "dollar", "engine", "fabric", "finger", "flower", "forest", "hammer",
        "harbor", "jacket", "kettle", "ladder", "lantern", "lumber", "meadow", "mirror",
        "monkey", "muffin", "needle", "orange", "palace", "pencil", "pillow", "pocket",
        "rabbit", "ribbon", "saddle", "shovel", "silver", "spider", "stable", "street",
        "temple", "ticket", "tunnel", "turtle", "valley", "velvet", "wagon",  "walnut",
        "willow", "winter", "yellow", "zipper"};
    nouns = stems;
  }

  // The corrected verb form; the erroneous form is the bare stem.
  std::string verb_target(std::size_t c) const { return verbs[c] + "s"; }
  std::string verb_source(std::size_t c) const { return verbs[c]; }
  // The erroneous particle form is an inflated spelling, still a frequent
  // token of the synthetic language via the half-corrected patterns.
  std::string particle_target(std::size_t c) const { return particles[c]; }
  std::string particle_source(std::size_t c) const { return particles[c] + "e"; }
  std::string noun_typo(const std::string& noun) const { return "q" + noun; }
};

inline std::string make_sentence(const std::string& subj, const std::string& adv,
                                 const std::string& verb, const std::string& prt,
                                 const std::string& noun) {
  std::string s = "the " + subj + " ";
  if (!adv.empty()) s += adv + " ";
  s += "then " + verb + " it " + prt + " before " + noun + " .";
  return s;
}

struct ToyCorpus {
  std::string pairs_path;
  std::string labels_path;
  std::string lm_path;
  std::size_t n_pairs = 0;
};

// Fluent corpus: target form and both half-corrected forms for every
// coupling, the half forms twice as often, the full error never; primary
// adverbs three times as common as their alternates.
inline void write_lm_corpus(const std::string& path, const Slots& slots, std::size_t n,
                            editimpact::Rng& rng) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string subj = slots.subjects[rng.next_below(slots.subjects.size())];
    std::string adv;
    if (rng.next_double() < 0.5) {
      const std::size_t a = rng.next_below(slots.adv_primary.size());
      adv = rng.next_below(4) < 3 ? slots.adv_primary[a] : slots.adv_alt[a];
    }
    const std::size_t c = rng.next_below(slots.verbs.size());
    const std::string noun = slots.nouns[rng.next_below(slots.nouns.size())];
    std::string verb = slots.verb_target(c);
    std::string prt = slots.particle_target(c);
    const std::uint64_t form = rng.next_below(5);
    if (form < 2) {
      verb = slots.verb_source(c);  // half-corrected: particle fixed only
    } else if (form < 4) {
      prt = slots.particle_source(c);  // half-corrected: verb fixed only
    }
    out << make_sentence(subj, adv, verb, prt, noun) << "\n";
  }
}

inline ToyCorpus generate(const std::string& dir, std::size_t n_pairs, std::uint64_t seed) {
  Slots slots;
  editimpact::Rng rng(seed);
  ToyCorpus corpus;
  corpus.pairs_path = dir + "/pairs.jsonl";
  corpus.labels_path = dir + "/labels.jsonl";
  corpus.lm_path = dir + "/lm.txt";
  corpus.n_pairs = n_pairs;

  write_lm_corpus(corpus.lm_path, slots, 2400, rng);

  std::ofstream pairs(corpus.pairs_path);
  std::vector<editimpact::LabeledInstance> labels;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::string subj = slots.subjects[rng.next_below(slots.subjects.size())];
    const bool has_adv = rng.next_double() < 0.5;
    const std::size_t a = rng.next_below(slots.adv_primary.size());
    const std::size_t c = rng.next_below(slots.verbs.size());
    const std::string noun = slots.nouns[rng.next_below(slots.nouns.size())];

    const std::string src = make_sentence(
        subj, has_adv ? slots.adv_alt[a] : std::string(), slots.verb_source(c),
        slots.particle_source(c), slots.noun_typo(noun));
    const std::string tgt = make_sentence(subj, has_adv ? slots.adv_primary[a] : std::string(),
                                          slots.verb_target(c), slots.particle_target(c), noun);
    const std::string id = "toy-" + std::to_string(i);
    pairs << R"({"id":")" << id << R"(","source":")" << src << R"(","target":")" << tgt
          << R"(","lang":"en"})" << "\n";

    editimpact::LabeledInstance inst;
    inst.id = id;
    using editimpact::EditLabel;
    if (has_adv) inst.labels.push_back(EditLabel::Reasonable);  // adverb swap
    inst.labels.push_back(EditLabel::Corrected);                // verb half
    inst.labels.push_back(EditLabel::Corrected);                // particle half
    inst.labels.push_back(EditLabel::Corrected);                // noun typo
    labels.push_back(std::move(inst));
  }
  pairs.close();
  editimpact::write_labels(corpus.labels_path, labels);
  return corpus;
}

}  // namespace toy
