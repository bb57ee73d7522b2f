#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "editimpact/corpus.hpp"
#include "editimpact/edits.hpp"
#include "editimpact/merge.hpp"

namespace editimpact {

// Deterministic sentence -> disfluency contract; higher means LESS fluent.
// Perplexity is the canonical instance; similarity-style scorers are wrapped
// in NegatedScorer.
class FluencyScorer {
 public:
  virtual ~FluencyScorer() = default;
  virtual double disfluency(const Sentence& s) const = 0;
};

// Add-k smoothed n-gram model with an unknown-token class and boundary
// padding. disfluency() is perplexity over all scored positions including
// the end-of-sentence position.
class NGramLM : public FluencyScorer {
 public:
  // Untrained model over an explicit vocabulary: every in-vocabulary token
  // scores uniformly at 1/V.
  NGramLM(std::vector<std::string> vocabulary, std::size_t order, double add_k);

  static NGramLM train(const std::vector<Sentence>& corpus, std::size_t order = 3,
                       double add_k = 1.0);

  double disfluency(const Sentence& s) const override;

  // Conditional probability of one vocabulary token given a context of
  // order-1 tokens; sums to 1 over the vocabulary for any context.
  double probability(const std::vector<std::string>& context, const std::string& token) const;

  std::size_t vocabulary_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";

 private:
  std::size_t order_;
  double add_k_;
  std::vector<std::string> vocab_;  // includes <unk> and </s>, never <s>
  std::map<std::string, bool> in_vocab_;
  std::map<std::string, std::map<std::string, std::size_t>> counts_;  // context -> token -> n
  std::map<std::string, std::size_t> context_totals_;

  std::string map_token(const std::string& token) const;
  static std::string context_key(const std::vector<std::string>& context);
  void observe(const std::vector<std::string>& tokens);
};

// Explicit sentence -> value table keyed by the joined token sequence; a
// first-class scorer for tests and worked examples.
class StubScorer : public FluencyScorer {
 public:
  explicit StubScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
  static StubScorer from_file(const std::string& path);
  double disfluency(const Sentence& s) const override;

 private:
  std::map<std::string, double> table_;
};

// Adapter for higher-is-better similarity scorers.
class NegatedScorer : public FluencyScorer {
 public:
  explicit NegatedScorer(std::shared_ptr<FluencyScorer> inner) : inner_(std::move(inner)) {}
  double disfluency(const Sentence& s) const override { return -inner_->disfluency(s); }

 private:
  std::shared_ptr<FluencyScorer> inner_;
};

struct ScoredGroup {
  EditGroup group;
  double delta = 0.0;
};

struct RankedOutput {
  std::vector<ScoredGroup> ordered_groups;
  // Per-edit rank position (0-based); members of a merged group share one
  // position.
  std::vector<std::size_t> edit_rank;
};

// Marginal fluency gain of a group against the full set:
// disfluency(apply(set \ g)) - disfluency(apply(set)).
double delta_leave_one_out(const FluencyScorer& scorer, const Sentence& source,
                           const EditSet& set, const EditGroup& g);

// Forward greedy from the source: at each step the remaining group with the
// largest disfluency drop is applied (ties: earliest source position, then
// fewest members, then first member index).
RankedOutput rank_ours(const FluencyScorer& scorer, const Sentence& source, const EditSet& set,
                       const std::vector<EditGroup>& groups);

// Each atomic edit scored once by leave-one-out against the full set, sorted
// by descending delta (ties by source position).
RankedOutput rank_vanilla(const FluencyScorer& scorer, const Sentence& source,
                          const EditSet& set);

// Forward greedy over singleton groups.
RankedOutput rank_greedy(const FluencyScorer& scorer, const Sentence& source, const EditSet& set);

// Uniform random permutation of singleton groups.
RankedOutput rank_random(const EditSet& set, std::uint64_t seed);

// Disfluency after each successive group application; index 0 is the source.
std::vector<double> fluency_curve(const FluencyScorer& scorer, const Sentence& source,
                                  const EditSet& set, const RankedOutput& ranked);

struct RankedPair {
  std::string id;
  std::string ranker;
  RankedOutput output;
  std::vector<double> curve;
};

void write_ranked(const std::string& path, const std::vector<RankedPair>& ranked);
std::vector<RankedPair> load_ranked(const std::string& path);

}  // namespace editimpact
