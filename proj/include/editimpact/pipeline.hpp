#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "editimpact/assoc.hpp"
#include "editimpact/corpus.hpp"
#include "editimpact/eval.hpp"
#include "editimpact/merge.hpp"
#include "editimpact/mining.hpp"
#include "editimpact/providers.hpp"
#include "editimpact/rank.hpp"

namespace editimpact {

// End-to-end run configuration. The JSON config mirrors this structure with
// per-language merge sections; CLI flags override file values.
struct PipelineConfig {
  std::string pairs_path;
  std::string parses_path;
  std::string embeddings_path;
  std::string model_path;  // reused when present, trained otherwise
  std::string labels_path;
  std::string lm_text_path;
  std::string stub_scores_path;
  std::string output_dir = "out";

  Language language = Language::En;
  std::string scorer = "ngram";    // ngram | stub | remote
  std::string provider = "hash";   // hash | file | remote
  std::size_t hash_dim = 64;
  std::size_t ngram_order = 3;
  double ngram_add_k = 1.0;
  std::vector<std::string> rankers = {"ours", "vanilla", "greedy", "random", "displacy"};
  std::size_t min_edits = 3;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  MiningConfig mining;
  TrainConfig train;
  std::map<Language, MergeConfig> merge;  // per-language thresholds
  RemoteConfig remote;

  PipelineConfig();
  MergeConfig merge_for(Language lang) const;
};

PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineResult {
  CorpusStats stats;
  EvalReport report;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;  // files written under output_dir
};

// extract -> mine -> train-assoc -> merge -> rank -> eval, writing each
// stage's artifact under output_dir. Deterministic for fixed seed with the
// offline scorer/provider choices.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Factories shared by the CLI subcommands.
std::shared_ptr<EmbeddingProvider> make_provider(const PipelineConfig& cfg);
std::shared_ptr<FluencyScorer> make_scorer(const PipelineConfig& cfg, const Corpus& corpus);

std::vector<ExtractedPair> extract_corpus(const Corpus& corpus);

// Ranks one instance with the named ranker ("ours" requires groups).
RankedPair rank_instance(const std::string& ranker, const FluencyScorer& scorer,
                         const SentencePair& pair, const EditSet& set,
                         const std::vector<EditGroup>& groups, std::uint64_t seed);

void write_stats(const std::string& path, const CorpusStats& stats);

}  // namespace editimpact
