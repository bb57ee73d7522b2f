// Command-line front end for the edit impact scoring pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"
#include "editimpact/pipeline.hpp"
#include "editimpact/rng.hpp"

namespace ei = editimpact;

namespace {

struct Options {
  std::string pairs, edits, mined, model, parses, groups, ranked, labels, out, config;
  std::string lang;
  std::string provider = "hash";
  std::string scorer = "ngram";
  std::string embeddings, stub_scores, lm_text, train_log, pair_id;
  std::vector<std::string> rankers = {"ours", "vanilla", "greedy", "random"};
  std::size_t min_edits = 0;
  std::size_t hash_dim = 64;
  std::size_t top_n = 30;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool out_set = false;
  bool jobs_set = false;
  ei::MiningConfig mining;
  ei::TrainConfig train;
  ei::MergeConfig merge;
  bool tau_set = false, dseq_set = false, ddep_set = false;
};

ei::Language resolve_language(const Options& opt, const ei::Corpus& corpus) {
  if (!opt.lang.empty()) return ei::parse_language(opt.lang);
  if (!corpus.empty()) return corpus.front().language;
  return ei::Language::En;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_extract(const Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  auto extracted = ei::extract_corpus(loaded.pairs);
  ei::write_edits(opt.out, extracted);
  std::cerr << "wrote " << extracted.size() << " edit sets to " << opt.out << "\n";
  return 0;
}

int cmd_stats(const Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  std::map<std::string, std::size_t> counts;
  for (const auto& pair : loaded.pairs)
    counts[pair.id] = ei::extract_edits(pair.source, pair.target).size();
  auto counter = [&](const ei::SentencePair& p) { return counts.at(p.id); };
  ei::Corpus corpus = opt.min_edits > 0
                          ? ei::filter_min_edits(loaded.pairs, counter, opt.min_edits)
                          : loaded.pairs;
  const ei::CorpusStats stats = ei::corpus_stats(corpus, counter);
  if (opt.out_set) {
    ei::write_stats(opt.out, stats);
  } else {
    nlohmann::json obj{{"sentence_count", stats.sentence_count},
                       {"avg_len", stats.avg_len},
                       {"avg_edits", stats.avg_edits}};
    std::cout << obj.dump(2) << "\n";
  }
  return 0;
}

int cmd_mine(Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  const ei::Language lang = resolve_language(opt, loaded.pairs);
  ei::MiningConfig defaults = ei::MiningConfig::for_language(lang);
  // Flags were initialized from the English defaults; only the frequency
  // threshold is language-sensitive, so pick up the language default unless
  // the user overrode it.
  if (opt.mining.min_item_freq == ei::MiningConfig{}.min_item_freq)
    opt.mining.min_item_freq = defaults.min_item_freq;
  auto transactions = ei::build_transactions(loaded.pairs);
  const ei::MinedAssociations mined = ei::mine_pairs(transactions, opt.mining);
  ei::write_mined(opt.out, mined);
  std::cerr << "mined " << mined.rules.size() << " associations from " << transactions.size()
            << " transactions (" << mined.frequent_items.size() << " frequent items)\n";
  return 0;
}

ei::PipelineConfig provider_config(const Options& opt) {
  ei::PipelineConfig cfg;
  cfg.provider = opt.provider;
  cfg.embeddings_path = opt.embeddings;
  cfg.hash_dim = opt.hash_dim;
  cfg.seed = opt.seed;
  return cfg;
}

int cmd_train_assoc(const Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  const ei::Language lang = resolve_language(opt, loaded.pairs);
  auto transactions = ei::build_transactions(loaded.pairs);
  ei::MiningConfig mining = ei::MiningConfig::for_language(lang);
  ei::MinedAssociations mined = ei::mine_pairs(transactions, mining);
  if (!opt.mined.empty()) {
    // Positives come from the mined file; frequent items and co-occurrence
    // are re-derived from the pairs for negative sampling.
    mined.rules = ei::load_mined(opt.mined);
  }
  ei::TrainConfig train = opt.train;
  train.seed = ei::substream(opt.seed, "train");
  auto provider = ei::make_provider(provider_config(opt));
  const auto labeled =
      ei::build_training_pairs(mined, train.neg_ratio, ei::substream(opt.seed, "negatives"));
  ei::TrainLog log;
  const ei::AssociationClassifier model = ei::train_classifier(labeled, *provider, train, &log);
  model.save(opt.out);
  if (!opt.train_log.empty()) ei::write_train_log(opt.train_log, log);
  std::cerr << "trained on " << labeled.size() << " pairs; best validation loss "
            << log.best_val_loss << " at epoch " << log.best_epoch << "\n";
  return 0;
}

int cmd_merge(const Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  const auto extracted = ei::load_edits(opt.edits);
  std::map<std::string, const ei::EditSet*> edits_by_id;
  for (const auto& e : extracted) edits_by_id[e.id] = &e.edits;
  ei::ParseMap parses;
  if (!opt.parses.empty()) parses = ei::load_conllu(opt.parses);
  const ei::AssociationClassifier model = ei::AssociationClassifier::load(opt.model);
  auto provider = ei::make_provider(provider_config(opt));

  std::vector<ei::MergedPair> merged;
  for (const auto& pair : loaded.pairs) {
    auto it = edits_by_id.find(pair.id);
    if (it == edits_by_id.end())
      throw ei::DataError("merge: no edits for pair \"" + pair.id + "\"");
    ei::MergeConfig config = ei::MergeConfig::for_language(pair.language);
    if (opt.tau_set) config.tau = opt.merge.tau;
    if (opt.dseq_set) config.delta_seq = opt.merge.delta_seq;
    if (opt.ddep_set) config.delta_dep = opt.merge.delta_dep;
    const ei::DependencyTree* tree = nullptr;
    auto pit = parses.find(pair.id);
    if (pit != parses.end()) tree = &pit->second;
    ei::EditGraph graph =
        ei::build_graph(*it->second, pair.language, model, *provider, config, tree);
    ei::MergedPair entry;
    entry.id = pair.id;
    entry.groups = ei::connected_components(graph);
    entry.warnings = graph.warnings;
    merged.push_back(std::move(entry));
  }
  ei::write_merged(opt.out, merged);
  std::cerr << "merged " << merged.size() << " edit sets\n";
  return 0;
}

int cmd_rank(const Options& opt) {
  auto loaded = ei::load_pairs(opt.pairs);
  print_warnings(loaded.warnings);
  const auto extracted = ei::load_edits(opt.edits);
  std::map<std::string, const ei::EditSet*> edits_by_id;
  for (const auto& e : extracted) edits_by_id[e.id] = &e.edits;
  std::map<std::string, std::vector<ei::EditGroup>> groups_by_id;
  if (!opt.groups.empty()) {
    for (auto& m : ei::load_merged(opt.groups)) groups_by_id[m.id] = std::move(m.groups);
  }
  ei::ParseMap parses;
  if (!opt.parses.empty()) parses = ei::load_conllu(opt.parses);

  ei::PipelineConfig scorer_cfg;
  scorer_cfg.scorer = opt.scorer;
  scorer_cfg.stub_scores_path = opt.stub_scores;
  scorer_cfg.lm_text_path = opt.lm_text;
  if (!loaded.pairs.empty()) scorer_cfg.language = loaded.pairs.front().language;
  auto scorer = ei::make_scorer(scorer_cfg, loaded.pairs);

  std::vector<ei::RankedPair> ranked;
  for (const auto& ranker : opt.rankers) {
    for (const auto& pair : loaded.pairs) {
      auto it = edits_by_id.find(pair.id);
      if (it == edits_by_id.end())
        throw ei::DataError("rank: no edits for pair \"" + pair.id + "\"");
      std::vector<ei::EditGroup> groups;
      if (ranker == "ours") {
        auto git = groups_by_id.find(pair.id);
        if (git == groups_by_id.end())
          throw ei::DataError("rank: ranker \"ours\" requires --groups with pair \"" + pair.id +
                              "\"");
        groups = git->second;
      } else if (ranker == "displacy") {
        auto pit = parses.find(pair.id);
        if (pit != parses.end())
          groups = ei::displacy_merge(*it->second, pit->second, ei::kDefaultDisplacyLabels);
        else
          groups = ei::singleton_groups(it->second->size());
      }
      ranked.push_back(ei::rank_instance(ranker, *scorer, pair, *it->second, groups, opt.seed));
    }
  }
  ei::write_ranked(opt.out, ranked);
  std::cerr << "ranked " << loaded.pairs.size() << " pairs with " << opt.rankers.size()
            << " rankers\n";
  return 0;
}

int cmd_eval(const Options& opt) {
  const auto ranked = ei::load_ranked(opt.ranked);
  const auto labels = ei::load_labels(opt.labels);
  const ei::EvalReport report = ei::evaluate(ranked, labels);
  if (opt.out_set) {
    ei::write_report(opt.out, report);
  } else {
    nlohmann::json per_ranker = nlohmann::json::object();
    for (const auto& [ranker, r] : report.per_ranker)
      per_ranker[ranker] = {{"s_bound_mean", r.s_bound_mean},
                            {"s_rank_mean", r.s_rank_mean},
                            {"n_instances", r.n_instances}};
    nlohmann::json obj{{"per_ranker", per_ranker}, {"excluded", report.excluded}};
    std::cout << obj.dump(2) << "\n";
  }
  return 0;
}

int cmd_export_graph(const Options& opt) {
  if (!opt.mined.empty()) {
    const auto rules = ei::load_mined(opt.mined);
    std::ofstream out(opt.out);
    if (!out) throw ei::DataError("cannot write DOT file: " + opt.out);
    out << ei::associations_to_dot(rules, opt.top_n);
    std::cerr << "wrote top-" << std::min(opt.top_n, rules.size()) << " associations to "
              << opt.out << "\n";
    return 0;
  }
  auto loaded = ei::load_pairs(opt.pairs);
  const auto extracted = ei::load_edits(opt.edits);
  const ei::AssociationClassifier model = ei::AssociationClassifier::load(opt.model);
  auto provider = ei::make_provider(provider_config(opt));
  ei::ParseMap parses;
  if (!opt.parses.empty()) parses = ei::load_conllu(opt.parses);
  for (const auto& pair : loaded.pairs) {
    if (!opt.pair_id.empty() && pair.id != opt.pair_id) continue;
    auto it = std::find_if(extracted.begin(), extracted.end(),
                           [&](const ei::ExtractedPair& e) { return e.id == pair.id; });
    if (it == extracted.end()) continue;
    const ei::MergeConfig config = ei::MergeConfig::for_language(pair.language);
    const ei::DependencyTree* tree = nullptr;
    auto pit = parses.find(pair.id);
    if (pit != parses.end()) tree = &pit->second;
    const ei::EditGraph graph =
        ei::build_graph(it->edits, pair.language, model, *provider, config, tree);
    std::ofstream out(opt.out);
    if (!out) throw ei::DataError("cannot write DOT file: " + opt.out);
    out << ei::graph_to_dot(it->edits, graph, pair.id);
    std::cerr << "wrote graph for \"" << pair.id << "\" to " << opt.out << "\n";
    return 0;
  }
  throw ei::DataError("export-graph: pair \"" + opt.pair_id + "\" not found");
}

int cmd_pipeline(const Options& opt) {
  ei::PipelineConfig cfg = ei::load_pipeline_config(opt.config);
  if (opt.seed_set) cfg.seed = opt.seed;
  if (opt.out_set) cfg.output_dir = opt.out;
  if (opt.jobs_set) cfg.jobs = opt.jobs;
  const ei::PipelineResult result = ei::run_pipeline(cfg);
  print_warnings(result.warnings);
  std::cerr << "pipeline complete: " << result.stats.sentence_count << " pairs";
  for (const auto& [ranker, r] : result.report.per_ranker)
    std::cerr << "; " << ranker << " S_bound=" << r.s_bound_mean << " S_rank=" << r.s_rank_mean;
  std::cerr << "\nartifacts in " << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scores and ranks grammatical-error-correction edits by their impact on sentence "
               "fluency"};
  app.require_subcommand(1);
  Options opt;

  auto* extract = app.add_subcommand("extract", "Extract atomic edits from sentence pairs");
  extract->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  extract->add_option("--out", opt.out, "Output edits file")->required();

  auto* stats = app.add_subcommand("stats", "Corpus statistics (sentence count, lengths, edits)");
  stats->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  stats->add_option("--out", opt.out, "Output stats JSON (stdout when omitted)")
      ->each([&opt](const std::string&) { opt.out_set = true; });
  stats->add_option("--min-edits", opt.min_edits, "Keep only pairs with at least N edits");

  auto* mine = app.add_subcommand("mine", "Mine pairwise edit associations");
  mine->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  mine->add_option("--out", opt.out, "Output associations file")->required();
  mine->add_option("--lang", opt.lang, "Language for threshold defaults (en|zh|de|es)");
  mine->add_option("--min-item-freq", opt.mining.min_item_freq, "Minimum item frequency");
  mine->add_option("--min-cooccurrence", opt.mining.min_cooccurrence, "Minimum co-occurrence");
  mine->add_option("--min-confidence", opt.mining.min_confidence, "Confidence threshold");
  mine->add_option("--min-lift", opt.mining.min_lift, "Lift threshold");
  mine->add_option("--min-pair-jaccard", opt.mining.min_pair_jaccard, "Jaccard threshold");
  mine->add_option("--word-jaccard-filter", opt.mining.word_jaccard_filter,
                   "Drop pairs with key-text similarity at or above this value");

  auto* train = app.add_subcommand("train-assoc", "Train the association classifier");
  train->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  train->add_option("--mined", opt.mined, "Mined associations file (positives)");
  train->add_option("--out", opt.out, "Output model file")->required();
  train->add_option("--log", opt.train_log, "Output training log JSON");
  train->add_option("--lang", opt.lang, "Language for mining defaults");
  train->add_option("--provider", opt.provider, "Embedding provider: hash|file|remote");
  train->add_option("--embeddings", opt.embeddings, "Embedding file for the file provider");
  train->add_option("--hash-dim", opt.hash_dim, "Hash provider dimension");
  train->add_option("--seed", opt.seed, "Random seed");
  train->add_option("--lr", opt.train.lr, "Learning rate");
  train->add_option("--epochs", opt.train.epochs, "Training epochs");
  train->add_option("--batch-size", opt.train.batch_size, "Mini-batch size");
  train->add_option("--neg-ratio", opt.train.neg_ratio, "Max negatives per positive");
  train->add_option("--mrl-dim", opt.train.mrl_dim, "Embedding truncation dimension");

  auto* merge = app.add_subcommand("merge", "Merge coupled edits via the association graph");
  merge->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  merge->add_option("--edits", opt.edits, "Extracted edits file")->required();
  merge->add_option("--model", opt.model, "Trained classifier file")->required();
  merge->add_option("--out", opt.out, "Output merge file")->required();
  merge->add_option("--parses", opt.parses, "CoNLL-U parses of the target sentences");
  merge->add_option("--provider", opt.provider, "Embedding provider: hash|file|remote");
  merge->add_option("--embeddings", opt.embeddings, "Embedding file for the file provider");
  merge->add_option("--hash-dim", opt.hash_dim, "Hash provider dimension");
  merge->add_option("--seed", opt.seed, "Random seed (hash provider identity)");
  merge->add_option("--tau", opt.merge.tau, "Association probability threshold")
      ->each([&opt](const std::string&) { opt.tau_set = true; });
  merge->add_option("--delta-seq", opt.merge.delta_seq, "Max sequence distance")
      ->each([&opt](const std::string&) { opt.dseq_set = true; });
  merge->add_option("--delta-dep", opt.merge.delta_dep, "Max dependency hops")
      ->each([&opt](const std::string&) { opt.ddep_set = true; });

  auto* rank = app.add_subcommand("rank", "Rank edit groups by marginal fluency gain");
  rank->add_option("--pairs", opt.pairs, "Pair file (JSON Lines)")->required();
  rank->add_option("--edits", opt.edits, "Extracted edits file")->required();
  rank->add_option("--out", opt.out, "Output ranked file")->required();
  rank->add_option("--groups", opt.groups, "Merge file (required for ranker \"ours\")");
  rank->add_option("--parses", opt.parses, "CoNLL-U parses (for ranker \"displacy\")");
  rank->add_option("--rankers", opt.rankers,
                   "Rankers to run: ours vanilla greedy random displacy");
  rank->add_option("--scorer", opt.scorer, "Fluency scorer: ngram|stub|remote");
  rank->add_option("--stub-scores", opt.stub_scores, "Stub scorer table (JSON Lines)");
  rank->add_option("--lm-text", opt.lm_text, "Plain-text LM training corpus (one per line)");
  rank->add_option("--seed", opt.seed, "Random seed (random ranker)");

  auto* eval = app.add_subcommand("eval", "Score labeled rankings with S_bound and S_rank");
  eval->add_option("--ranked", opt.ranked, "Ranked output file")->required();
  eval->add_option("--labels", opt.labels, "Label file (JSON Lines, EditSet order)")->required();
  eval->add_option("--out", opt.out, "Output report JSON (stdout when omitted)")
      ->each([&opt](const std::string&) { opt.out_set = true; });

  auto* graph = app.add_subcommand("export-graph", "Export association graphs as DOT");
  graph->add_option("--mined", opt.mined, "Mined associations file (corpus-level export)");
  graph->add_option("--top", opt.top_n, "Top-N associations for the corpus-level export");
  graph->add_option("--pairs", opt.pairs, "Pair file (per-sentence export)");
  graph->add_option("--edits", opt.edits, "Extracted edits file (per-sentence export)");
  graph->add_option("--model", opt.model, "Trained classifier file (per-sentence export)");
  graph->add_option("--parses", opt.parses, "CoNLL-U parses (per-sentence export)");
  graph->add_option("--id", opt.pair_id, "Pair id to export (per-sentence export)");
  graph->add_option("--provider", opt.provider, "Embedding provider: hash|file|remote");
  graph->add_option("--embeddings", opt.embeddings, "Embedding file for the file provider");
  graph->add_option("--hash-dim", opt.hash_dim, "Hash provider dimension");
  graph->add_option("--seed", opt.seed, "Random seed (hash provider identity)");
  graph->add_option("--out", opt.out, "Output DOT file")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run extract, mine, train, merge, rank, eval");
  pipeline->add_option("--config", opt.config, "Pipeline config JSON")->required();
  pipeline->add_option("--seed", opt.seed, "Override the config seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  pipeline->add_option("--out", opt.out, "Override the config output directory")
      ->each([&opt](const std::string&) { opt.out_set = true; });
  pipeline->add_option("--jobs", opt.jobs, "Worker threads for per-sentence stages")
      ->each([&opt](const std::string&) { opt.jobs_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(extract)) return cmd_extract(opt);
    if (app.got_subcommand(stats)) return cmd_stats(opt);
    if (app.got_subcommand(mine)) return cmd_mine(opt);
    if (app.got_subcommand(train)) return cmd_train_assoc(opt);
    if (app.got_subcommand(merge)) return cmd_merge(opt);
    if (app.got_subcommand(rank)) return cmd_rank(opt);
    if (app.got_subcommand(eval)) return cmd_eval(opt);
    if (app.got_subcommand(graph)) return cmd_export_graph(opt);
    if (app.got_subcommand(pipeline)) return cmd_pipeline(opt);
  } catch (const ei::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const ei::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
