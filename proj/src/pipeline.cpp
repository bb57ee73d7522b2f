#include "editimpact/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"
#include "editimpact/rng.hpp"

namespace editimpact {

PipelineConfig::PipelineConfig() {
  for (Language lang : {Language::En, Language::Zh, Language::De, Language::Es, Language::Other})
    merge[lang] = MergeConfig::for_language(lang);
}

MergeConfig PipelineConfig::merge_for(Language lang) const {
  auto it = merge.find(lang);
  if (it != merge.end()) return it->second;
  return MergeConfig::for_language(lang);
}

namespace {

void apply_mining_json(const nlohmann::json& obj, MiningConfig& config) {
  if (obj.contains("min_item_freq")) config.min_item_freq = obj["min_item_freq"].get<std::size_t>();
  if (obj.contains("min_cooccurrence"))
    config.min_cooccurrence = obj["min_cooccurrence"].get<std::size_t>();
  if (obj.contains("min_confidence")) config.min_confidence = obj["min_confidence"].get<double>();
  if (obj.contains("min_lift")) config.min_lift = obj["min_lift"].get<double>();
  if (obj.contains("min_pair_jaccard"))
    config.min_pair_jaccard = obj["min_pair_jaccard"].get<double>();
  if (obj.contains("word_jaccard_filter"))
    config.word_jaccard_filter = obj["word_jaccard_filter"].get<double>();
}

void apply_train_json(const nlohmann::json& obj, TrainConfig& config) {
  if (obj.contains("lr")) config.lr = obj["lr"].get<double>();
  if (obj.contains("weight_decay")) config.weight_decay = obj["weight_decay"].get<double>();
  if (obj.contains("batch_size")) config.batch_size = obj["batch_size"].get<std::size_t>();
  if (obj.contains("epochs")) config.epochs = obj["epochs"].get<std::size_t>();
  if (obj.contains("dropout")) config.dropout = obj["dropout"].get<double>();
  if (obj.contains("neg_ratio")) config.neg_ratio = obj["neg_ratio"].get<std::size_t>();
  if (obj.contains("mrl_dim")) config.mrl_dim = obj["mrl_dim"].get<std::size_t>();
  if (obj.contains("val_fraction")) config.val_fraction = obj["val_fraction"].get<double>();
}

void apply_merge_json(const nlohmann::json& obj, MergeConfig& config) {
  if (obj.contains("tau")) config.tau = obj["tau"].get<double>();
  if (obj.contains("delta_seq")) config.delta_seq = obj["delta_seq"].get<std::size_t>();
  if (obj.contains("delta_dep")) config.delta_dep = obj["delta_dep"].get<std::size_t>();
}

void apply_remote_json(const nlohmann::json& obj, RemoteConfig& config) {
  if (obj.contains("base_url")) config.base_url = obj["base_url"].get<std::string>();
  if (obj.contains("api_key_env")) config.api_key_env = obj["api_key_env"].get<std::string>();
  if (obj.contains("model")) config.model = obj["model"].get<std::string>();
  if (obj.contains("timeout_s")) config.timeout_s = obj["timeout_s"].get<double>();
  if (obj.contains("max_retries")) config.max_retries = obj["max_retries"].get<std::size_t>();
  if (obj.contains("max_in_flight")) config.max_in_flight = obj["max_in_flight"].get<std::size_t>();
  if (obj.contains("cache_dir")) config.cache_dir = obj["cache_dir"].get<std::string>();
  if (obj.contains("embeddings_path"))
    config.embeddings_path = obj["embeddings_path"].get<std::string>();
  if (obj.contains("completions_path"))
    config.completions_path = obj["completions_path"].get<std::string>();
  if (obj.contains("chat_path")) config.chat_path = obj["chat_path"].get<std::string>();
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config file " + path + ": malformed JSON: " + e.what());
  }
  PipelineConfig cfg;
  if (obj.contains("language")) cfg.language = parse_language(obj["language"].get<std::string>());
  if (obj.contains("seed")) cfg.seed = obj["seed"].get<std::uint64_t>();
  if (obj.contains("scorer")) cfg.scorer = obj["scorer"].get<std::string>();
  if (obj.contains("provider")) cfg.provider = obj["provider"].get<std::string>();
  if (obj.contains("hash_dim")) cfg.hash_dim = obj["hash_dim"].get<std::size_t>();
  if (obj.contains("min_edits")) cfg.min_edits = obj["min_edits"].get<std::size_t>();
  if (obj.contains("jobs")) cfg.jobs = obj["jobs"].get<std::size_t>();
  if (obj.contains("rankers")) cfg.rankers = obj["rankers"].get<std::vector<std::string>>();
  if (obj.contains("ngram")) {
    if (obj["ngram"].contains("order")) cfg.ngram_order = obj["ngram"]["order"].get<std::size_t>();
    if (obj["ngram"].contains("add_k")) cfg.ngram_add_k = obj["ngram"]["add_k"].get<double>();
  }
  if (obj.contains("paths")) {
    const auto& paths = obj["paths"];
    auto get = [&paths](const char* key) {
      return paths.contains(key) ? paths[key].get<std::string>() : std::string();
    };
    cfg.pairs_path = get("pairs");
    cfg.parses_path = get("parses");
    cfg.embeddings_path = get("embeddings");
    cfg.model_path = get("model");
    cfg.labels_path = get("labels");
    cfg.lm_text_path = get("lm_text");
    cfg.stub_scores_path = get("stub_scores");
    if (paths.contains("output_dir")) cfg.output_dir = paths["output_dir"].get<std::string>();
  }
  cfg.mining = MiningConfig::for_language(cfg.language);
  if (obj.contains("mining")) apply_mining_json(obj["mining"], cfg.mining);
  if (obj.contains("train")) apply_train_json(obj["train"], cfg.train);
  if (obj.contains("merge")) {
    for (const auto& [tag, section] : obj["merge"].items()) {
      const Language lang = parse_language(tag);
      MergeConfig mc = MergeConfig::for_language(lang);
      apply_merge_json(section, mc);
      cfg.merge[lang] = mc;
    }
  }
  if (obj.contains("remote")) apply_remote_json(obj["remote"], cfg.remote);
  return cfg;
}

std::shared_ptr<EmbeddingProvider> make_provider(const PipelineConfig& cfg) {
  if (cfg.provider == "hash")
    return std::make_shared<HashProvider>(cfg.hash_dim, substream(cfg.seed, "hash-provider"));
  if (cfg.provider == "file") {
    if (cfg.embeddings_path.empty())
      throw DataError("file provider requires paths.embeddings");
    return std::make_shared<FileProvider>(cfg.embeddings_path, nullptr);
  }
  if (cfg.provider == "remote") {
    auto client = std::make_shared<RemoteClient>(cfg.remote);
    return std::make_shared<RemoteEmbeddingProvider>(client);
  }
  throw DataError("unknown provider \"" + cfg.provider + "\"");
}

std::shared_ptr<FluencyScorer> make_scorer(const PipelineConfig& cfg, const Corpus& corpus) {
  if (cfg.scorer == "stub") {
    if (cfg.stub_scores_path.empty()) throw DataError("stub scorer requires paths.stub_scores");
    return std::make_shared<StubScorer>(StubScorer::from_file(cfg.stub_scores_path));
  }
  if (cfg.scorer == "remote") {
    auto client = std::make_shared<RemoteClient>(cfg.remote);
    return std::make_shared<RemotePerplexityScorer>(client);
  }
  if (cfg.scorer != "ngram") throw DataError("unknown scorer \"" + cfg.scorer + "\"");

  std::vector<Sentence> lm_corpus;
  if (!cfg.lm_text_path.empty()) {
    std::ifstream in(cfg.lm_text_path);
    if (!in) throw DataError("cannot open LM text file: " + cfg.lm_text_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      lm_corpus.push_back(tokenize(line, cfg.language));
    }
  } else {
    for (const auto& pair : corpus) lm_corpus.push_back(pair.target);
  }
  if (lm_corpus.empty()) throw DataError("ngram scorer: no training sentences");
  return std::make_shared<NGramLM>(NGramLM::train(lm_corpus, cfg.ngram_order, cfg.ngram_add_k));
}

std::vector<ExtractedPair> extract_corpus(const Corpus& corpus) {
  std::vector<ExtractedPair> extracted;
  extracted.reserve(corpus.size());
  for (const auto& pair : corpus)
    extracted.push_back({pair.id, extract_edits(pair.source, pair.target)});
  return extracted;
}

RankedPair rank_instance(const std::string& ranker, const FluencyScorer& scorer,
                         const SentencePair& pair, const EditSet& set,
                         const std::vector<EditGroup>& groups, std::uint64_t seed) {
  RankedPair out;
  out.id = pair.id;
  out.ranker = ranker;
  if (ranker == "ours" || ranker == "displacy") {
    out.output = rank_ours(scorer, pair.source, set, groups);
  } else if (ranker == "vanilla") {
    out.output = rank_vanilla(scorer, pair.source, set);
  } else if (ranker == "greedy") {
    out.output = rank_greedy(scorer, pair.source, set);
  } else if (ranker == "random") {
    out.output = rank_random(set, substream(seed, "random-rank:" + pair.id));
  } else {
    throw DataError("unknown ranker \"" + ranker + "\"");
  }
  out.curve = fluency_curve(scorer, pair.source, set, out.output);
  return out;
}

void write_stats(const std::string& path, const CorpusStats& stats) {
  nlohmann::json obj;
  obj["sentence_count"] = stats.sentence_count;
  obj["avg_len"] = stats.avg_len;
  obj["avg_edits"] = stats.avg_edits;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write stats file: " + path);
  out << obj.dump(2) << "\n";
}

namespace {

// Runs fn(i) for i in [0, n) across `jobs` threads; results land at their
// index so output order never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map_ordered(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<T> results(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) results[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.pairs_path.empty()) throw DataError("pipeline: paths.pairs is required");
  fs::create_directories(cfg.output_dir);
  auto artifact = [&](const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
  };

  PipelineResult result;

  LoadResult loaded = load_pairs(cfg.pairs_path);
  result.warnings = loaded.warnings;

  ParseMap parses;
  if (!cfg.parses_path.empty()) parses = load_conllu(cfg.parses_path);

  // Extract once, filter pairs and edits together.
  std::vector<ExtractedPair> all_edits = extract_corpus(loaded.pairs);
  Corpus corpus;
  std::vector<ExtractedPair> edits;
  for (std::size_t i = 0; i < loaded.pairs.size(); ++i) {
    if (all_edits[i].edits.size() >= cfg.min_edits) {
      corpus.push_back(loaded.pairs[i]);
      edits.push_back(all_edits[i]);
    }
  }
  if (corpus.empty()) throw DataError("pipeline: no pairs with at least " +
                                      std::to_string(cfg.min_edits) + " edits");
  write_edits(artifact("edits.jsonl"), edits);
  result.artifacts.push_back("edits.jsonl");

  std::map<std::string, std::size_t> edit_count;
  for (const auto& e : edits) edit_count[e.id] = e.edits.size();
  result.stats = corpus_stats(
      corpus, [&](const SentencePair& p) { return edit_count.at(p.id); });
  write_stats(artifact("stats.json"), result.stats);
  result.artifacts.push_back("stats.json");

  std::vector<Transaction> transactions;
  transactions.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Transaction t;
    for (const auto& e : edits[i].edits.edits) t.insert(item_key(e, corpus[i].language));
    transactions.push_back(std::move(t));
  }
  const MinedAssociations mined = mine_pairs(transactions, cfg.mining);
  write_mined(artifact("mined.jsonl"), mined);
  result.artifacts.push_back("mined.jsonl");

  auto provider = make_provider(cfg);

  AssociationClassifier model;
  if (!cfg.model_path.empty() && fs::exists(cfg.model_path)) {
    model = AssociationClassifier::load(cfg.model_path);
  } else {
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = substream(cfg.seed, "train");
    const auto labeled = build_training_pairs(mined, train_cfg.neg_ratio,
                                              substream(cfg.seed, "negatives"));
    TrainLog log;
    model = train_classifier(labeled, *provider, train_cfg, &log);
    write_train_log(artifact("train_log.json"), log);
    result.artifacts.push_back("train_log.json");
  }
  model.save(artifact("model.json"));
  result.artifacts.push_back("model.json");

  const MergeConfig merge_cfg = cfg.merge_for(cfg.language);
  std::vector<MergedPair> merged(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const DependencyTree* tree = nullptr;
    auto it = parses.find(corpus[i].id);
    if (it != parses.end()) tree = &it->second;
    EditGraph graph =
        build_graph(edits[i].edits, corpus[i].language, model, *provider, merge_cfg, tree);
    merged[i].id = corpus[i].id;
    merged[i].groups = connected_components(graph);
    merged[i].warnings = graph.warnings;
  }
  write_merged(artifact("merged.jsonl"), merged);
  result.artifacts.push_back("merged.jsonl");

  auto scorer = make_scorer(cfg, corpus);

  std::vector<RankedPair> ranked;
  for (const auto& ranker : cfg.rankers) {
    auto one = [&](std::size_t i) {
      std::vector<EditGroup> groups;
      if (ranker == "ours") {
        groups = merged[i].groups;
      } else if (ranker == "displacy") {
        auto it = parses.find(corpus[i].id);
        if (it != parses.end())
          groups = displacy_merge(edits[i].edits, it->second, kDefaultDisplacyLabels);
        else
          groups = singleton_groups(edits[i].edits.size());
      }
      return rank_instance(ranker, *scorer, corpus[i], edits[i].edits, groups, cfg.seed);
    };
    auto rows = parallel_map_ordered<RankedPair>(corpus.size(), cfg.jobs, one);
    ranked.insert(ranked.end(), rows.begin(), rows.end());
  }
  write_ranked(artifact("ranked.jsonl"), ranked);
  result.artifacts.push_back("ranked.jsonl");

  if (!cfg.labels_path.empty()) {
    const auto labels = load_labels(cfg.labels_path);
    result.report = evaluate(ranked, labels);
    write_report(artifact("report.json"), result.report);
    result.artifacts.push_back("report.json");
  }
  return result;
}

}  // namespace editimpact
