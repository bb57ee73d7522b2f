#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "editimpact/corpus.hpp"
#include "editimpact/embed.hpp"
#include "editimpact/eval.hpp"
#include "editimpact/rank.hpp"

namespace editimpact {

struct RemoteConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string api_key_env = "EDITIMPACT_API_KEY";
  std::string model = "default";
  double timeout_s = 30.0;
  std::size_t max_retries = 3;
  std::size_t max_in_flight = 4;
  std::string cache_dir;
  std::string embeddings_path = "/v1/embeddings";
  std::string completions_path = "/v1/completions";
  std::string chat_path = "/v1/chat/completions";
  std::size_t retry_base_ms = 250;
};

// Deterministic request bodies (keys are emitted in sorted order), exposed so
// tests can pin the wire format byte for byte.
std::string embeddings_payload(const std::string& model, const std::vector<std::string>& texts);
std::string completions_payload(const std::string& model, const std::string& prompt);
std::string chat_payload(const std::string& model, const std::string& prompt);

// The judge instruction for one batch of hypothesis sentences. Throws
// DataError for languages without a template.
std::string judge_prompt(Language lang, const std::vector<std::string>& sentences);

// HTTP/JSON client against an embeddings/completions-style backend, with a
// response cache keyed by request digest, exponential-backoff retries on
// transient failures, and a bound on concurrent in-flight requests.
class RemoteClient {
 public:
  explicit RemoteClient(RemoteConfig cfg);

  // One vector per text, order preserved. Cached per (model, text).
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts);

  // exp(-mean of echoed prompt token logprobs); >= 1 for true logprobs.
  double perplexity(const std::string& sentence);

  // Labels the per-edit hypothesis sentences of one instance; expects exactly
  // one "corrected"/"reasonable" line per sentence (case-insensitive).
  std::vector<EditLabel> judge(const std::vector<std::string>& sentences, Language lang);

  std::size_t network_calls() const { return network_calls_.load(); }
  const RemoteConfig& config() const { return cfg_; }

 private:
  RemoteConfig cfg_;
  std::atomic<std::size_t> network_calls_{0};
  std::mutex cache_mutex_;

  // In-flight bound.
  std::mutex slot_mutex_;
  std::condition_variable slot_cv_;
  std::size_t free_slots_;

  std::string post_json(const std::string& path, const std::string& payload, bool use_cache);
  std::string cache_file(const std::string& path, const std::string& payload) const;
};

// EmbeddingProvider over a RemoteClient; single-text calls share the client's
// cache and batch endpoint.
class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(std::shared_ptr<RemoteClient> client);
  std::size_t dim() const override;
  Vector embed(const std::string& text) override;
  std::string id() const override;

 private:
  std::shared_ptr<RemoteClient> client_;
  mutable std::size_t dim_ = 0;
};

// FluencyScorer over a RemoteClient's perplexity endpoint.
class RemotePerplexityScorer : public FluencyScorer {
 public:
  explicit RemotePerplexityScorer(std::shared_ptr<RemoteClient> client)
      : client_(std::move(client)) {}
  double disfluency(const Sentence& s) const override;

 private:
  std::shared_ptr<RemoteClient> client_;
};

}  // namespace editimpact
