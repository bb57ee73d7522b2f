#include "editimpact/providers.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"
#include "editimpact/rng.hpp"

namespace editimpact {

std::string embeddings_payload(const std::string& model, const std::vector<std::string>& texts) {
  nlohmann::json body;
  body["input"] = texts;
  body["model"] = model;
  return body.dump();
}

std::string completions_payload(const std::string& model, const std::string& prompt) {
  nlohmann::json body;
  body["echo"] = true;
  body["logprobs"] = 0;
  body["max_tokens"] = 0;
  body["model"] = model;
  body["prompt"] = prompt;
  body["temperature"] = 0;
  return body.dump();
}

std::string chat_payload(const std::string& model, const std::string& prompt) {
  nlohmann::json body;
  body["messages"] = nlohmann::json::array({{{"content", prompt}, {"role", "user"}}});
  body["model"] = model;
  body["temperature"] = 0;
  return body.dump();
}

namespace {

std::string numbered_list(const std::vector<std::string>& sentences) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    os << (i + 1) << ". " << sentences[i] << "\n";
  return os.str();
}

std::string output_contract(std::size_t n) {
  return "Please output exactly " + std::to_string(n) +
         " lines. Each line must contain ONLY the word 'corrected' or 'reasonable'. "
         "Do NOT output numbering, explanations, or thinking processes.";
}

}  // namespace

std::string judge_prompt(Language lang, const std::vector<std::string>& sentences) {
  if (sentences.empty()) throw DataError("judge_prompt: no sentences");
  std::string header, criteria;
  switch (lang) {
    case Language::En:
      header =
          "You are a helpful assistant assisting in evaluating English sentences. Determine if "
          "the following sentences are acceptable in general English contexts.";
      criteria =
          "Criteria: reasonable (acceptable); corrected (clear errors/broken structure).";
      break;
    case Language::Es:
      header =
          "Actúa como un asistente útil para evaluar oraciones en español. Tu "
          "tarea es determinar si las siguientes oraciones son gramaticalmente aceptables.";
      criteria =
          "Criterios: reasonable (aceptable y comprensible); corrected (errores claros o faltas "
          "de ortografía).";
      break;
    case Language::De:
      header =
          "Du bist ein objektiver Korrektor für deutsche Texte. Deine Aufgabe ist es zu "
          "entscheiden, ob die folgenden Sätze grammatikalisch korrekt sind.";
      criteria =
          "Kriterien: reasonable (grammatikalisch korrekt, Kasus/Verbformen stimmen); corrected "
          "(enthält Grammatikfehler).";
      break;
    case Language::Zh:
      header =
          "你是一个乐于助人的助手，负责"
          "评估中文句子。请判断下列句子"
          "在一般中文语境中是否可以接受"
          "。";
      criteria =
          "标准：reasonable（可接受）；corrected（存"
          "在明显错误或结构不通顺）。";
      break;
    default:
      throw DataError("judge_prompt: no template for language \"" + language_tag(lang) + "\"");
  }
  std::ostringstream os;
  os << header << "\n\n" << numbered_list(sentences) << "\n" << criteria << "\n"
     << output_contract(sentences.size());
  return os.str();
}

RemoteClient::RemoteClient(RemoteConfig cfg)
    : cfg_(std::move(cfg)), free_slots_(cfg_.max_in_flight) {
  if (cfg_.timeout_s <= 0.0) throw DataError("RemoteConfig: timeout must be positive");
  if (cfg_.max_in_flight < 1) throw DataError("RemoteConfig: max_in_flight must be >= 1");
  if (!cfg_.cache_dir.empty()) std::filesystem::create_directories(cfg_.cache_dir);
}

std::string RemoteClient::cache_file(const std::string& path, const std::string& payload) const {
  const std::string key = path + "\n" + payload;
  // Two independent 64-bit digests; collisions at cache scale are negligible.
  const std::uint64_t h1 = fnv1a64(key);
  const std::uint64_t h2 = fnv1a64(key + "#2");
  std::ostringstream os;
  os << std::hex << h1 << h2 << ".json";
  return (std::filesystem::path(cfg_.cache_dir) / os.str()).string();
}

namespace {

bool transient_status(int status) {
  return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

}  // namespace

std::string RemoteClient::post_json(const std::string& path, const std::string& payload,
                                    bool use_cache) {
  if (use_cache && !cfg_.cache_dir.empty()) {
    std::ifstream in(cache_file(path, payload));
    if (in) {
      std::ostringstream body;
      body << in.rdbuf();
      return body.str();
    }
  }

  {
    std::unique_lock<std::mutex> lock(slot_mutex_);
    slot_cv_.wait(lock, [this] { return free_slots_ > 0; });
    --free_slots_;
  }
  struct SlotGuard {
    RemoteClient* self;
    ~SlotGuard() {
      std::lock_guard<std::mutex> lock(self->slot_mutex_);
      ++self->free_slots_;
      self->slot_cv_.notify_one();
    }
  } guard{this};

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && key[0] != '\0')
    headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(cfg_.retry_base_ms << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(cfg_.base_url);
    const auto timeout = std::chrono::duration<double>(cfg_.timeout_s);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    ++network_calls_;
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      if (use_cache && !cfg_.cache_dir.empty()) {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        std::ofstream out(cache_file(path, payload));
        out << res->body;
      }
      return res->body;
    }
    if (transient_status(res->status)) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    throw BackendError("POST " + path + " failed with status " + std::to_string(res->status));
  }
  throw BackendError("POST " + path + " failed after " + std::to_string(cfg_.max_retries + 1) +
                     " attempts (" + last_error + ")");
}

std::vector<Vector> RemoteClient::embed_batch(const std::vector<std::string>& texts) {
  if (texts.empty()) throw DataError("embed_batch: empty batch");
  for (const auto& t : texts)
    if (t.empty()) throw DataError("embed_batch: empty text");

  // Cache lookup per text; only misses go to the backend, as one request.
  std::vector<Vector> result(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cfg_.cache_dir.empty()) {
      missing.push_back(i);
      continue;
    }
    const std::string file =
        cache_file(cfg_.embeddings_path, embeddings_payload(cfg_.model, {texts[i]}));
    std::ifstream in(file);
    if (!in) {
      missing.push_back(i);
      continue;
    }
    nlohmann::json cached;
    try {
      in >> cached;
      result[i] = cached.get<Vector>();
    } catch (const nlohmann::json::exception&) {
      missing.push_back(i);
    }
  }
  if (missing.empty()) return result;

  std::vector<std::string> batch;
  for (std::size_t i : missing) batch.push_back(texts[i]);
  const std::string body =
      post_json(cfg_.embeddings_path, embeddings_payload(cfg_.model, batch), false);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("embeddings: malformed response: ") + e.what());
  }
  if (!parsed.contains("data") || !parsed["data"].is_array() ||
      parsed["data"].size() != batch.size())
    throw BackendError("embeddings: response data size does not match batch");
  std::vector<Vector> vectors(batch.size());
  for (const auto& entry : parsed["data"]) {
    if (!entry.contains("index") || !entry.contains("embedding"))
      throw BackendError("embeddings: response entry missing index or embedding");
    const std::size_t idx = entry["index"].get<std::size_t>();
    if (idx >= batch.size()) throw BackendError("embeddings: response index out of range");
    vectors[idx] = entry["embedding"].get<Vector>();
  }
  for (const auto& v : vectors) {
    if (v.empty() || v.size() != vectors.front().size())
      throw BackendError("embeddings: inconsistent vector lengths in response");
  }
  for (std::size_t k = 0; k < missing.size(); ++k) {
    result[missing[k]] = vectors[k];
    if (!cfg_.cache_dir.empty()) {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      std::ofstream out(
          cache_file(cfg_.embeddings_path, embeddings_payload(cfg_.model, {texts[missing[k]]})));
      out << nlohmann::json(vectors[k]).dump();
    }
  }
  return result;
}

double RemoteClient::perplexity(const std::string& sentence) {
  if (sentence.empty()) throw DataError("perplexity: empty sentence");
  const std::string body =
      post_json(cfg_.completions_path, completions_payload(cfg_.model, sentence), true);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("completions: malformed response: ") + e.what());
  }
  if (!parsed.contains("choices") || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("logprobs") ||
      !parsed["choices"][0]["logprobs"].contains("token_logprobs"))
    throw BackendError(
        "completions: backend returned no token logprobs; prompt-echo logprob support is "
        "required");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& lp : parsed["choices"][0]["logprobs"]["token_logprobs"]) {
    if (lp.is_null()) continue;  // first prompt token has no conditional
    sum += lp.get<double>();
    ++n;
  }
  if (n == 0) throw BackendError("completions: empty token logprob list");
  return std::exp(-sum / static_cast<double>(n));
}

std::vector<EditLabel> RemoteClient::judge(const std::vector<std::string>& sentences,
                                           Language lang) {
  if (sentences.empty()) throw DataError("judge: no sentences");
  const std::string prompt = judge_prompt(lang, sentences);
  const std::string body = post_json(cfg_.chat_path, chat_payload(cfg_.model, prompt), true);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("judge: malformed response: ") + e.what());
  }
  if (!parsed.contains("choices") || parsed["choices"].empty() ||
      !parsed["choices"][0].contains("message") ||
      !parsed["choices"][0]["message"].contains("content"))
    throw BackendError("judge: response has no message content");
  const std::string content = parsed["choices"][0]["message"]["content"].get<std::string>();

  std::vector<EditLabel> labels;
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    std::string word = line.substr(begin, end - begin + 1);
    try {
      labels.push_back(parse_label(word));
    } catch (const DataError&) {
      throw BackendError("judge: unrecognized label line \"" + word + "\"");
    }
  }
  if (labels.size() != sentences.size())
    throw BackendError("judge: expected " + std::to_string(sentences.size()) + " label lines, got " +
                       std::to_string(labels.size()));
  return labels;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::shared_ptr<RemoteClient> client)
    : client_(std::move(client)) {}

std::size_t RemoteEmbeddingProvider::dim() const {
  if (dim_ == 0)
    throw DataError("RemoteEmbeddingProvider: dimension unknown before the first embed call");
  return dim_;
}

Vector RemoteEmbeddingProvider::embed(const std::string& text) {
  if (text.empty()) throw DataError("embed: empty text");
  Vector v = client_->embed_batch({text})[0];
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_)
    throw BackendError("RemoteEmbeddingProvider: backend changed embedding dimension");
  return v;
}

std::string RemoteEmbeddingProvider::id() const {
  return "remote-" + client_->config().model;
}

double RemotePerplexityScorer::disfluency(const Sentence& s) const {
  return client_->perplexity(s.joined());
}

}  // namespace editimpact
