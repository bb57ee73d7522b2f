#include "editimpact/embed.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"
#include "editimpact/rng.hpp"

namespace editimpact {

HashProvider::HashProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw DataError("HashProvider: dimension must be positive");
}

Vector HashProvider::embed(const std::string& text) {
  if (text.empty()) throw DataError("embed: empty text");
  Rng rng(seed_ ^ fnv1a64(text));
  Vector v(dim_);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = 2.0 * rng.next_double() - 1.0;
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return v;
}

std::string HashProvider::id() const {
  return "hash-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
}

FileProvider::FileProvider(const std::string& path, std::shared_ptr<EmbeddingProvider> fallback)
    : fallback_(std::move(fallback)) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    entries_[obj.at("text").get<std::string>()] = obj.at("vector").get<Vector>();
  }
  if (!entries_.empty()) dim_ = entries_.begin()->second.size();
  if (fallback_ && dim_ != 0 && fallback_->dim() != dim_)
    throw DataError("FileProvider: fallback dimension mismatch");
  if (fallback_ && dim_ == 0) dim_ = fallback_->dim();
  for (const auto& [text, vec] : entries_) {
    if (vec.size() != dim_)
      throw DataError("FileProvider: inconsistent vector length for \"" + text + "\"");
  }
}

FileProvider::FileProvider(std::map<std::string, Vector> entries,
                           std::shared_ptr<EmbeddingProvider> fallback)
    : entries_(std::move(entries)), fallback_(std::move(fallback)) {
  if (!entries_.empty()) dim_ = entries_.begin()->second.size();
  if (fallback_ && dim_ == 0) dim_ = fallback_->dim();
  for (const auto& [text, vec] : entries_) {
    if (vec.size() != dim_)
      throw DataError("FileProvider: inconsistent vector length for \"" + text + "\"");
  }
}

Vector FileProvider::embed(const std::string& text) {
  if (text.empty()) throw DataError("embed: empty text");
  auto it = entries_.find(text);
  if (it != entries_.end()) return it->second;
  ++misses_;
  if (fallback_) return fallback_->embed(text);
  throw DataError("FileProvider: no stored vector for \"" + text + "\"");
}

std::string FileProvider::id() const {
  return "file-d" + std::to_string(dim_) + "-n" + std::to_string(entries_.size());
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner, std::string cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
  if (!cache_dir_.empty()) {
    std::filesystem::create_directories(cache_dir_);
    std::ifstream in(cache_path());
    std::string line;
    while (in && std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        nlohmann::json obj = nlohmann::json::parse(line);
        memo_[obj.at("text").get<std::string>()] = obj.at("vector").get<Vector>();
      } catch (const nlohmann::json::exception&) {
        // A torn final line from an interrupted run is ignored; the entry
        // will simply be recomputed.
      }
    }
  }
}

std::string CachingProvider::cache_path() const {
  return (std::filesystem::path(cache_dir_) / (inner_->id() + ".jsonl")).string();
}

Vector CachingProvider::embed(const std::string& text) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = memo_.find(text);
  if (it != memo_.end()) return it->second;
  ++backend_calls_;
  Vector v = inner_->embed(text);
  memo_[text] = v;
  if (!cache_dir_.empty()) {
    std::ofstream out(cache_path(), std::ios::app);
    nlohmann::json obj;
    obj["text"] = text;
    obj["vector"] = v;
    out << obj.dump() << "\n";
  }
  return v;
}

Vector truncate_mrl(const Vector& v, std::size_t d) {
  if (d < 1 || d > v.size())
    throw DataError("truncate_mrl: target dimension " + std::to_string(d) +
                    " out of range for vector of length " + std::to_string(v.size()));
  Vector out(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
  double norm_sq = 0.0;
  for (double x : out) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& x : out) x /= norm;
  return out;
}

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

void write_embedding_file(const std::string& path, const std::map<std::string, Vector>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path);
  for (const auto& [text, vec] : entries) {
    nlohmann::json obj;
    obj["text"] = text;
    obj["vector"] = vec;
    out << obj.dump() << "\n";
  }
}

}  // namespace editimpact
