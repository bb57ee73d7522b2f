#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace editimpact {

using Vector = std::vector<double>;

// Deterministic text -> fixed-dimension vector contract. Equal text yields
// an equal vector within one configured provider.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual Vector embed(const std::string& text) = 0;
  // Stable identifier used to key the on-disk cache.
  virtual std::string id() const = 0;
};

// Seeded pseudo-random unit vector derived from a stable digest of the text.
// Fully offline and reproducible across process restarts.
class HashProvider : public EmbeddingProvider {
 public:
  HashProvider(std::size_t dim, std::uint64_t seed);
  std::size_t dim() const override { return dim_; }
  Vector embed(const std::string& text) override;
  std::string id() const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Lookup over stored vectors (JSON Lines {"text","vector"}); misses either
// throw or fall back to another provider, counting how often that happened.
class FileProvider : public EmbeddingProvider {
 public:
  FileProvider(const std::string& path, std::shared_ptr<EmbeddingProvider> fallback = nullptr);
  explicit FileProvider(std::map<std::string, Vector> entries,
                        std::shared_ptr<EmbeddingProvider> fallback = nullptr);
  std::size_t dim() const override { return dim_; }
  Vector embed(const std::string& text) override;
  std::string id() const override;
  std::size_t miss_count() const { return misses_; }

 private:
  std::map<std::string, Vector> entries_;
  std::shared_ptr<EmbeddingProvider> fallback_;
  std::size_t dim_ = 0;
  std::size_t misses_ = 0;
};

// Memoizing wrapper; with a cache directory the memo table also persists to
// <dir>/<provider-id>.jsonl so repeated runs hit no backend.
class CachingProvider : public EmbeddingProvider {
 public:
  explicit CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                           std::string cache_dir = "");
  std::size_t dim() const override { return inner_->dim(); }
  Vector embed(const std::string& text) override;
  std::string id() const override { return inner_->id(); }
  std::size_t backend_calls() const { return backend_calls_; }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::string cache_dir_;
  std::map<std::string, Vector> memo_;
  std::mutex mutex_;
  std::size_t backend_calls_ = 0;

  std::string cache_path() const;
};

// Keeps the first d coordinates and L2-normalizes; the zero vector stays
// zero. Throws DataError when d is out of range.
Vector truncate_mrl(const Vector& v, std::size_t d);

// Cosine similarity in [-1, 1]; 0 when either vector is zero.
double cosine(const Vector& u, const Vector& v);

void write_embedding_file(const std::string& path, const std::map<std::string, Vector>& entries);

}  // namespace editimpact
