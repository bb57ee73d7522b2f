#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "editimpact/embed.hpp"
#include "editimpact/mining.hpp"
#include "editimpact/rng.hpp"

namespace editimpact {

// Fused pair feature [w_i | w_j | cos_ij | w_i (.) w_j]; length 3d+1.
Vector fuse(const Vector& w_i, const Vector& w_j);

struct LabeledPair {
  std::string item_a;
  std::string item_b;
  bool positive = false;

  bool operator==(const LabeledPair&) const = default;
};

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-2;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::size_t plateau_patience = 3;
  double plateau_min_delta = 1e-4;
  double plateau_factor = 0.5;
  double dropout = 0.4;
  double val_fraction = 0.1;
  std::size_t neg_ratio = 3;
  std::size_t mrl_dim = 256;  // clamped to the provider dimension
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
};

// Residual MLP scoring a fused pair feature: input -> hidden, two hidden
// residual blocks, then a scalar logit. Rectifier activations; dropout only
// during training; inference is deterministic.
class AssociationClassifier {
 public:
  struct Gradients {
    Eigen::MatrixXd w0, w1, w2;
    Eigen::VectorXd b0, b1, b2;
    Eigen::RowVectorXd w3;
    double b3 = 0.0;
  };

  AssociationClassifier() = default;
  AssociationClassifier(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(w0_.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w0_.rows()); }
  // Embedding dimension d implied by input_dim = 3d+1.
  std::size_t embedding_dim() const { return (input_dim() - 1) / 3; }

  double logit(const Vector& fused) const;
  double prob(const Vector& fused) const;

  // One stochastic forward pass with inverted-dropout masks at `rate`.
  double prob_training(const Vector& fused, double rate, Rng& rng) const;

  // Mean binary cross-entropy over the batch (columns of X); fills gradients
  // when requested. Dropout masks are sampled from `dropout_rng` when given,
  // otherwise the pass is deterministic.
  double loss_and_gradients(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            Gradients* grads, double dropout_rate, Rng* dropout_rng) const;

  void adamw_step(const Gradients& grads, double lr, double weight_decay);

  void save(const std::string& path) const;
  static AssociationClassifier load(const std::string& path);

  // Raw parameter access for gradient checking.
  std::vector<double*> parameters();
  std::vector<const double*> parameters() const;

 private:
  Eigen::MatrixXd w0_, w1_, w2_;
  Eigen::VectorXd b0_, b1_, b2_;
  Eigen::RowVectorXd w3_;
  double b3_ = 0.0;
  std::uint64_t seed_ = 0;

  // AdamW state, one slot per parameter tensor.
  struct Moments {
    Eigen::MatrixXd m_w0, v_w0, m_w1, v_w1, m_w2, v_w2;
    Eigen::VectorXd m_b0, v_b0, m_b1, v_b1, m_b2, v_b2;
    Eigen::RowVectorXd m_w3, v_w3;
    double m_b3 = 0.0, v_b3 = 0.0;
    long step = 0;
  };
  Moments adam_;

  void init_moments();

  friend AssociationClassifier classifier_from_json(const std::string& path);
};

// Symmetrized association probability: mean of both fuse orders, dropout off.
double predict(const AssociationClassifier& model, const Vector& w_i, const Vector& w_j);

// Uniformly samples unordered pairs of frequent items that never co-occur in
// any transaction. Count = min(ratio * |positives|, candidates). Deterministic
// given the seed; throws DataError when no candidate exists.
std::vector<LabeledPair> sample_negatives(const MinedAssociations& mined, std::size_t ratio,
                                          std::uint64_t seed);

// Accepted rules as positives plus sampled negatives.
std::vector<LabeledPair> build_training_pairs(const MinedAssociations& mined, std::size_t ratio,
                                              std::uint64_t seed);

// Trains with class-balanced mini-batches (minority resampled with
// replacement), a seeded 90/10 pair split, AdamW, and plateau LR halving.
// Returns the weights at the best validation loss.
AssociationClassifier train_classifier(const std::vector<LabeledPair>& pairs,
                                       EmbeddingProvider& provider, const TrainConfig& config,
                                       TrainLog* log = nullptr);

void write_train_log(const std::string& path, const TrainLog& log);

}  // namespace editimpact
