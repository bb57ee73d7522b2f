#include "editimpact/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

Vector fuse(const Vector& w_i, const Vector& w_j) {
  if (w_i.size() != w_j.size()) throw DataError("fuse: dimension mismatch");
  const std::size_t d = w_i.size();
  Vector x;
  x.reserve(3 * d + 1);
  x.insert(x.end(), w_i.begin(), w_i.end());
  x.insert(x.end(), w_j.begin(), w_j.end());
  x.push_back(cosine(w_i, w_j));
  for (std::size_t k = 0; k < d; ++k) x.push_back(w_i[k] * w_j[k]);
  return x;
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr int kModelFormatVersion = 1;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Numerically stable BCE-with-logits for one sample.
double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

Eigen::MatrixXd uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          bound * (2.0 * rng.next_double() - 1.0);
  return m;
}

Eigen::MatrixXd dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return Eigen::MatrixXd::Ones(rows, cols);
  const double keep = 1.0 - rate;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rng->next_double() < keep ? 1.0 / keep : 0.0;
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw DataError("model file: bad matrix");
  const std::size_t r = rows.size();
  const std::size_t c = rows[0].size();
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DataError("model file: ragged matrix");
    for (std::size_t j = 0; j < c; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

AssociationClassifier::AssociationClassifier(std::size_t input_dim, std::size_t hidden_dim,
                                             std::uint64_t seed)
    : seed_(seed) {
  if (input_dim == 0 || hidden_dim == 0)
    throw DataError("classifier: dimensions must be positive");
  Rng rng(substream(seed, "init"));
  w0_ = uniform_matrix(hidden_dim, input_dim, 1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
  w1_ = uniform_matrix(hidden_dim, hidden_dim, 1.0 / std::sqrt(static_cast<double>(hidden_dim)), rng);
  w2_ = uniform_matrix(hidden_dim, hidden_dim, 1.0 / std::sqrt(static_cast<double>(hidden_dim)), rng);
  w3_ = uniform_matrix(1, hidden_dim, 1.0 / std::sqrt(static_cast<double>(hidden_dim)), rng);
  b0_ = Eigen::VectorXd::Zero(hidden_dim);
  b1_ = Eigen::VectorXd::Zero(hidden_dim);
  b2_ = Eigen::VectorXd::Zero(hidden_dim);
  b3_ = 0.0;
  init_moments();
}

void AssociationClassifier::init_moments() {
  adam_.m_w0 = Eigen::MatrixXd::Zero(w0_.rows(), w0_.cols());
  adam_.v_w0 = adam_.m_w0;
  adam_.m_w1 = Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols());
  adam_.v_w1 = adam_.m_w1;
  adam_.m_w2 = Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols());
  adam_.v_w2 = adam_.m_w2;
  adam_.m_b0 = Eigen::VectorXd::Zero(b0_.size());
  adam_.v_b0 = adam_.m_b0;
  adam_.m_b1 = Eigen::VectorXd::Zero(b1_.size());
  adam_.v_b1 = adam_.m_b1;
  adam_.m_b2 = Eigen::VectorXd::Zero(b2_.size());
  adam_.v_b2 = adam_.m_b2;
  adam_.m_w3 = Eigen::RowVectorXd::Zero(w3_.size());
  adam_.v_w3 = adam_.m_w3;
  adam_.m_b3 = adam_.v_b3 = 0.0;
  adam_.step = 0;
}

double AssociationClassifier::logit(const Vector& fused) const {
  if (fused.size() != input_dim())
    throw DataError("classifier: feature length " + std::to_string(fused.size()) +
                    " does not match input dimension " + std::to_string(input_dim()));
  Eigen::Map<const Eigen::VectorXd> x(fused.data(), static_cast<Eigen::Index>(fused.size()));
  Eigen::VectorXd h0 = (w0_ * x + b0_).cwiseMax(0.0);
  Eigen::VectorXd h1 = (w1_ * h0 + b1_).cwiseMax(0.0) + h0;
  Eigen::VectorXd h2 = (w2_ * h1 + b2_).cwiseMax(0.0) + h1;
  return w3_.dot(h2) + b3_;
}

double AssociationClassifier::prob(const Vector& fused) const { return sigmoid(logit(fused)); }

double AssociationClassifier::prob_training(const Vector& fused, double rate, Rng& rng) const {
  Eigen::Map<const Eigen::VectorXd> x(fused.data(), static_cast<Eigen::Index>(fused.size()));
  const std::size_t h = hidden_dim();
  Eigen::VectorXd d0 = dropout_mask(h, 1, rate, &rng);
  Eigen::VectorXd d1 = dropout_mask(h, 1, rate, &rng);
  Eigen::VectorXd d2 = dropout_mask(h, 1, rate, &rng);
  Eigen::VectorXd h0 = (w0_ * x + b0_).cwiseMax(0.0).cwiseProduct(d0);
  Eigen::VectorXd h1 = (w1_ * h0 + b1_).cwiseMax(0.0).cwiseProduct(d1) + h0;
  Eigen::VectorXd h2 = (w2_ * h1 + b2_).cwiseMax(0.0).cwiseProduct(d2) + h1;
  return sigmoid(w3_.dot(h2) + b3_);
}

double AssociationClassifier::loss_and_gradients(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                 Gradients* grads, double dropout_rate,
                                                 Rng* dropout_rng) const {
  const Eigen::Index batch = X.cols();
  if (batch == 0) throw DataError("classifier: empty batch");
  if (static_cast<std::size_t>(X.rows()) != input_dim())
    throw DataError("classifier: batch feature dimension mismatch");
  const Eigen::Index h = static_cast<Eigen::Index>(hidden_dim());

  Eigen::MatrixXd d0 = dropout_mask(h, batch, dropout_rate, dropout_rng);
  Eigen::MatrixXd d1 = dropout_mask(h, batch, dropout_rate, dropout_rng);
  Eigen::MatrixXd d2 = dropout_mask(h, batch, dropout_rate, dropout_rng);

  Eigen::MatrixXd a0 = (w0_ * X).colwise() + b0_;
  Eigen::MatrixXd h0 = a0.cwiseMax(0.0).cwiseProduct(d0);
  Eigen::MatrixXd a1 = (w1_ * h0).colwise() + b1_;
  Eigen::MatrixXd h1 = a1.cwiseMax(0.0).cwiseProduct(d1) + h0;
  Eigen::MatrixXd a2 = (w2_ * h1).colwise() + b2_;
  Eigen::MatrixXd h2 = a2.cwiseMax(0.0).cwiseProduct(d2) + h1;
  Eigen::RowVectorXd z = w3_ * h2;
  z.array() += b3_;

  double loss = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) loss += bce_with_logit(z(b), y(b));
  loss /= static_cast<double>(batch);

  if (grads == nullptr) return loss;

  Eigen::RowVectorXd dz(batch);
  for (Eigen::Index b = 0; b < batch; ++b)
    dz(b) = (sigmoid(z(b)) - y(b)) / static_cast<double>(batch);

  grads->w3 = dz * h2.transpose();
  grads->b3 = dz.sum();
  Eigen::MatrixXd dh2 = w3_.transpose() * dz;

  Eigen::MatrixXd da2 =
      dh2.cwiseProduct(d2).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
  grads->w2 = da2 * h1.transpose();
  grads->b2 = da2.rowwise().sum();
  Eigen::MatrixXd dh1 = w2_.transpose() * da2 + dh2;

  Eigen::MatrixXd da1 =
      dh1.cwiseProduct(d1).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
  grads->w1 = da1 * h0.transpose();
  grads->b1 = da1.rowwise().sum();
  Eigen::MatrixXd dh0 = w1_.transpose() * da1 + dh1;

  Eigen::MatrixXd da0 =
      dh0.cwiseProduct(d0).cwiseProduct((a0.array() > 0.0).cast<double>().matrix());
  grads->w0 = da0 * X.transpose();
  grads->b0 = da0.rowwise().sum();

  return loss;
}

namespace {

void adamw_update(Eigen::Ref<Eigen::MatrixXd> w, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                  Eigen::MatrixXd& v, long step, double lr, double decay) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  Eigen::ArrayXXd mhat = m.array() / c1;
  Eigen::ArrayXXd vhat = v.array() / c2;
  w.array() -= lr * (mhat / (vhat.sqrt() + kAdamEps) + decay * w.array());
}

}  // namespace

void AssociationClassifier::adamw_step(const Gradients& grads, double lr, double weight_decay) {
  ++adam_.step;
  adamw_update(w0_, grads.w0, adam_.m_w0, adam_.v_w0, adam_.step, lr, weight_decay);
  adamw_update(w1_, grads.w1, adam_.m_w1, adam_.v_w1, adam_.step, lr, weight_decay);
  adamw_update(w2_, grads.w2, adam_.m_w2, adam_.v_w2, adam_.step, lr, weight_decay);
  {
    Eigen::MatrixXd g = grads.w3;
    Eigen::MatrixXd m = adam_.m_w3, v = adam_.v_w3, w = w3_;
    adamw_update(w, g, m, v, adam_.step, lr, weight_decay);
    w3_ = w;
    adam_.m_w3 = m;
    adam_.v_w3 = v;
  }
  // Biases are exempt from weight decay.
  auto bias_update = [&](Eigen::VectorXd& b, const Eigen::VectorXd& g, Eigen::VectorXd& m,
                         Eigen::VectorXd& v) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_.step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_.step));
    b.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
  };
  bias_update(b0_, grads.b0, adam_.m_b0, adam_.v_b0);
  bias_update(b1_, grads.b1, adam_.m_b1, adam_.v_b1);
  bias_update(b2_, grads.b2, adam_.m_b2, adam_.v_b2);
  {
    adam_.m_b3 = kAdamBeta1 * adam_.m_b3 + (1.0 - kAdamBeta1) * grads.b3;
    adam_.v_b3 = kAdamBeta2 * adam_.v_b3 + (1.0 - kAdamBeta2) * grads.b3 * grads.b3;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_.step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_.step));
    b3_ -= lr * (adam_.m_b3 / c1) / (std::sqrt(adam_.v_b3 / c2) + kAdamEps);
  }
}

void AssociationClassifier::save(const std::string& path) const {
  nlohmann::json obj;
  obj["format_version"] = kModelFormatVersion;
  obj["input_dim"] = input_dim();
  obj["hidden_dim"] = hidden_dim();
  obj["seed"] = seed_;
  obj["w0"] = matrix_to_json(w0_);
  obj["w1"] = matrix_to_json(w1_);
  obj["w2"] = matrix_to_json(w2_);
  obj["w3"] = matrix_to_json(w3_);
  obj["b0"] = std::vector<double>(b0_.data(), b0_.data() + b0_.size());
  obj["b1"] = std::vector<double>(b1_.data(), b1_.data() + b1_.size());
  obj["b2"] = std::vector<double>(b2_.data(), b2_.data() + b2_.size());
  obj["b3"] = b3_;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << obj.dump(2) << "\n";
}

AssociationClassifier AssociationClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path + " is corrupted: " + e.what());
  }
  if (!obj.contains("format_version") || obj["format_version"].get<int>() != kModelFormatVersion)
    throw DataError("model file " + path + ": unsupported format version");
  AssociationClassifier model;
  try {
    model.seed_ = obj.at("seed").get<std::uint64_t>();
    model.w0_ = matrix_from_json(obj.at("w0"));
    model.w1_ = matrix_from_json(obj.at("w1"));
    model.w2_ = matrix_from_json(obj.at("w2"));
    model.w3_ = matrix_from_json(obj.at("w3"));
    auto vec = [](const nlohmann::json& arr) {
      Eigen::VectorXd v(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
      return v;
    };
    model.b0_ = vec(obj.at("b0"));
    model.b1_ = vec(obj.at("b1"));
    model.b2_ = vec(obj.at("b2"));
    model.b3_ = obj.at("b3").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path + " is corrupted: " + e.what());
  }
  const std::size_t expect = obj.at("input_dim").get<std::size_t>();
  const std::size_t hidden = obj.at("hidden_dim").get<std::size_t>();
  if (model.input_dim() != expect || model.hidden_dim() != hidden ||
      static_cast<std::size_t>(model.w1_.rows()) != hidden ||
      static_cast<std::size_t>(model.w3_.cols()) != hidden)
    throw DataError("model file " + path + ": inconsistent dimensions");
  model.init_moments();
  return model;
}

std::vector<double*> AssociationClassifier::parameters() {
  std::vector<double*> out;
  auto add = [&out](double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(data + i);
  };
  add(w0_.data(), w0_.size());
  add(b0_.data(), b0_.size());
  add(w1_.data(), w1_.size());
  add(b1_.data(), b1_.size());
  add(w2_.data(), w2_.size());
  add(b2_.data(), b2_.size());
  add(w3_.data(), w3_.size());
  out.push_back(&b3_);
  return out;
}

std::vector<const double*> AssociationClassifier::parameters() const {
  auto mutable_self = const_cast<AssociationClassifier*>(this);
  auto ptrs = mutable_self->parameters();
  return {ptrs.begin(), ptrs.end()};
}

double predict(const AssociationClassifier& model, const Vector& w_i, const Vector& w_j) {
  const double forward = model.prob(fuse(w_i, w_j));
  const double backward = model.prob(fuse(w_j, w_i));
  return 0.5 * (forward + backward);
}

std::vector<LabeledPair> sample_negatives(const MinedAssociations& mined, std::size_t ratio,
                                          std::uint64_t seed) {
  if (ratio < 1) throw DataError("sample_negatives: ratio must be >= 1");
  std::vector<std::pair<std::string, std::string>> candidates;
  const auto& items = mined.frequent_items;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      std::pair<std::string, std::string> key{items[i], items[j]};
      if (key.first > key.second) std::swap(key.first, key.second);
      if (!mined.cooccurring.count(key)) candidates.push_back(std::move(key));
    }
  }
  if (candidates.empty()) throw DataError("sample_negatives: no negative candidates exist");
  const std::size_t want = std::min(ratio * mined.rules.size(), candidates.size());
  Rng rng(substream(seed, "negatives"));
  // Partial Fisher-Yates: the first `want` slots are a uniform sample.
  for (std::size_t i = 0; i < want; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<LabeledPair> negatives;
  negatives.reserve(want);
  for (std::size_t i = 0; i < want; ++i)
    negatives.push_back({candidates[i].first, candidates[i].second, false});
  return negatives;
}

std::vector<LabeledPair> build_training_pairs(const MinedAssociations& mined, std::size_t ratio,
                                              std::uint64_t seed) {
  std::vector<LabeledPair> pairs;
  for (const auto& rule : mined.rules) pairs.push_back({rule.item_a, rule.item_b, true});
  auto negatives = sample_negatives(mined, ratio, seed);
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  return pairs;
}

AssociationClassifier train_classifier(const std::vector<LabeledPair>& pairs,
                                       EmbeddingProvider& provider, const TrainConfig& config,
                                       TrainLog* log) {
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& p : pairs) (p.positive ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("train: need both positive and negative pairs (got " + std::to_string(n_pos) +
                    " positive, " + std::to_string(n_neg) + " negative)");

  const std::size_t mrl = config.mrl_dim == 0 ? provider.dim()
                                              : std::min(config.mrl_dim, provider.dim());
  std::map<std::string, Vector> item_vec;
  for (const auto& p : pairs) {
    for (const auto& item : {p.item_a, p.item_b}) {
      if (!item_vec.count(item)) item_vec[item] = truncate_mrl(provider.embed(item), mrl);
    }
  }
  const std::size_t input_dim = 3 * mrl + 1;

  // 90/10 split by pair, then each kept pair contributes both fuse orders so
  // training matches the symmetrized prediction.
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(substream(config.seed, "split"));
  split_rng.shuffle(order);
  std::size_t n_val = static_cast<std::size_t>(
      std::floor(config.val_fraction * static_cast<double>(pairs.size())));
  if (n_val == 0 && pairs.size() >= 2) n_val = 1;
  const std::size_t n_train = pairs.size() - n_val;

  auto rows_for = [&](std::size_t begin, std::size_t end, Eigen::MatrixXd& X, Eigen::VectorXd& y,
                      std::vector<bool>& positive) {
    const std::size_t n = 2 * (end - begin);
    X.resize(static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(n));
    y.resize(static_cast<Eigen::Index>(n));
    positive.assign(n, false);
    std::size_t col = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const LabeledPair& p = pairs[order[k]];
      const Vector& va = item_vec[p.item_a];
      const Vector& vb = item_vec[p.item_b];
      for (const Vector& fused : {fuse(va, vb), fuse(vb, va)}) {
        for (std::size_t r = 0; r < input_dim; ++r)
          X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = fused[r];
        y(static_cast<Eigen::Index>(col)) = p.positive ? 1.0 : 0.0;
        positive[col] = p.positive;
        ++col;
      }
    }
  };

  Eigen::MatrixXd train_x, val_x;
  Eigen::VectorXd train_y, val_y;
  std::vector<bool> train_pos, val_pos;
  rows_for(0, n_train, train_x, train_y, train_pos);
  if (n_val > 0) rows_for(n_train, pairs.size(), val_x, val_y, val_pos);

  std::vector<std::size_t> pos_rows, neg_rows;
  for (std::size_t i = 0; i < train_pos.size(); ++i)
    (train_pos[i] ? pos_rows : neg_rows).push_back(i);
  if (pos_rows.empty() || neg_rows.empty())
    throw DataError("train: split left a single-class training set; lower val_fraction");

  AssociationClassifier model(input_dim, 128, config.seed);
  Rng batch_rng(substream(config.seed, "batches"));
  Rng dropout_rng(substream(config.seed, "dropout"));

  const std::size_t half = std::max<std::size_t>(1, config.batch_size / 2);
  std::vector<std::size_t>& majority = pos_rows.size() >= neg_rows.size() ? pos_rows : neg_rows;
  std::vector<std::size_t>& minority = pos_rows.size() >= neg_rows.size() ? neg_rows : pos_rows;

  double lr = config.lr;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t stall = 0;
  AssociationClassifier best = model;
  TrainLog local_log;

  Eigen::MatrixXd batch_x(static_cast<Eigen::Index>(input_dim),
                          static_cast<Eigen::Index>(2 * half));
  Eigen::VectorXd batch_y(static_cast<Eigen::Index>(2 * half));

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    batch_rng.shuffle(majority);
    const std::size_t batches = (majority.size() + half - 1) / half;
    for (std::size_t b = 0; b < batches; ++b) {
      std::size_t col = 0;
      auto put = [&](std::size_t row) {
        batch_x.col(static_cast<Eigen::Index>(col)) = train_x.col(static_cast<Eigen::Index>(row));
        batch_y(static_cast<Eigen::Index>(col)) = train_y(static_cast<Eigen::Index>(row));
        ++col;
      };
      for (std::size_t k = 0; k < half; ++k)
        put(majority[(b * half + k) % majority.size()]);
      for (std::size_t k = 0; k < half; ++k)
        put(minority[static_cast<std::size_t>(batch_rng.next_below(minority.size()))]);
      AssociationClassifier::Gradients grads;
      const double loss =
          model.loss_and_gradients(batch_x, batch_y, &grads, config.dropout, &dropout_rng);
      if (!std::isfinite(loss))
        throw DataError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(b) + " (lr=" + std::to_string(lr) + ")");
      model.adamw_step(grads, lr, config.weight_decay);
    }

    // Deterministic post-epoch losses over the full splits (no dropout).
    const double train_loss = model.loss_and_gradients(train_x, train_y, nullptr, 0.0, nullptr);
    const double val_loss = n_val > 0
                                ? model.loss_and_gradients(val_x, val_y, nullptr, 0.0, nullptr)
                                : train_loss;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw DataError("train: non-finite evaluation loss at epoch " + std::to_string(epoch));
    local_log.epochs.push_back({epoch, train_loss, val_loss, lr});

    if (val_loss < best_val - config.plateau_min_delta) {
      best_val = val_loss;
      best_epoch = epoch;
      best = model;
      stall = 0;
    } else {
      if (val_loss < best_val) {
        best_val = val_loss;
        best_epoch = epoch;
        best = model;
      }
      if (++stall >= config.plateau_patience) {
        lr *= config.plateau_factor;
        stall = 0;
      }
    }
  }

  local_log.best_val_loss = best_val;
  local_log.best_epoch = best_epoch;
  if (log != nullptr) *log = local_log;
  return best;
}

void write_train_log(const std::string& path, const TrainLog& log) {
  nlohmann::json obj;
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"lr", e.lr}});
  }
  obj["epochs"] = std::move(epochs);
  obj["best_val_loss"] = log.best_val_loss;
  obj["best_epoch"] = log.best_epoch;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log: " + path);
  out << obj.dump(2) << "\n";
}

}  // namespace editimpact
