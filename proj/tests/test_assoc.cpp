#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "editimpact/assoc.hpp"
#include "editimpact/errors.hpp"
#include "support/oracles.hpp"

using namespace editimpact;

namespace {

// Parameter slots of the gradient struct in the same canonical order as
// AssociationClassifier::parameters().
std::vector<const double*> flatten(const AssociationClassifier::Gradients& g) {
  std::vector<const double*> out;
  auto add = [&out](const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(data + i);
  };
  add(g.w0.data(), g.w0.size());
  add(g.b0.data(), g.b0.size());
  add(g.w1.data(), g.w1.size());
  add(g.b1.data(), g.b1.size());
  add(g.w2.data(), g.w2.size());
  add(g.b2.data(), g.b2.size());
  add(g.w3.data(), g.w3.size());
  out.push_back(&g.b3);
  return out;
}

// Cluster-structured embeddings: members of one cluster stay near its
// center, so within-cluster pairs are separable from cross-cluster pairs.
std::map<std::string, Vector> planted_clusters(std::size_t dim, std::size_t clusters,
                                               std::size_t members, double spread,
                                               std::uint64_t seed) {
  HashProvider centers(dim, seed);
  HashProvider noise(dim, seed + 1);
  std::map<std::string, Vector> vectors;
  for (std::size_t c = 0; c < clusters; ++c) {
    const Vector center = centers.embed("cluster-" + std::to_string(c));
    for (std::size_t m = 0; m < members; ++m) {
      const std::string name = "c" + std::to_string(c) + "_w" + std::to_string(m);
      const Vector wiggle = noise.embed(name);
      Vector v(dim);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        v[i] = center[i] + spread * wiggle[i];
        norm += v[i] * v[i];
      }
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
      vectors[name] = v;
    }
  }
  return vectors;
}

struct ClusterData {
  std::vector<LabeledPair> pairs;
  std::map<std::string, Vector> vectors;
};

ClusterData cluster_dataset(std::size_t dim, std::size_t clusters, std::size_t members,
                            std::size_t neg_ratio, std::uint64_t seed) {
  ClusterData data;
  data.vectors = planted_clusters(dim, clusters, members, 0.35, seed);
  for (std::size_t c = 0; c < clusters; ++c)
    for (std::size_t i = 0; i < members; ++i)
      for (std::size_t j = i + 1; j < members; ++j)
        data.pairs.push_back({"c" + std::to_string(c) + "_w" + std::to_string(i),
                              "c" + std::to_string(c) + "_w" + std::to_string(j), true});
  const std::size_t n_pos = data.pairs.size();
  Rng rng(seed + 2);
  std::size_t added = 0;
  while (added < neg_ratio * n_pos) {
    const std::size_t ca = rng.next_below(clusters);
    const std::size_t cb = rng.next_below(clusters);
    if (ca == cb) continue;
    const std::string a = "c" + std::to_string(ca) + "_w" + std::to_string(rng.next_below(members));
    const std::string b = "c" + std::to_string(cb) + "_w" + std::to_string(rng.next_below(members));
    data.pairs.push_back({a, b, false});
    ++added;
  }
  return data;
}

}  // namespace

TEST_CASE("fuse lays out [w_i | w_j | cos | hadamard]") {
  const Vector a{1.0, 0.0};
  const Vector b{0.0, 1.0};
  CHECK(fuse(a, b) == Vector{1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
  CHECK(fuse(a, a) == Vector{1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0});
  CHECK(fuse(Vector(256, 0.1), Vector(256, 0.2)).size() == 769);
  CHECK_THROWS_AS(fuse({1.0}, {1.0, 2.0}), DataError);
}

TEST_CASE("analytic gradients match central finite differences") {
  AssociationClassifier model(13, 16, 2024);
  Rng rng(7);
  double worst = 0.0;
  for (int probe = 0; probe < 12; ++probe) {
    Eigen::MatrixXd x(13, 2);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.next_double() - 1.0;
    Eigen::VectorXd y(2);
    y << static_cast<double>(rng.next_below(2)), static_cast<double>(rng.next_below(2));

    AssociationClassifier::Gradients grads;
    model.loss_and_gradients(x, y, &grads, 0.0, nullptr);
    const auto grad_view = flatten(grads);
    auto params = model.parameters();
    REQUIRE(params.size() == grad_view.size());

    for (int k = 0; k < 30; ++k) {
      const std::size_t idx = rng.next_below(params.size());
      double* p = params[idx];
      const double saved = *p;
      const double h = 1e-6 * std::max(1.0, std::abs(saved));
      *p = saved + h;
      const double up = model.loss_and_gradients(x, y, nullptr, 0.0, nullptr);
      *p = saved - h;
      const double down = model.loss_and_gradients(x, y, nullptr, 0.0, nullptr);
      *p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = *grad_view[idx];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("zeroed residual blocks act as the identity") {
  AssociationClassifier model(4, 3, 11);
  auto params = model.parameters();
  // Layout: w0 (12), b0 (3), w1 (9), b1 (3), w2 (9), b2 (3), w3 (3), b3 (1).
  REQUIRE(params.size() == 43);
  for (std::size_t i = 15; i < 39; ++i) *params[i] = 0.0;  // w1, b1, w2, b2

  // With both blocks zeroed the logit reduces to w3 . relu(w0 x + b0) + b3.
  const Vector x{0.3, -0.2, 0.7, 0.1};
  Eigen::MatrixXd w0(3, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 3; ++i) w0(i, j) = *params[static_cast<std::size_t>(j * 3 + i)];
  Eigen::Vector3d b0(*params[12], *params[13], *params[14]);
  Eigen::Vector4d xv(x[0], x[1], x[2], x[3]);
  Eigen::Vector3d h0 = (w0 * xv + b0).cwiseMax(0.0);
  const double expected =
      *params[39] * h0(0) + *params[40] * h0(1) + *params[41] * h0(2) + *params[42];
  CHECK(model.logit(x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero-weight model predicts the sigmoid of its bias") {
  AssociationClassifier model(7, 5, 3);
  for (double* p : model.parameters()) *p = 0.0;
  const Vector a{0.1, 0.2}, b{0.3, 0.4};
  CHECK(predict(model, a, b) == doctest::Approx(0.5));
}

TEST_CASE("predict is symmetric in its arguments") {
  AssociationClassifier model(7, 8, 99);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(2), b(2);
    for (double& x : a) x = rng.next_double();
    for (double& x : b) x = rng.next_double();
    CHECK(predict(model, a, b) == doctest::Approx(predict(model, b, a)).epsilon(1e-12));
  }
}

TEST_CASE("full-batch training loss strictly decreases on separable data") {
  const auto data = cluster_dataset(8, 4, 5, 1, 31);
  const std::size_t input_dim = 3 * 8 + 1;
  Eigen::MatrixXd x(input_dim, data.pairs.size());
  Eigen::VectorXd y(data.pairs.size());
  for (std::size_t k = 0; k < data.pairs.size(); ++k) {
    const Vector fused = fuse(data.vectors.at(data.pairs[k].item_a),
                              data.vectors.at(data.pairs[k].item_b));
    for (std::size_t r = 0; r < input_dim; ++r)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = fused[r];
    y(static_cast<Eigen::Index>(k)) = data.pairs[k].positive ? 1.0 : 0.0;
  }
  AssociationClassifier model(input_dim, 32, 5);
  double prev = model.loss_and_gradients(x, y, nullptr, 0.0, nullptr);
  for (int step = 0; step < 5; ++step) {
    AssociationClassifier::Gradients grads;
    model.loss_and_gradients(x, y, &grads, 0.0, nullptr);
    model.adamw_step(grads, 1e-3, 1e-2);
    const double now = model.loss_and_gradients(x, y, nullptr, 0.0, nullptr);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("zero learning rate freezes the reported losses") {
  const auto data = cluster_dataset(6, 3, 4, 2, 17);
  FileProvider provider(data.vectors);
  TrainConfig config;
  config.lr = 0.0;
  config.epochs = 4;
  config.mrl_dim = 0;
  config.seed = 9;
  TrainLog log;
  train_classifier(data.pairs, provider, config, &log);
  REQUIRE(log.epochs.size() == 4);
  for (const auto& e : log.epochs) {
    CHECK(std::abs(e.train_loss - log.epochs[0].train_loss) <= 1e-12);
    CHECK(std::abs(e.val_loss - log.epochs[0].val_loss) <= 1e-12);
  }
}

TEST_CASE("shuffled labels keep validation loss at chance level") {
  auto data = cluster_dataset(8, 6, 6, 1, 23);
  Rng rng(77);
  for (auto& p : data.pairs) p.positive = rng.next_below(2) == 1;
  FileProvider provider(data.vectors);
  TrainConfig config;
  config.epochs = 10;
  config.mrl_dim = 0;
  config.seed = 4;
  TrainLog log;
  train_classifier(data.pairs, provider, config, &log);
  CHECK(std::abs(log.best_val_loss - std::log(2.0)) <= 0.05);
}

TEST_CASE("training on planted clusters separates held-out pairs") {
  const auto data = cluster_dataset(16, 8, 6, 3, 41);
  // Hold out a slice before training; evaluate AUC with the oracle.
  std::vector<LabeledPair> train_pairs, held;
  for (std::size_t i = 0; i < data.pairs.size(); ++i)
    (i % 7 == 0 ? held : train_pairs).push_back(data.pairs[i]);
  FileProvider provider(data.vectors);
  TrainConfig config;
  config.epochs = 20;
  config.lr = 1e-3;
  config.mrl_dim = 0;
  config.seed = 12;
  const AssociationClassifier model = train_classifier(train_pairs, provider, config, nullptr);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& p : held) {
    scores.push_back(predict(model, data.vectors.at(p.item_a), data.vectors.at(p.item_b)));
    labels.push_back(p.positive);
  }
  CHECK(oracles::roc_auc(scores, labels) >= 0.9);
}

TEST_CASE("training requires both classes") {
  auto data = cluster_dataset(6, 3, 4, 1, 5);
  for (auto& p : data.pairs) p.positive = true;
  FileProvider provider(data.vectors);
  TrainConfig config;
  config.mrl_dim = 0;
  CHECK_THROWS_AS(train_classifier(data.pairs, provider, config, nullptr), DataError);
}

TEST_CASE("dropout expectation matches the deterministic pass") {
  AssociationClassifier model(10, 16, 55);
  Rng input_rng(2);
  Vector x(10);
  for (double& v : x) v = 2.0 * input_rng.next_double() - 1.0;
  const double expected = model.prob(x);
  Rng mask_rng(91);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += model.prob_training(x, 0.4, mask_rng);
  CHECK(std::abs(sum / n - expected) <= 0.02);
}

TEST_CASE("sample_negatives draws non-co-occurring frequent pairs") {
  MinedAssociations mined;
  mined.frequent_items = {"+a", "+b", "+c", "+d"};
  mined.cooccurring = {{"+a", "+b"}};
  mined.rules.push_back({"+a", "+b", {}});
  const auto negatives = sample_negatives(mined, 3, 77);
  CHECK(negatives.size() == 3);  // min(3*1, C(4,2)-1 = 5)
  for (const auto& n : negatives) {
    CHECK(!n.positive);
    CHECK(!(n.item_a == "+a" && n.item_b == "+b"));
  }
  CHECK(sample_negatives(mined, 3, 77) == std::vector<LabeledPair>(negatives));

  MinedAssociations saturated;
  saturated.frequent_items = {"+a", "+b"};
  saturated.cooccurring = {{"+a", "+b"}};
  saturated.rules.push_back({"+a", "+b", {}});
  CHECK_THROWS_AS(sample_negatives(saturated, 3, 1), DataError);

  const auto both = build_training_pairs(mined, 3, 77);
  CHECK(both.size() == 4);
  CHECK(both[0].positive);
}

TEST_CASE("models round trip through save and load") {
  AssociationClassifier model(13, 16, 321);
  const auto path = std::filesystem::temp_directory_path() / "ei_model.json";
  model.save(path.string());
  const AssociationClassifier loaded = AssociationClassifier::load(path.string());
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(4), b(4);
    for (double& v : a) v = 2.0 * rng.next_double() - 1.0;
    for (double& v : b) v = 2.0 * rng.next_double() - 1.0;
    CHECK(predict(model, a, b) == predict(loaded, a, b));
  }

  CHECK_THROWS_AS(AssociationClassifier::load("/nonexistent/model.json"), DataError);

  const auto truncated = std::filesystem::temp_directory_path() / "ei_model_trunc.json";
  {
    std::ifstream in(path);
    std::string full((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(truncated);
    out << full.substr(0, full.size() / 2);
  }
  CHECK_THROWS_AS(AssociationClassifier::load(truncated.string()), DataError);

  const auto wrong_version = std::filesystem::temp_directory_path() / "ei_model_ver.json";
  {
    std::ifstream in(path);
    std::string full((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string needle = "\"format_version\": 1";
    full.replace(full.find(needle), needle.size(), "\"format_version\": 99");
    std::ofstream out(wrong_version);
    out << full;
  }
  CHECK_THROWS_WITH_AS(AssociationClassifier::load(wrong_version.string()),
                       doctest::Contains("version"), DataError);
}
