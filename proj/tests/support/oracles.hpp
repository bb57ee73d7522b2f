// Independent reference implementations used only by tests. Each oracle is a
// direct transcription of the defining formula or a naive algorithm, kept
// deliberately separate from the library code paths it checks.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "editimpact/corpus.hpp"
#include "editimpact/eval.hpp"
#include "editimpact/mining.hpp"

namespace oracles {

// Boundary score computed directly: mu counts Reasonable in the first N_cor
// positions plus Corrected after them.
inline double s_bound_brute(const std::vector<editimpact::EditLabel>& labels) {
  using editimpact::EditLabel;
  const std::size_t k = labels.size();
  std::size_t n_cor = 0;
  for (auto l : labels)
    if (l == EditLabel::Corrected) ++n_cor;
  std::size_t mu = 0;
  for (std::size_t i = 1; i <= n_cor; ++i)
    if (labels[i - 1] == EditLabel::Reasonable) ++mu;
  for (std::size_t i = n_cor + 1; i <= k; ++i)
    if (labels[i - 1] == EditLabel::Corrected) ++mu;
  return 1.0 - static_cast<double>(mu) / static_cast<double>(k);
}

// Ranking score computed directly over all index pairs.
inline double s_rank_brute(const std::vector<editimpact::EditLabel>& labels, double epsilon) {
  using editimpact::EditLabel;
  const std::size_t k = labels.size();
  std::size_t n_cor = 0;
  for (auto l : labels)
    if (l == EditLabel::Corrected) ++n_cor;
  const std::size_t n_rea = k - n_cor;
  std::size_t sigma = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (labels[i] == EditLabel::Reasonable && labels[j] == EditLabel::Corrected) ++sigma;
  return 1.0 - static_cast<double>(sigma) /
                   (static_cast<double>(n_cor) * static_cast<double>(n_rea) + epsilon);
}

// Union-find over edge lists; partitions as sorted member vectors sorted by
// smallest member.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

  std::vector<std::vector<std::size_t>> groups() {
    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < parent_.size(); ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : by_root) {
      std::sort(members.begin(), members.end());
      out.push_back(members);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Exhaustive double-loop mining oracle; formulas written in the same
// arithmetic order as the library so accepted stats must match bit for bit.
struct OracleRule {
  std::string a, b;
  std::size_t co, ca, cb;
  double jaccard, confidence, lift;
};

inline std::vector<OracleRule> mine_brute(const std::vector<editimpact::Transaction>& ts,
                                          const editimpact::MiningConfig& cfg) {
  std::set<std::string> all_items;
  for (const auto& t : ts) all_items.insert(t.begin(), t.end());
  std::vector<std::string> items(all_items.begin(), all_items.end());

  auto count_of = [&](const std::string& item) {
    std::size_t c = 0;
    for (const auto& t : ts)
      if (t.count(item)) ++c;
    return c;
  };

  std::vector<OracleRule> rules;
  const double total = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const std::size_t ca = count_of(items[i]);
      const std::size_t cb = count_of(items[j]);
      if (ca < cfg.min_item_freq || cb < cfg.min_item_freq) continue;
      std::size_t co = 0;
      for (const auto& t : ts)
        if (t.count(items[i]) && t.count(items[j])) ++co;
      if (co < cfg.min_cooccurrence) continue;
      const double jaccard = static_cast<double>(co) / static_cast<double>(ca + cb - co);
      const double confidence =
          std::max(static_cast<double>(co) / static_cast<double>(ca),
                   static_cast<double>(co) / static_cast<double>(cb));
      const double lift = static_cast<double>(co) * total /
                          (static_cast<double>(ca) * static_cast<double>(cb));
      if (jaccard <= cfg.min_pair_jaccard) continue;
      if (confidence <= cfg.min_confidence) continue;
      if (lift <= cfg.min_lift) continue;
      const std::string text_a = items[i].substr(1);
      const std::string text_b = items[j].substr(1);
      if (editimpact::text_similarity(text_a, text_b) >= cfg.word_jaccard_filter) continue;
      rules.push_back({items[i], items[j], co, ca, cb, jaccard, confidence, lift});
    }
  }
  std::sort(rules.begin(), rules.end(), [](const OracleRule& x, const OracleRule& y) {
    if (x.jaccard != y.jaccard) return x.jaccard > y.jaccard;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return rules;
}

// Rank-based ROC-AUC (Mann-Whitney), ties get midranks.
inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k]) {
      pos_rank_sum += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Reachability check for head arrays: valid iff exactly one zero head and
// every token reaches 0 without repeating.
inline bool tree_valid_brute(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int h : heads) {
    if (h < 0 || h > n) return false;
    if (h == 0) ++roots;
  }
  if (n > 0 && roots != 1) return false;
  for (int start = 1; start <= n; ++start) {
    std::set<int> seen;
    int cur = start;
    while (cur != 0) {
      if (!seen.insert(cur).second) return false;
      cur = heads[cur - 1];
    }
  }
  return true;
}

}  // namespace oracles
