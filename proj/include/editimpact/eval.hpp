#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "editimpact/rank.hpp"

namespace editimpact {

enum class EditLabel { Corrected, Reasonable };

std::string label_name(EditLabel label);
EditLabel parse_label(const std::string& name);

// Edit labels ordered by the predicted rank.
struct LabeledRanking {
  std::vector<EditLabel> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t n_cor() const;
  std::size_t n_rea() const;
};

struct EvalConfig {
  double epsilon = 1e-9;
};

// 1 - mu/k where mu counts Reasonable labels above the ideal boundary plus
// Corrected labels below it. 1 iff all Corrected precede all Reasonable.
double s_bound(const LabeledRanking& lr);

// 1 - inversions / (N_cor * N_rea + epsilon); an inversion is a Reasonable
// label ranked above a Corrected one.
double s_rank(const LabeledRanking& lr, const EvalConfig& cfg = {});

// Labels for one instance in EditSet order (not rank order).
struct LabeledInstance {
  std::string id;
  std::vector<EditLabel> labels;
};

void write_labels(const std::string& path, const std::vector<LabeledInstance>& labels);
std::vector<LabeledInstance> load_labels(const std::string& path);

// Orders an instance's EditSet-aligned labels by a ranker's edit_rank
// (members of a merged group stay in edit order within their shared
// position). Throws DataError on a length mismatch.
LabeledRanking align_labels(const std::vector<EditLabel>& labels_in_edit_order,
                            const std::vector<std::size_t>& edit_rank);

struct RankerReport {
  double s_bound_mean = 0.0;
  double s_rank_mean = 0.0;
  std::size_t n_instances = 0;
};

struct EvalReport {
  std::map<std::string, RankerReport> per_ranker;
  std::size_t excluded = 0;  // instances without labels
};

// Unweighted macro-means per ranker over all instances that have labels.
EvalReport evaluate(const std::vector<RankedPair>& rankings,
                    const std::vector<LabeledInstance>& labels, const EvalConfig& cfg = {});

void write_report(const std::string& path, const EvalReport& report);

// Two-class Cohen's kappa over aligned label lists. Returns 1 for identical
// lists; throws DataError on length mismatch or when chance agreement is 1
// with disagreement present.
double cohen_kappa(const std::vector<EditLabel>& a, const std::vector<EditLabel>& b);

}  // namespace editimpact
