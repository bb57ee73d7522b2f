#include "editimpact/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

std::string label_name(EditLabel label) {
  return label == EditLabel::Corrected ? "corrected" : "reasonable";
}

EditLabel parse_label(const std::string& name) {
  std::string lower = name;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "corrected") return EditLabel::Corrected;
  if (lower == "reasonable") return EditLabel::Reasonable;
  throw DataError("unknown edit label \"" + name + "\"");
}

std::size_t LabeledRanking::n_cor() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), EditLabel::Corrected));
}

std::size_t LabeledRanking::n_rea() const { return labels.size() - n_cor(); }

double s_bound(const LabeledRanking& lr) {
  const std::size_t k = lr.size();
  if (k == 0) throw DataError("s_bound: empty label list");
  const std::size_t n_cor = lr.n_cor();
  std::size_t mu = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (i < n_cor && lr.labels[i] == EditLabel::Reasonable) ++mu;
    if (i >= n_cor && lr.labels[i] == EditLabel::Corrected) ++mu;
  }
  return 1.0 - static_cast<double>(mu) / static_cast<double>(k);
}

double s_rank(const LabeledRanking& lr, const EvalConfig& cfg) {
  const std::size_t k = lr.size();
  if (k == 0) throw DataError("s_rank: empty label list");
  std::size_t inversions = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (lr.labels[i] != EditLabel::Reasonable) continue;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (lr.labels[j] == EditLabel::Corrected) ++inversions;
    }
  }
  const double max_inversions =
      static_cast<double>(lr.n_cor()) * static_cast<double>(lr.n_rea());
  return 1.0 - static_cast<double>(inversions) / (max_inversions + cfg.epsilon);
}

void write_labels(const std::string& path, const std::vector<LabeledInstance>& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label file: " + path);
  for (const auto& instance : labels) {
    nlohmann::json obj;
    obj["id"] = instance.id;
    std::vector<std::string> names;
    for (EditLabel l : instance.labels) names.push_back(label_name(l));
    obj["labels"] = names;
    out << obj.dump() << "\n";
  }
}

std::vector<LabeledInstance> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);
  std::vector<LabeledInstance> result;
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
    LabeledInstance instance;
    instance.id = obj.at("id").get<std::string>();
    for (const auto& name : obj.at("labels"))
      instance.labels.push_back(parse_label(name.get<std::string>()));
    result.push_back(std::move(instance));
  }
  return result;
}

LabeledRanking align_labels(const std::vector<EditLabel>& labels_in_edit_order,
                            const std::vector<std::size_t>& edit_rank) {
  if (labels_in_edit_order.size() != edit_rank.size())
    throw DataError("align_labels: " + std::to_string(labels_in_edit_order.size()) +
                    " labels for " + std::to_string(edit_rank.size()) + " ranked edits");
  std::vector<std::size_t> order(edit_rank.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return edit_rank[a] < edit_rank[b]; });
  LabeledRanking lr;
  for (std::size_t i : order) lr.labels.push_back(labels_in_edit_order[i]);
  return lr;
}

EvalReport evaluate(const std::vector<RankedPair>& rankings,
                    const std::vector<LabeledInstance>& labels, const EvalConfig& cfg) {
  std::map<std::string, std::vector<EditLabel>> label_map;
  for (const auto& instance : labels) label_map[instance.id] = instance.labels;

  struct Accumulator {
    double bound_sum = 0.0;
    double rank_sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Accumulator> acc;
  std::set<std::string> excluded_ids;
  for (const auto& ranked : rankings) {
    auto it = label_map.find(ranked.id);
    if (it == label_map.end()) {
      excluded_ids.insert(ranked.id);
      continue;
    }
    const LabeledRanking lr = align_labels(it->second, ranked.output.edit_rank);
    auto& a = acc[ranked.ranker];
    a.bound_sum += s_bound(lr);
    a.rank_sum += s_rank(lr, cfg);
    a.n += 1;
  }

  EvalReport report;
  report.excluded = excluded_ids.size();
  for (const auto& [ranker, a] : acc) {
    RankerReport r;
    r.n_instances = a.n;
    if (a.n > 0) {
      r.s_bound_mean = a.bound_sum / static_cast<double>(a.n);
      r.s_rank_mean = a.rank_sum / static_cast<double>(a.n);
    }
    report.per_ranker[ranker] = r;
  }
  return report;
}

void write_report(const std::string& path, const EvalReport& report) {
  nlohmann::json obj;
  nlohmann::json per_ranker = nlohmann::json::object();
  for (const auto& [ranker, r] : report.per_ranker) {
    per_ranker[ranker] = {{"s_bound_mean", r.s_bound_mean},
                          {"s_rank_mean", r.s_rank_mean},
                          {"n_instances", r.n_instances}};
  }
  obj["per_ranker"] = std::move(per_ranker);
  obj["excluded"] = report.excluded;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report file: " + path);
  out << obj.dump(2) << "\n";
}

double cohen_kappa(const std::vector<EditLabel>& a, const std::vector<EditLabel>& b) {
  if (a.size() != b.size()) throw DataError("cohen_kappa: label lists differ in length");
  if (a.empty()) throw DataError("cohen_kappa: empty label lists");
  const double n = static_cast<double>(a.size());
  double agree = 0.0, a_cor = 0.0, b_cor = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    if (a[i] == EditLabel::Corrected) ++a_cor;
    if (b[i] == EditLabel::Corrected) ++b_cor;
  }
  const double p_o = agree / n;
  const double p_e = (a_cor / n) * (b_cor / n) + (1.0 - a_cor / n) * (1.0 - b_cor / n);
  if (p_e >= 1.0) {
    if (p_o >= 1.0) return 1.0;
    throw DataError("cohen_kappa: undefined (chance agreement 1 with disagreement)");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace editimpact
