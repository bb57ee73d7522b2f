#include "editimpact/rank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"
#include "editimpact/rng.hpp"

namespace editimpact {

NGramLM::NGramLM(std::vector<std::string> vocabulary, std::size_t order, double add_k)
    : order_(order), add_k_(add_k), vocab_(std::move(vocabulary)) {
  if (order_ < 1) throw DataError("NGramLM: order must be >= 1");
  if (add_k_ <= 0.0) throw DataError("NGramLM: smoothing constant must be positive");
  std::set<std::string> seen(vocab_.begin(), vocab_.end());
  if (!seen.count(kUnk)) vocab_.push_back(kUnk);
  if (!seen.count(kEos)) vocab_.push_back(kEos);
  std::sort(vocab_.begin(), vocab_.end());
  vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  for (const auto& w : vocab_) in_vocab_[w] = true;
}

std::string NGramLM::map_token(const std::string& token) const {
  if (token == kBos) return token;
  return in_vocab_.count(token) ? token : std::string(kUnk);
}

std::string NGramLM::context_key(const std::vector<std::string>& context) {
  std::string key;
  for (const auto& t : context) {
    key += t;
    key += '\x1f';
  }
  return key;
}

void NGramLM::observe(const std::vector<std::string>& tokens) {
  std::vector<std::string> padded(order_ - 1, kBos);
  for (const auto& t : tokens) padded.push_back(map_token(t));
  padded.push_back(kEos);
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::vector<std::string> context(padded.begin() + static_cast<std::ptrdiff_t>(i - (order_ - 1)),
                                     padded.begin() + static_cast<std::ptrdiff_t>(i));
    const std::string key = context_key(context);
    ++counts_[key][padded[i]];
    ++context_totals_[key];
  }
}

NGramLM NGramLM::train(const std::vector<Sentence>& corpus, std::size_t order, double add_k) {
  if (corpus.empty()) throw DataError("NGramLM::train: empty corpus");
  std::set<std::string> vocab;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) vocab.insert(t);
  NGramLM lm(std::vector<std::string>(vocab.begin(), vocab.end()), order, add_k);
  for (const auto& s : corpus) lm.observe(s.tokens);
  return lm;
}

double NGramLM::probability(const std::vector<std::string>& context,
                            const std::string& token) const {
  if (context.size() != order_ - 1)
    throw DataError("NGramLM: context length must be order-1");
  std::vector<std::string> mapped;
  mapped.reserve(context.size());
  for (const auto& t : context) mapped.push_back(map_token(t));
  const std::string key = context_key(mapped);
  const double v = static_cast<double>(vocab_.size());
  double count = 0.0, total = 0.0;
  auto ctx_it = counts_.find(key);
  if (ctx_it != counts_.end()) {
    auto tok_it = ctx_it->second.find(map_token(token));
    if (tok_it != ctx_it->second.end()) count = static_cast<double>(tok_it->second);
    total = static_cast<double>(context_totals_.at(key));
  }
  return (count + add_k_) / (total + add_k_ * v);
}

double NGramLM::disfluency(const Sentence& s) const {
  std::vector<std::string> padded(order_ - 1, kBos);
  for (const auto& t : s.tokens) padded.push_back(map_token(t));
  padded.push_back(kEos);
  double log_sum = 0.0;
  std::size_t positions = 0;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::vector<std::string> context(padded.begin() + static_cast<std::ptrdiff_t>(i - (order_ - 1)),
                                     padded.begin() + static_cast<std::ptrdiff_t>(i));
    log_sum += std::log(probability(context, padded[i]));
    ++positions;
  }
  return std::exp(-log_sum / static_cast<double>(positions));
}

StubScorer StubScorer::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stub scorer file: " + path);
  std::map<std::string, double> table;
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
    table[obj.at("text").get<std::string>()] = obj.at("score").get<double>();
  }
  return StubScorer(std::move(table));
}

double StubScorer::disfluency(const Sentence& s) const {
  const std::string key = s.joined();
  auto it = table_.find(key);
  if (it == table_.end()) throw DataError("stub scorer: no score for \"" + key + "\"");
  return it->second;
}

namespace {

void check_partition(const EditSet& set, const std::vector<EditGroup>& groups) {
  std::vector<bool> seen(set.size(), false);
  for (const auto& g : groups) {
    if (g.members.empty()) throw DataError("rank: empty edit group");
    for (std::size_t m : g.members) {
      if (m >= set.size()) throw DataError("rank: group member index out of range");
      if (seen[m]) throw DataError("rank: groups overlap at edit " + std::to_string(m));
      seen[m] = true;
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw DataError("rank: groups do not cover edit " + std::to_string(i));
}

std::vector<Edit> edits_of(const EditSet& set, const std::vector<std::size_t>& members) {
  std::vector<Edit> out;
  out.reserve(members.size());
  for (std::size_t m : members) out.push_back(set.edits[m]);
  return out;
}

std::size_t group_src_position(const EditSet& set, const EditGroup& g) {
  std::size_t best = set.edits[g.members.front()].src_span.begin;
  for (std::size_t m : g.members) best = std::min(best, set.edits[m].src_span.begin);
  return best;
}

std::vector<std::size_t> flatten_rank(std::size_t k, const std::vector<ScoredGroup>& ordered) {
  std::vector<std::size_t> rank(k, 0);
  for (std::size_t pos = 0; pos < ordered.size(); ++pos)
    for (std::size_t m : ordered[pos].group.members) rank[m] = pos;
  return rank;
}

}  // namespace

double delta_leave_one_out(const FluencyScorer& scorer, const Sentence& source,
                           const EditSet& set, const EditGroup& g) {
  std::set<std::size_t> held(g.members.begin(), g.members.end());
  for (std::size_t m : held)
    if (m >= set.size()) throw DataError("delta_leave_one_out: group member out of range");
  std::vector<Edit> rest;
  std::vector<Edit> all;
  for (std::size_t i = 0; i < set.size(); ++i) {
    all.push_back(set.edits[i]);
    if (!held.count(i)) rest.push_back(set.edits[i]);
  }
  return scorer.disfluency(apply_edits(source, rest)) -
         scorer.disfluency(apply_edits(source, all));
}

RankedOutput rank_ours(const FluencyScorer& scorer, const Sentence& source, const EditSet& set,
                       const std::vector<EditGroup>& groups) {
  check_partition(set, groups);
  RankedOutput out;
  std::vector<std::size_t> remaining(groups.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::vector<Edit> applied;
  double current = scorer.disfluency(source);
  while (!remaining.empty()) {
    std::size_t best_pick = 0;
    double best_delta = 0.0;
    bool first = true;
    for (std::size_t idx = 0; idx < remaining.size(); ++idx) {
      const EditGroup& g = groups[remaining[idx]];
      std::vector<Edit> candidate = applied;
      const auto extra = edits_of(set, g.members);
      candidate.insert(candidate.end(), extra.begin(), extra.end());
      const double delta = current - scorer.disfluency(apply_edits(source, candidate));
      bool better = false;
      if (first) {
        better = true;
      } else if (delta > best_delta) {
        better = true;
      } else if (delta == best_delta) {
        const EditGroup& cur = groups[remaining[best_pick]];
        const std::size_t pos_g = group_src_position(set, g);
        const std::size_t pos_cur = group_src_position(set, cur);
        if (pos_g != pos_cur) {
          better = pos_g < pos_cur;
        } else if (g.members.size() != cur.members.size()) {
          better = g.members.size() < cur.members.size();
        } else {
          better = g.members.front() < cur.members.front();
        }
      }
      if (better) {
        best_pick = idx;
        best_delta = delta;
        first = false;
      }
    }
    const EditGroup& chosen = groups[remaining[best_pick]];
    out.ordered_groups.push_back({chosen, best_delta});
    const auto extra = edits_of(set, chosen.members);
    applied.insert(applied.end(), extra.begin(), extra.end());
    current = scorer.disfluency(apply_edits(source, applied));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pick));
  }
  out.edit_rank = flatten_rank(set.size(), out.ordered_groups);
  return out;
}

RankedOutput rank_vanilla(const FluencyScorer& scorer, const Sentence& source,
                          const EditSet& set) {
  std::vector<ScoredGroup> scored;
  for (std::size_t i = 0; i < set.size(); ++i) {
    EditGroup g;
    g.members = {i};
    scored.push_back({g, delta_leave_one_out(scorer, source, set, g)});
  }
  std::sort(scored.begin(), scored.end(), [&](const ScoredGroup& a, const ScoredGroup& b) {
    if (a.delta != b.delta) return a.delta > b.delta;
    const std::size_t pa = set.edits[a.group.members.front()].src_span.begin;
    const std::size_t pb = set.edits[b.group.members.front()].src_span.begin;
    if (pa != pb) return pa < pb;
    return a.group.members.front() < b.group.members.front();
  });
  RankedOutput out;
  out.ordered_groups = std::move(scored);
  out.edit_rank = flatten_rank(set.size(), out.ordered_groups);
  return out;
}

RankedOutput rank_greedy(const FluencyScorer& scorer, const Sentence& source, const EditSet& set) {
  return rank_ours(scorer, source, set, singleton_groups(set.size()));
}

RankedOutput rank_random(const EditSet& set, std::uint64_t seed) {
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  RankedOutput out;
  for (std::size_t i : order) {
    EditGroup g;
    g.members = {i};
    out.ordered_groups.push_back({g, 0.0});
  }
  out.edit_rank = flatten_rank(set.size(), out.ordered_groups);
  return out;
}

std::vector<double> fluency_curve(const FluencyScorer& scorer, const Sentence& source,
                                  const EditSet& set, const RankedOutput& ranked) {
  std::vector<double> curve;
  std::vector<Edit> applied;
  curve.push_back(scorer.disfluency(source));
  for (const auto& sg : ranked.ordered_groups) {
    const auto extra = edits_of(set, sg.group.members);
    applied.insert(applied.end(), extra.begin(), extra.end());
    curve.push_back(scorer.disfluency(apply_edits(source, applied)));
  }
  return curve;
}

void write_ranked(const std::string& path, const std::vector<RankedPair>& ranked) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ranked file: " + path);
  for (const auto& entry : ranked) {
    nlohmann::json obj;
    obj["id"] = entry.id;
    obj["ranker"] = entry.ranker;
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& sg : entry.output.ordered_groups)
      groups.push_back({{"members", sg.group.members}, {"delta", sg.delta}});
    obj["groups"] = std::move(groups);
    obj["edit_rank"] = entry.output.edit_rank;
    obj["curve"] = entry.curve;
    out << obj.dump() << "\n";
  }
}

std::vector<RankedPair> load_ranked(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ranked file: " + path);
  std::vector<RankedPair> result;
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
    RankedPair entry;
    entry.id = obj.at("id").get<std::string>();
    entry.ranker = obj.at("ranker").get<std::string>();
    for (const auto& g : obj.at("groups")) {
      ScoredGroup sg;
      sg.group.members = g.at("members").get<std::vector<std::size_t>>();
      sg.delta = g.at("delta").get<double>();
      entry.output.ordered_groups.push_back(std::move(sg));
    }
    entry.output.edit_rank = obj.at("edit_rank").get<std::vector<std::size_t>>();
    if (obj.contains("curve")) entry.curve = obj["curve"].get<std::vector<double>>();
    result.push_back(std::move(entry));
  }
  return result;
}

}  // namespace editimpact
