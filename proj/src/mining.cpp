#include "editimpact/mining.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

std::string normalize_item_text(const std::string& text, Language lang) {
  if (lang == Language::Zh) return text;
  std::string out = text;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string item_key(const Edit& edit, Language lang) {
  switch (edit.op) {
    case EditOp::Insert: return "+" + normalize_item_text(edit.tgt_text, lang);
    case EditOp::Delete: return "-" + normalize_item_text(edit.src_text, lang);
    default: return "~" + normalize_item_text(edit.tgt_text, lang);
  }
}

MiningConfig MiningConfig::for_language(Language lang) {
  MiningConfig config;
  if (lang == Language::Es) config.min_item_freq = 3;
  return config;
}

std::vector<Transaction> build_transactions(const Corpus& corpus) {
  std::vector<Transaction> transactions;
  transactions.reserve(corpus.size());
  for (const auto& pair : corpus) {
    Transaction t;
    const EditSet set = extract_edits(pair.source, pair.target);
    for (const auto& e : set.edits) t.insert(item_key(e, pair.language));
    transactions.push_back(std::move(t));
  }
  return transactions;
}

namespace {

std::vector<std::string> codepoints_of(const std::string& s) {
  std::vector<std::string> cps;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0xe0) == 0xc0) len = 2;
    else if ((c & 0xf0) == 0xe0) len = 3;
    else if ((c & 0xf8) == 0xf0) len = 4;
    if (i + len > s.size()) len = 1;
    i += len;
    cps.push_back(s.substr(start, i - start));
  }
  return cps;
}

std::string key_text(const std::string& key) {
  return key.empty() ? key : key.substr(1);
}

}  // namespace

double text_similarity(const std::string& a, const std::string& b) {
  if (a == b) return 1.0;
  const auto cp_a = codepoints_of(a);
  const auto cp_b = codepoints_of(b);
  std::set<std::string> set_a, set_b;
  if (cp_a.size() >= 2 && cp_b.size() >= 2) {
    for (std::size_t i = 0; i + 1 < cp_a.size(); ++i) set_a.insert(cp_a[i] + cp_a[i + 1]);
    for (std::size_t i = 0; i + 1 < cp_b.size(); ++i) set_b.insert(cp_b[i] + cp_b[i + 1]);
  } else {
    set_a.insert(cp_a.begin(), cp_a.end());
    set_b.insert(cp_b.begin(), cp_b.end());
  }
  if (set_a.empty() && set_b.empty()) return 1.0;
  std::size_t intersection = 0;
  for (const auto& x : set_a) intersection += set_b.count(x);
  const std::size_t unions = set_a.size() + set_b.size() - intersection;
  if (unions == 0) return 1.0;
  return static_cast<double>(intersection) / static_cast<double>(unions);
}

MinedAssociations mine_pairs(const std::vector<Transaction>& transactions,
                             const MiningConfig& config) {
  if (transactions.empty()) throw DataError("mine_pairs: empty transaction list");

  std::map<std::string, std::size_t> item_count;
  for (const auto& t : transactions)
    for (const auto& item : t) ++item_count[item];

  MinedAssociations mined;
  mined.transaction_count = transactions.size();
  std::set<std::string> frequent;
  for (const auto& [item, count] : item_count) {
    if (count >= config.min_item_freq) {
      frequent.insert(item);
      mined.frequent_items.push_back(item);
    }
  }

  // Co-occurrence counting over candidate pairs of frequent items, one pass
  // per transaction.
  std::map<std::pair<std::string, std::string>, std::size_t> co_count;
  for (const auto& t : transactions) {
    std::vector<std::string> present;
    for (const auto& item : t)
      if (frequent.count(item)) present.push_back(item);
    for (std::size_t i = 0; i < present.size(); ++i)
      for (std::size_t j = i + 1; j < present.size(); ++j)
        ++co_count[{present[i], present[j]}];
  }
  for (const auto& [pair, count] : co_count) {
    (void)count;
    mined.cooccurring.insert(pair);
  }

  const double total = static_cast<double>(transactions.size());
  for (const auto& [pair, co] : co_count) {
    if (co < config.min_cooccurrence) continue;
    const std::size_t count_a = item_count[pair.first];
    const std::size_t count_b = item_count[pair.second];
    PairStats stats;
    stats.co_count = co;
    stats.count_a = count_a;
    stats.count_b = count_b;
    stats.jaccard = static_cast<double>(co) /
                    static_cast<double>(count_a + count_b - co);
    stats.confidence = std::max(static_cast<double>(co) / static_cast<double>(count_a),
                                static_cast<double>(co) / static_cast<double>(count_b));
    stats.lift = static_cast<double>(co) * total /
                 (static_cast<double>(count_a) * static_cast<double>(count_b));
    if (stats.jaccard <= config.min_pair_jaccard) continue;
    if (stats.confidence <= config.min_confidence) continue;
    if (stats.lift <= config.min_lift) continue;
    if (text_similarity(key_text(pair.first), key_text(pair.second)) >=
        config.word_jaccard_filter)
      continue;
    mined.rules.push_back({pair.first, pair.second, stats});
  }

  std::sort(mined.rules.begin(), mined.rules.end(),
            [](const AssociationRule& a, const AssociationRule& b) {
              if (a.stats.jaccard != b.stats.jaccard) return a.stats.jaccard > b.stats.jaccard;
              if (a.item_a != b.item_a) return a.item_a < b.item_a;
              return a.item_b < b.item_b;
            });
  return mined;
}

void write_mined(const std::string& path, const MinedAssociations& mined) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write associations file: " + path);
  for (const auto& rule : mined.rules) {
    nlohmann::json obj;
    obj["item_a"] = rule.item_a;
    obj["item_b"] = rule.item_b;
    obj["co_count"] = rule.stats.co_count;
    obj["count_a"] = rule.stats.count_a;
    obj["count_b"] = rule.stats.count_b;
    obj["jaccard"] = rule.stats.jaccard;
    obj["confidence"] = rule.stats.confidence;
    obj["lift"] = rule.stats.lift;
    out << obj.dump() << "\n";
  }
}

std::vector<AssociationRule> load_mined(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open associations file: " + path);
  std::vector<AssociationRule> rules;
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
    AssociationRule rule;
    rule.item_a = obj.at("item_a").get<std::string>();
    rule.item_b = obj.at("item_b").get<std::string>();
    rule.stats.co_count = obj.at("co_count").get<std::size_t>();
    rule.stats.count_a = obj.at("count_a").get<std::size_t>();
    rule.stats.count_b = obj.at("count_b").get<std::size_t>();
    rule.stats.jaccard = obj.at("jaccard").get<double>();
    rule.stats.confidence = obj.at("confidence").get<double>();
    rule.stats.lift = obj.at("lift").get<double>();
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace editimpact
