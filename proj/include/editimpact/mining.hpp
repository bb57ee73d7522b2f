#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "editimpact/corpus.hpp"
#include "editimpact/edits.hpp"

namespace editimpact {

// Canonical string for one edit: op marker "+" / "-" / "~" prefixed to the
// normalized target text (source text for deletions). Latin scripts are
// lowercased (ASCII range).
std::string item_key(const Edit& edit, Language lang);

std::string normalize_item_text(const std::string& text, Language lang);

// The distinct item keys of one sentence pair.
using Transaction = std::set<std::string>;

struct PairStats {
  std::size_t co_count = 0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  double jaccard = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

struct AssociationRule {
  std::string item_a;  // item_a < item_b lexicographically
  std::string item_b;
  PairStats stats;
};

struct MiningConfig {
  std::size_t min_item_freq = 5;  // 3 for Spanish
  std::size_t min_cooccurrence = 2;
  double min_confidence = 0.1;
  double min_lift = 1.1;
  double min_pair_jaccard = 0.01;
  double word_jaccard_filter = 0.6;

  static MiningConfig for_language(Language lang);
};

struct MinedAssociations {
  std::vector<AssociationRule> rules;  // sorted by jaccard desc, then keys
  std::vector<std::string> frequent_items;
  // Every unordered pair of frequent items that co-occurs at least once;
  // negative sampling excludes these.
  std::set<std::pair<std::string, std::string>> cooccurring;
  std::size_t transaction_count = 0;
};

// One transaction per pair, in corpus order. Pairs with no edits yield empty
// transactions; they still count toward |T|.
std::vector<Transaction> build_transactions(const Corpus& corpus);

// Frequent items (count >= min_item_freq) generate candidate unordered
// pairs; a pair is accepted iff co_count >= min_cooccurrence, jaccard >
// min_pair_jaccard, confidence > min_confidence, lift > min_lift, and the
// character-bigram Jaccard similarity of the two key texts is below
// word_jaccard_filter. Throws DataError on an empty transaction list.
MinedAssociations mine_pairs(const std::vector<Transaction>& transactions,
                             const MiningConfig& config);

// Near-duplicate measure behind word_jaccard_filter: Jaccard similarity of
// character-bigram sets (codepoint sets for texts shorter than two
// codepoints); identical texts score 1.
double text_similarity(const std::string& a, const std::string& b);

void write_mined(const std::string& path, const MinedAssociations& mined);
std::vector<AssociationRule> load_mined(const std::string& path);

}  // namespace editimpact
