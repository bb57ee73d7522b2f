#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace editimpact {

enum class Language { En, Zh, De, Es, Other };

// Parses a tag like "en"; unknown tags map to Other (caller decides whether
// to warn).
Language parse_language(const std::string& tag);
std::string language_tag(Language lang);

// Token joiner used when realizing a token sequence as text: "" for Chinese,
// " " otherwise.
std::string language_joiner(Language lang);

struct Sentence {
  std::vector<std::string> tokens;
  Language language = Language::En;
  std::string raw;

  std::string joined() const;
  bool operator==(const Sentence&) const = default;
};

struct SentencePair {
  std::string id;
  Sentence source;
  Sentence target;
  Language language = Language::En;
};

using Corpus = std::vector<SentencePair>;

// CoNLL-U conventions: heads are 1-based, 0 marks the root.
struct DependencyTree {
  std::vector<int> head;
  std::vector<std::string> relation;

  std::size_t size() const { return head.size(); }
};

using ParseMap = std::map<std::string, DependencyTree>;

struct CorpusStats {
  std::size_t sentence_count = 0;
  double avg_len = 0.0;
  double avg_edits = 0.0;
};

// Whitespace-and-punctuation split for Latin scripts, one token per
// non-whitespace codepoint for Chinese. Deterministic; empty text gives an
// empty token list.
Sentence tokenize(const std::string& text, Language lang);

struct LoadResult {
  Corpus pairs;
  std::vector<std::string> warnings;
};

// JSON Lines, one object per line: {"id","source","target","lang"}.
// Throws DataError naming the line on malformed input or duplicate ids;
// unknown language tags are accepted as "other" with a warning.
LoadResult load_pairs(const std::string& path);

void write_pairs(const std::string& path, const Corpus& corpus);

// Sentences keyed by "# sent_id = <id>" comments; multiword-token and
// empty-node lines are skipped. Rejects cycles, multiple roots and
// out-of-range heads, naming the sentence id.
ParseMap load_conllu(const std::string& path);

// Validates the single-root acyclic invariant; throws DataError mentioning
// `id` on violation.
void validate_tree(const DependencyTree& tree, const std::string& id);

using EditCounter = std::function<std::size_t(const SentencePair&)>;

// Keeps exactly the pairs whose extracted edit set has >= n edits.
Corpus filter_min_edits(const Corpus& corpus, const EditCounter& count_edits,
                        std::size_t n = 3);

CorpusStats corpus_stats(const Corpus& corpus, const EditCounter& count_edits);

}  // namespace editimpact
