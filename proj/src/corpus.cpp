#include "editimpact/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

Language parse_language(const std::string& tag) {
  if (tag == "en") return Language::En;
  if (tag == "zh") return Language::Zh;
  if (tag == "de") return Language::De;
  if (tag == "es") return Language::Es;
  return Language::Other;
}

std::string language_tag(Language lang) {
  switch (lang) {
    case Language::En: return "en";
    case Language::Zh: return "zh";
    case Language::De: return "de";
    case Language::Es: return "es";
    default: return "other";
  }
}

std::string language_joiner(Language lang) {
  return lang == Language::Zh ? "" : " ";
}

std::string Sentence::joined() const {
  const std::string joiner = language_joiner(language);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += joiner;
    out += tokens[i];
  }
  return out;
}

namespace {

// Decodes one UTF-8 codepoint starting at `i`; advances `i`. Invalid bytes
// are consumed one at a time so tokenization never stalls.
std::string next_codepoint(const std::string& s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if ((c & 0x80) == 0x00) len = 1;
  else if ((c & 0xe0) == 0xc0) len = 2;
  else if ((c & 0xf0) == 0xe0) len = 3;
  else if ((c & 0xf8) == 0xf0) len = 4;
  if (i + len > s.size()) len = 1;
  std::string cp = s.substr(i, len);
  i += len;
  return cp;
}

bool is_space_cp(const std::string& cp) {
  if (cp.size() == 1) {
    unsigned char c = static_cast<unsigned char>(cp[0]);
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
  return cp == "\xe3\x80\x80";  // ideographic space
}

bool is_ascii_punct_cp(const std::string& cp) {
  return cp.size() == 1 && std::ispunct(static_cast<unsigned char>(cp[0]));
}

}  // namespace

Sentence tokenize(const std::string& text, Language lang) {
  Sentence s;
  s.language = lang;
  s.raw = text;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::string cp = next_codepoint(text, i);
    if (is_space_cp(cp)) {
      if (!current.empty()) {
        s.tokens.push_back(current);
        current.clear();
      }
      continue;
    }
    if (lang == Language::Zh) {
      s.tokens.push_back(cp);
      continue;
    }
    if (is_ascii_punct_cp(cp)) {
      if (!current.empty()) {
        s.tokens.push_back(current);
        current.clear();
      }
      s.tokens.push_back(cp);
      continue;
    }
    current += cp;
  }
  if (!current.empty()) s.tokens.push_back(current);
  return s;
}

LoadResult load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pair file: " + path);
  LoadResult result;
  std::set<std::string> seen;
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
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("source") ||
        !obj.contains("target") || !obj.contains("lang") || !obj["id"].is_string() ||
        !obj["source"].is_string() || !obj["target"].is_string() || !obj["lang"].is_string()) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": record must have string fields id, source, target, lang");
    }
    SentencePair pair;
    pair.id = obj["id"].get<std::string>();
    if (!seen.insert(pair.id).second) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id \"" + pair.id + "\"");
    }
    const std::string tag = obj["lang"].get<std::string>();
    pair.language = parse_language(tag);
    if (pair.language == Language::Other && tag != "other") {
      result.warnings.push_back("line " + std::to_string(lineno) + ": unknown language tag \"" +
                                tag + "\" for id \"" + pair.id + "\", treated as other");
    }
    pair.source = tokenize(obj["source"].get<std::string>(), pair.language);
    pair.target = tokenize(obj["target"].get<std::string>(), pair.language);
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

void write_pairs(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pair file: " + path);
  for (const auto& pair : corpus) {
    nlohmann::json obj;
    obj["id"] = pair.id;
    obj["source"] = pair.source.raw;
    obj["target"] = pair.target.raw;
    obj["lang"] = language_tag(pair.language);
    out << obj.dump() << "\n";
  }
}

void validate_tree(const DependencyTree& tree, const std::string& id) {
  const int n = static_cast<int>(tree.size());
  int roots = 0;
  for (int h : tree.head) {
    if (h < 0 || h > n)
      throw DataError("sentence \"" + id + "\": head index " + std::to_string(h) + " out of range");
    if (h == 0) ++roots;
  }
  if (n > 0 && roots != 1)
    throw DataError("sentence \"" + id + "\": expected exactly one root, found " +
                    std::to_string(roots));
  // Follow head chains; every token must reach the root without revisiting.
  for (int start = 1; start <= n; ++start) {
    int cur = start;
    int steps = 0;
    while (cur != 0) {
      cur = tree.head[cur - 1];
      if (++steps > n)
        throw DataError("sentence \"" + id + "\": cycle detected in dependency heads");
    }
  }
}

namespace {

bool id_column_is_plain(const std::string& id_col) {
  if (id_col.empty()) return false;
  for (char c : id_col) {
    if (c == '-' || c == '.') return false;  // multiword token / empty node
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

ParseMap load_conllu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CoNLL-U file: " + path);
  ParseMap parses;
  std::string line;
  std::string sent_id;
  DependencyTree tree;

  auto flush = [&]() {
    if (tree.size() == 0) {
      sent_id.clear();
      return;
    }
    if (sent_id.empty()) throw DataError(path + ": sentence block without a sent_id comment");
    validate_tree(tree, sent_id);
    parses[sent_id] = tree;
    tree = DependencyTree{};
    sent_id.clear();
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string key = "# sent_id";
      if (line.rfind(key, 0) == 0) {
        auto eq = line.find('=');
        if (eq != std::string::npos) {
          std::size_t begin = eq + 1;
          while (begin < line.size() && line[begin] == ' ') ++begin;
          std::size_t end = line.size();
          while (end > begin && line[end - 1] == ' ') --end;
          sent_id = line.substr(begin, end - begin);
        }
      }
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 8)
      throw DataError(path + ": sentence \"" + sent_id + "\": expected >= 8 tab-separated columns");
    if (!id_column_is_plain(cols[0])) continue;
    int head = 0;
    try {
      head = std::stoi(cols[6]);
    } catch (const std::exception&) {
      throw DataError(path + ": sentence \"" + sent_id + "\": bad head column \"" + cols[6] + "\"");
    }
    tree.head.push_back(head);
    tree.relation.push_back(cols[7]);
  }
  flush();
  return parses;
}

Corpus filter_min_edits(const Corpus& corpus, const EditCounter& count_edits, std::size_t n) {
  Corpus kept;
  for (const auto& pair : corpus) {
    if (count_edits(pair) >= n) kept.push_back(pair);
  }
  return kept;
}

CorpusStats corpus_stats(const Corpus& corpus, const EditCounter& count_edits) {
  if (corpus.empty()) throw DataError("corpus_stats: empty corpus");
  CorpusStats stats;
  stats.sentence_count = corpus.size();
  double len_sum = 0.0;
  double edit_sum = 0.0;
  for (const auto& pair : corpus) {
    len_sum += static_cast<double>(pair.target.tokens.size());
    edit_sum += static_cast<double>(count_edits(pair));
  }
  stats.avg_len = len_sum / static_cast<double>(corpus.size());
  stats.avg_edits = edit_sum / static_cast<double>(corpus.size());
  return stats;
}

}  // namespace editimpact
