#include "editimpact/edits.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

std::string edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::Insert: return "insert";
    case EditOp::Delete: return "delete";
    default: return "substitute";
  }
}

EditOp parse_edit_op(const std::string& name) {
  if (name == "insert") return EditOp::Insert;
  if (name == "delete") return EditOp::Delete;
  if (name == "substitute") return EditOp::Substitute;
  throw DataError("unknown edit op \"" + name + "\"");
}

namespace {

enum class Step : unsigned char { Match, Substitute, Delete, Insert };

std::string join_range(const std::vector<std::string>& tokens, Span span,
                       const std::string& joiner) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) out += joiner;
    out += tokens[i];
  }
  return out;
}

// Inverse of joining tokens with the language joiner: split on single spaces
// for Latin scripts, one codepoint per token for Chinese. Unlike tokenize()
// this never splits inside a token, so edit texts round-trip exactly.
std::vector<std::string> split_by_joiner(const std::string& text, Language lang) {
  std::vector<std::string> tokens;
  if (lang == Language::Zh) {
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t start = i;
      unsigned char c = static_cast<unsigned char>(text[i]);
      std::size_t len = 1;
      if ((c & 0xe0) == 0xc0) len = 2;
      else if ((c & 0xf0) == 0xe0) len = 3;
      else if ((c & 0xf8) == 0xf0) len = 4;
      if (i + len > text.size()) len = 1;
      i += len;
      tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
  }
  std::string current;
  for (char c : text) {
    if (c == ' ') {
      if (!current.empty()) tokens.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

}  // namespace

EditSet extract_edits(const Sentence& source, const Sentence& target) {
  const auto& src = source.tokens;
  const auto& tgt = target.tokens;
  const std::size_t n = src.size();
  const std::size_t m = tgt.size();

  // Classic DP table; sizes here are sentence-scale so the full table is fine.
  std::vector<std::vector<unsigned>> dist(n + 1, std::vector<unsigned>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) dist[i][0] = static_cast<unsigned>(i);
  for (std::size_t j = 0; j <= m; ++j) dist[0][j] = static_cast<unsigned>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const unsigned del = dist[i - 1][j] + 1;
      const unsigned ins = dist[i][j - 1] + 1;
      const unsigned diag = dist[i - 1][j - 1] + (src[i - 1] == tgt[j - 1] ? 0 : 1);
      dist[i][j] = std::min(diag, std::min(del, ins));
    }
  }

  // Backtrace with the fixed preference order match > substitute > delete >
  // insert on cost ties; steps come out reversed.
  std::vector<Step> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && src[i - 1] == tgt[j - 1] && dist[i][j] == dist[i - 1][j - 1]) {
      steps.push_back(Step::Match);
      --i;
      --j;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      steps.push_back(Step::Substitute);
      --i;
      --j;
    } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
      steps.push_back(Step::Delete);
      --i;
    } else {
      steps.push_back(Step::Insert);
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());

  const std::string joiner = language_joiner(source.language);
  EditSet set;
  std::size_t si = 0, ti = 0;
  std::size_t k = 0;
  while (k < steps.size()) {
    if (steps[k] == Step::Match) {
      ++si;
      ++ti;
      ++k;
      continue;
    }
    // Collapse the maximal run of non-match steps into one atomic edit.
    Edit edit;
    edit.src_span = {si, si};
    edit.tgt_span = {ti, ti};
    while (k < steps.size() && steps[k] != Step::Match) {
      switch (steps[k]) {
        case Step::Substitute: ++si; ++ti; break;
        case Step::Delete: ++si; break;
        case Step::Insert: ++ti; break;
        default: break;
      }
      ++k;
    }
    edit.src_span.end = si;
    edit.tgt_span.end = ti;
    if (edit.src_span.empty())
      edit.op = EditOp::Insert;
    else if (edit.tgt_span.empty())
      edit.op = EditOp::Delete;
    else
      edit.op = EditOp::Substitute;
    edit.src_text = join_range(src, edit.src_span, joiner);
    edit.tgt_text = join_range(tgt, edit.tgt_span, joiner);
    set.edits.push_back(std::move(edit));
  }
  return set;
}

Sentence apply_edits(const Sentence& source, const std::vector<Edit>& subset) {
  const std::size_t n = source.tokens.size();
  for (const auto& e : subset) {
    if (e.src_span.begin > e.src_span.end || e.src_span.end > n)
      throw DataError("apply_edits: source span [" + std::to_string(e.src_span.begin) + ", " +
                      std::to_string(e.src_span.end) + ") exceeds source length " +
                      std::to_string(n));
  }
  std::vector<Edit> ordered = subset;
  std::sort(ordered.begin(), ordered.end(), [](const Edit& a, const Edit& b) {
    if (a.src_span.begin != b.src_span.begin) return a.src_span.begin < b.src_span.begin;
    return a.src_span.end < b.src_span.end;
  });
  for (std::size_t idx = 1; idx < ordered.size(); ++idx) {
    const Span& a = ordered[idx - 1].src_span;
    const Span& b = ordered[idx].src_span;
    const bool intersect = std::max(a.begin, b.begin) < std::min(a.end, b.end);
    const bool duplicate_anchor = a.empty() && b.empty() && a.begin == b.begin;
    if (intersect || duplicate_anchor)
      throw DataError("apply_edits: overlapping edits at source position " +
                      std::to_string(b.begin));
  }

  Sentence result = source;
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    const Edit& e = *it;
    auto& tokens = result.tokens;
    const std::vector<std::string> replacement = split_by_joiner(e.tgt_text, source.language);
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(e.src_span.begin),
                 tokens.begin() + static_cast<std::ptrdiff_t>(e.src_span.end));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(e.src_span.begin),
                  replacement.begin(), replacement.end());
  }
  result.raw = result.joined();
  return result;
}

Sentence leave_one_out(const Sentence& source, const EditSet& set, const Edit& e) {
  std::vector<Edit> rest;
  bool found = false;
  for (const auto& other : set.edits) {
    if (!found && other == e) {
      found = true;
      continue;
    }
    rest.push_back(other);
  }
  if (!found) throw DataError("leave_one_out: edit not in set");
  return apply_edits(source, rest);
}

void write_edits(const std::string& path, const std::vector<ExtractedPair>& extracted) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edits file: " + path);
  for (const auto& entry : extracted) {
    nlohmann::json obj;
    obj["id"] = entry.id;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entry.edits.edits) {
      arr.push_back({{"op", edit_op_name(e.op)},
                     {"src_span", {e.src_span.begin, e.src_span.end}},
                     {"tgt_span", {e.tgt_span.begin, e.tgt_span.end}},
                     {"src_text", e.src_text},
                     {"tgt_text", e.tgt_text}});
    }
    obj["edits"] = std::move(arr);
    out << obj.dump() << "\n";
  }
}

std::vector<ExtractedPair> load_edits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edits file: " + path);
  std::vector<ExtractedPair> result;
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
    ExtractedPair entry;
    entry.id = obj.at("id").get<std::string>();
    for (const auto& je : obj.at("edits")) {
      Edit e;
      e.op = parse_edit_op(je.at("op").get<std::string>());
      e.src_span = {je.at("src_span")[0].get<std::size_t>(), je.at("src_span")[1].get<std::size_t>()};
      e.tgt_span = {je.at("tgt_span")[0].get<std::size_t>(), je.at("tgt_span")[1].get<std::size_t>()};
      e.src_text = je.at("src_text").get<std::string>();
      e.tgt_text = je.at("tgt_text").get<std::string>();
      entry.edits.edits.push_back(std::move(e));
    }
    result.push_back(std::move(entry));
  }
  return result;
}

}  // namespace editimpact
