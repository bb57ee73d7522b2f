#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "editimpact/corpus.hpp"

namespace editimpact {

enum class EditOp { Insert, Delete, Substitute };

std::string edit_op_name(EditOp op);
EditOp parse_edit_op(const std::string& name);

// Half-open token interval [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool operator==(const Span&) const = default;
};

// One atomic edit: Insert has an empty source span, Delete an empty target
// span, Substitute neither.
struct Edit {
  EditOp op = EditOp::Substitute;
  Span src_span;
  Span tgt_span;
  std::string src_text;
  std::string tgt_text;

  bool operator==(const Edit&) const = default;
};

// Edits sorted by source span start (ties by target span start); spans are
// pairwise non-overlapping on both sides and in the same order.
struct EditSet {
  std::vector<Edit> edits;

  std::size_t size() const { return edits.size(); }
};

// Token-level minimum-edit-distance alignment with unit costs. On cost ties
// the backtrace prefers match > substitute > delete > insert, so the result
// is deterministic. Maximal contiguous runs of non-match operations collapse
// into one atomic edit. Applying the full set to source reproduces target.
EditSet extract_edits(const Sentence& source, const Sentence& target);

// Applies a subset of edits drawn from one EditSet extracted against this
// source, right-to-left so earlier indices stay valid. Throws DataError on
// out-of-range spans or overlapping subset members.
Sentence apply_edits(const Sentence& source, const std::vector<Edit>& subset);

// apply_edits(source, set \ {e}); throws DataError if e is not in the set.
Sentence leave_one_out(const Sentence& source, const EditSet& set, const Edit& e);

// JSON Lines, one object per pair:
// {"id","edits":[{"op","src_span","tgt_span","src_text","tgt_text"}]}.
struct ExtractedPair {
  std::string id;
  EditSet edits;
};

void write_edits(const std::string& path, const std::vector<ExtractedPair>& extracted);
std::vector<ExtractedPair> load_edits(const std::string& path);

}  // namespace editimpact
