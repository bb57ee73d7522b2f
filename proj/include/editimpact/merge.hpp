#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "editimpact/assoc.hpp"
#include "editimpact/corpus.hpp"
#include "editimpact/edits.hpp"
#include "editimpact/embed.hpp"

namespace editimpact {

struct MergeConfig {
  double tau = 0.60;
  std::size_t delta_seq = 8;
  std::size_t delta_dep = 2;

  // German uses a stricter threshold and a wider sequence window; unknown
  // languages fall back to the English row.
  static MergeConfig for_language(Language lang);
};

// A connected component of the per-sentence association graph; groups
// partition the edit set.
struct EditGroup {
  std::vector<std::size_t> members;  // sorted edit indices
};

struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

struct EditGraph {
  std::size_t node_count = 0;
  std::vector<WeightedEdge> edges;
  std::vector<std::string> warnings;
};

// Gap in target token positions between the nearest span boundaries;
// adjacent or overlapping spans give 0. Empty spans anchor at their position.
std::size_t seq_distance(const Edit& a, const Edit& b);

// Minimum undirected shortest-path hop count in the dependency tree over all
// token pairs drawn from the two edits' target spans (anchor position for
// empty spans). Throws DataError when a span token lies outside the tree.
std::size_t dep_distance(const Edit& a, const Edit& b, const DependencyTree& tree);

using PairProbability = std::function<double(std::size_t, std::size_t)>;

// Edge (i,j) iff probability > tau, sequence distance <= delta_seq, and,
// when a tree is present, dependency distance <= delta_dep. Without a tree
// the dependency constraint is skipped and a warning recorded.
EditGraph build_graph(const EditSet& set, const PairProbability& prob, const MergeConfig& config,
                      const DependencyTree* tree);

// Convenience overload wiring the trained classifier and an embedding
// provider (item keys are embedded and MRL-truncated to the model dimension).
EditGraph build_graph(const EditSet& set, Language lang, const AssociationClassifier& model,
                      EmbeddingProvider& provider, const MergeConfig& config,
                      const DependencyTree* tree);

// Deterministic: groups ordered by smallest member index.
std::vector<EditGroup> connected_components(const EditGraph& graph);

// All-singleton partition (the unmerged baselines).
std::vector<EditGroup> singleton_groups(std::size_t k);

extern const std::set<std::string> kDefaultDisplacyLabels;

// Merges edits whose target tokens share a direct head-child link whose
// child relation label is in label_set.
std::vector<EditGroup> displacy_merge(const EditSet& set, const DependencyTree& tree,
                                      const std::set<std::string>& label_set);

// DOT rendering of a per-sentence graph, nodes labeled with edit texts and
// edges with the association probability (3 decimals).
std::string graph_to_dot(const EditSet& set, const EditGraph& graph, const std::string& name);

// Corpus-level view: top-N mined associations as a DOT graph.
std::string associations_to_dot(const std::vector<AssociationRule>& rules, std::size_t top_n);

struct MergedPair {
  std::string id;
  std::vector<EditGroup> groups;
  std::vector<std::string> warnings;
};

void write_merged(const std::string& path, const std::vector<MergedPair>& merged);
std::vector<MergedPair> load_merged(const std::string& path);

}  // namespace editimpact
