#include "editimpact/merge.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "editimpact/errors.hpp"

namespace editimpact {

MergeConfig MergeConfig::for_language(Language lang) {
  MergeConfig config;
  if (lang == Language::De) {
    config.tau = 0.75;
    config.delta_seq = 12;
  }
  return config;
}

std::size_t seq_distance(const Edit& a, const Edit& b) {
  const Span& sa = a.tgt_span;
  const Span& sb = b.tgt_span;
  if (sa.end <= sb.begin) return sb.begin - sa.end;
  if (sb.end <= sa.begin) return sa.begin - sb.end;
  return 0;
}

namespace {

std::vector<std::size_t> anchor_tokens(const Edit& e, std::size_t tree_size,
                                       bool* out_of_range) {
  std::vector<std::size_t> tokens;
  if (e.tgt_span.empty()) {
    // A deletion has no target tokens; anchor at its position, clamped to the
    // last token for end-of-sentence deletions.
    std::size_t anchor = e.tgt_span.begin;
    if (anchor >= tree_size) anchor = tree_size - 1;
    tokens.push_back(anchor);
    return tokens;
  }
  for (std::size_t i = e.tgt_span.begin; i < e.tgt_span.end; ++i) {
    if (i >= tree_size) {
      *out_of_range = true;
      return tokens;
    }
    tokens.push_back(i);
  }
  return tokens;
}

std::vector<std::vector<std::size_t>> adjacency_of(const DependencyTree& tree) {
  std::vector<std::vector<std::size_t>> adj(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const int head = tree.head[i];
    if (head == 0) continue;
    const std::size_t h = static_cast<std::size_t>(head - 1);
    adj[i].push_back(h);
    adj[h].push_back(i);
  }
  return adj;
}

}  // namespace

std::size_t dep_distance(const Edit& a, const Edit& b, const DependencyTree& tree) {
  if (tree.size() == 0) throw DataError("dep_distance: empty tree");
  bool out_of_range = false;
  const auto tokens_a = anchor_tokens(a, tree.size(), &out_of_range);
  const auto tokens_b = anchor_tokens(b, tree.size(), &out_of_range);
  if (out_of_range) throw DataError("dep_distance: edit token index outside tree");

  const auto adj = adjacency_of(tree);
  std::size_t best = tree.size();
  for (std::size_t start : tokens_a) {
    // BFS from each token of edit a.
    std::vector<std::size_t> dist(tree.size(), tree.size());
    std::deque<std::size_t> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adj[u]) {
        if (dist[v] > dist[u] + 1) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t t : tokens_b) best = std::min(best, dist[t]);
  }
  return best;
}

EditGraph build_graph(const EditSet& set, const PairProbability& prob, const MergeConfig& config,
                      const DependencyTree* tree) {
  EditGraph graph;
  graph.node_count = set.size();
  if (tree == nullptr && set.size() > 1)
    graph.warnings.push_back("no dependency parse; dependency constraint skipped");
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      const double r = prob(i, j);
      if (r <= config.tau) continue;
      if (seq_distance(set.edits[i], set.edits[j]) > config.delta_seq) continue;
      if (tree != nullptr &&
          dep_distance(set.edits[i], set.edits[j], *tree) > config.delta_dep)
        continue;
      graph.edges.push_back({i, j, r});
    }
  }
  return graph;
}

EditGraph build_graph(const EditSet& set, Language lang, const AssociationClassifier& model,
                      EmbeddingProvider& provider, const MergeConfig& config,
                      const DependencyTree* tree) {
  const std::size_t d = model.embedding_dim();
  if (provider.dim() < d)
    throw DataError("build_graph: provider dimension " + std::to_string(provider.dim()) +
                    " below model embedding dimension " + std::to_string(d));
  std::vector<Vector> vectors;
  vectors.reserve(set.size());
  for (const auto& e : set.edits)
    vectors.push_back(truncate_mrl(provider.embed(item_key(e, lang)), d));
  return build_graph(
      set, [&](std::size_t i, std::size_t j) { return predict(model, vectors[i], vectors[j]); },
      config, tree);
}

std::vector<EditGroup> connected_components(const EditGraph& graph) {
  std::vector<std::vector<std::size_t>> adj(graph.node_count);
  for (const auto& e : graph.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<bool> visited(graph.node_count, false);
  std::vector<EditGroup> groups;
  for (std::size_t start = 0; start < graph.node_count; ++start) {
    if (visited[start]) continue;
    EditGroup group;
    std::deque<std::size_t> queue{start};
    visited[start] = true;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      group.members.push_back(u);
      for (std::size_t v : adj[u]) {
        if (!visited[v]) {
          visited[v] = true;
          queue.push_back(v);
        }
      }
    }
    std::sort(group.members.begin(), group.members.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<EditGroup> singleton_groups(std::size_t k) {
  std::vector<EditGroup> groups(k);
  for (std::size_t i = 0; i < k; ++i) groups[i].members = {i};
  return groups;
}

const std::set<std::string> kDefaultDisplacyLabels = {
    "aux", "cop", "prt", "compound:prt", "case", "mark", "det"};

std::vector<EditGroup> displacy_merge(const EditSet& set, const DependencyTree& tree,
                                      const std::set<std::string>& label_set) {
  EditGraph graph;
  graph.node_count = set.size();
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      bool linked = false;
      // Merge iff some token of one edit heads a token of the other and the
      // child's relation label is in the configured set. Empty spans carry
      // no tokens and never merge.
      for (std::size_t u = set.edits[i].tgt_span.begin;
           !linked && u < set.edits[i].tgt_span.end; ++u) {
        for (std::size_t v = set.edits[j].tgt_span.begin;
             !linked && v < set.edits[j].tgt_span.end; ++v) {
          if (u >= tree.size() || v >= tree.size())
            throw DataError("displacy_merge: edit token index outside tree");
          const bool u_heads_v = tree.head[v] == static_cast<int>(u + 1) &&
                                 label_set.count(tree.relation[v]) > 0;
          const bool v_heads_u = tree.head[u] == static_cast<int>(v + 1) &&
                                 label_set.count(tree.relation[u]) > 0;
          linked = u_heads_v || v_heads_u;
        }
      }
      if (linked) graph.edges.push_back({i, j, 1.0});
    }
  }
  return connected_components(graph);
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string format_weight(double w) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << w;
  return os.str();
}

}  // namespace

std::string graph_to_dot(const EditSet& set, const EditGraph& graph, const std::string& name) {
  std::ostringstream os;
  os << "graph \"" << dot_escape(name) << "\" {\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Edit& e = set.edits[i];
    os << "  n" << i << " [label=\"" << dot_escape(e.src_text) << " -> "
       << dot_escape(e.tgt_text) << "\"];\n";
  }
  for (const auto& edge : graph.edges) {
    os << "  n" << edge.a << " -- n" << edge.b << " [label=\"" << format_weight(edge.weight)
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string associations_to_dot(const std::vector<AssociationRule>& rules, std::size_t top_n) {
  std::ostringstream os;
  os << "graph associations {\n";
  std::set<std::string> nodes;
  const std::size_t n = std::min(top_n, rules.size());
  for (std::size_t i = 0; i < n; ++i) {
    nodes.insert(rules[i].item_a);
    nodes.insert(rules[i].item_b);
  }
  std::map<std::string, std::size_t> index;
  for (const auto& node : nodes) {
    const std::size_t id = index.size();
    index[node] = id;
    os << "  n" << id << " [label=\"" << dot_escape(node) << "\"];\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    os << "  n" << index[rules[i].item_a] << " -- n" << index[rules[i].item_b] << " [label=\""
       << format_weight(rules[i].stats.jaccard) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

void write_merged(const std::string& path, const std::vector<MergedPair>& merged) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write merge file: " + path);
  for (const auto& entry : merged) {
    nlohmann::json obj;
    obj["id"] = entry.id;
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : entry.groups) groups.push_back(g.members);
    obj["groups"] = std::move(groups);
    obj["warnings"] = entry.warnings;
    out << obj.dump() << "\n";
  }
}

std::vector<MergedPair> load_merged(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open merge file: " + path);
  std::vector<MergedPair> result;
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
    MergedPair entry;
    entry.id = obj.at("id").get<std::string>();
    for (const auto& g : obj.at("groups")) {
      EditGroup group;
      group.members = g.get<std::vector<std::size_t>>();
      entry.groups.push_back(std::move(group));
    }
    if (obj.contains("warnings")) entry.warnings = obj["warnings"].get<std::vector<std::string>>();
    result.push_back(std::move(entry));
  }
  return result;
}

}  // namespace editimpact
