#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "cfgm/neighbours.hpp"

namespace cfgm {

enum class SymmetrizeMode { Or, And };

std::string to_string(SymmetrizeMode mode);
SymmetrizeMode symmetrize_mode_from_string(const std::string& s);

/// Undirected edge, stored with u < v.
struct Edge {
  int u = 0, v = 0;
  friend bool operator<(const Edge& a, const Edge& b) {
    return a.u < b.u || (a.u == b.u && a.v < b.v);
  }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.u == b.u && a.v == b.v;
  }
};

/// Sorted, duplicate-free set of undirected edges.
struct EdgeSet {
  std::vector<Edge> edges;

  bool contains(int u, int v) const;
  static EdgeSet from_pairs(const std::vector<std::pair<int, int>>& pairs);
};

struct WeightedEdge {
  int u = 0, v = 0;
  double weight = 0.0;
  bool emergent = false;  // zero baseline block on every selected direction
};

/// Per-covariate symmetric edge sets with differential-edge weights.
struct ConditionalGraphs {
  int p = 0;
  SymmetrizeMode mode = SymmetrizeMode::Or;
  std::vector<EdgeSet> edge_sets;                   // c = 0..q
  std::vector<std::vector<WeightedEdge>> weights;   // c >= 1 (index 0 empty)
};

/// OR/AND symmetrization of the node-wise neighbour sets for covariate c.
EdgeSet symmetrize(const std::vector<NodeResult>& results, SymmetrizeMode mode,
                   int c);

/// Edge weights for a differential graph (c >= 1): the available relative
/// effect for one-sided selections, the geometric mean for mutual ones.
std::vector<WeightedEdge> edge_weights(const std::vector<NodeResult>& results,
                                       const EdgeSet& edges, int c);

/// Group-specific graph for a binary covariate c: thresholds
/// ||B0_k + Bc_k||_F at each node's selected epsilon, then symmetrizes.
/// The c = 0 graph itself plays the role of the reference-group graph.
EdgeSet group_graph(const std::vector<NodeResult>& results,
                    const CovariateDesign& X, int c, SymmetrizeMode mode);

/// Symmetric adjacency matrix with zero diagonal; binary by default,
/// weight-valued when weights are given.
Eigen::MatrixXd to_adjacency(const EdgeSet& graph, int p);
Eigen::MatrixXd to_adjacency(const std::vector<WeightedEdge>& graph, int p);

/// Assemble all per-covariate graphs from the node results.
ConditionalGraphs build_graphs(const std::vector<NodeResult>& results, int p,
                               SymmetrizeMode mode);

/// Graph JSON: {p, mode, covariate, edges: [{u, v, weight?, emergent?}]}.
/// Infinite weights are serialized as the string "inf" with emergent=true.
nlohmann::json graph_to_json(const EdgeSet& edges, int p, SymmetrizeMode mode,
                             int covariate);
nlohmann::json graph_to_json(const std::vector<WeightedEdge>& edges, int p,
                             SymmetrizeMode mode, int covariate);
EdgeSet edge_set_from_json(const nlohmann::json& j);

/// Adjacency CSV with a header row of node ids.
void write_adjacency_csv(const Eigen::MatrixXd& adjacency,
                         const std::vector<std::string>& node_ids,
                         const std::string& path);

}  // namespace cfgm
