#include "cfgm/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace cfgm {

std::string to_string(SymmetrizeMode mode) {
  return mode == SymmetrizeMode::Or ? "OR" : "AND";
}

SymmetrizeMode symmetrize_mode_from_string(const std::string& s) {
  if (s == "OR" || s == "or") return SymmetrizeMode::Or;
  if (s == "AND" || s == "and") return SymmetrizeMode::And;
  throw std::invalid_argument("graphs: unknown symmetrization mode '" + s + "'");
}

bool EdgeSet::contains(int u, int v) const {
  Edge e{std::min(u, v), std::max(u, v)};
  return std::binary_search(edges.begin(), edges.end(), e);
}

EdgeSet EdgeSet::from_pairs(const std::vector<std::pair<int, int>>& pairs) {
  std::set<Edge> set;
  for (auto [u, v] : pairs) {
    if (u == v) throw std::invalid_argument("graphs: self-loop edge");
    set.insert({std::min(u, v), std::max(u, v)});
  }
  EdgeSet out;
  out.edges.assign(set.begin(), set.end());
  return out;
}

namespace {

void check_results(const std::vector<NodeResult>& results, int c) {
  for (size_t j = 0; j < results.size(); ++j)
    if (results[j].node != static_cast<int>(j))
      throw std::runtime_error("graphs: node result missing or out of order at " +
                               std::to_string(j));
  if (!results.empty()) {
    const int q = results[0].coef.q;
    if (c < 0 || c > q)
      throw std::invalid_argument("graphs: covariate index out of range");
  }
}

bool selects(const NodeResult& r, int c, int k) {
  const auto& v = r.neighbours.per_covariate[c];
  return std::binary_search(v.begin(), v.end(), k);
}

}  // namespace

EdgeSet symmetrize(const std::vector<NodeResult>& results, SymmetrizeMode mode,
                   int c) {
  check_results(results, c);
  const int p = static_cast<int>(results.size());
  EdgeSet out;
  for (int j = 0; j < p; ++j)
    for (int l = j + 1; l < p; ++l) {
      const bool jl = selects(results[j], c, l);
      const bool lj = selects(results[l], c, j);
      const bool keep = mode == SymmetrizeMode::Or ? (jl || lj) : (jl && lj);
      if (keep) out.edges.push_back({j, l});
    }
  return out;
}

std::vector<WeightedEdge> edge_weights(const std::vector<NodeResult>& results,
                                       const EdgeSet& edges, int c) {
  check_results(results, c);
  if (c < 1)
    throw std::invalid_argument("graphs: weights are defined for c >= 1");
  std::vector<WeightedEdge> out;
  out.reserve(edges.edges.size());
  for (const Edge& e : edges.edges) {
    // Eff^c_{kj} lives in node j's result under key k.
    const bool in_j = selects(results[e.u], c, e.v);  // v in N_u
    const bool in_l = selects(results[e.v], c, e.u);  // u in N_v
    if (!in_j && !in_l)
      throw std::runtime_error("graphs: edge not selected in either direction");
    WeightedEdge we{e.u, e.v, 0.0, false};
    const double inf = std::numeric_limits<double>::infinity();
    double eff_u = in_j ? results[e.u].effects[c].at(e.v) : 0.0;
    double eff_v = in_l ? results[e.v].effects[c].at(e.u) : 0.0;
    if (in_j && in_l) {
      if (std::isinf(eff_u) || std::isinf(eff_v)) {
        we.weight = inf;
        we.emergent = true;
      } else {
        we.weight = std::sqrt(eff_u * eff_v);
      }
    } else {
      const double eff = in_j ? eff_u : eff_v;
      we.weight = eff;
      we.emergent = std::isinf(eff);
    }
    out.push_back(we);
  }
  return out;
}

EdgeSet group_graph(const std::vector<NodeResult>& results,
                    const CovariateDesign& X, int c, SymmetrizeMode mode) {
  check_results(results, c);
  if (c < 1 || c >= static_cast<int>(X.columns.size()) ||
      X.columns[c].kind != CovariateColumn::Kind::Dummy)
    throw std::invalid_argument(
        "graphs: group graphs are defined for binary (dummy) covariates only");

  const int p = static_cast<int>(results.size());
  // Group-1 neighbour sets: ||B0_k + Bc_k||_F > epsilon_j per node.
  std::vector<std::vector<int>> sets(p);
  for (int j = 0; j < p; ++j) {
    const auto& coef = results[j].coef;
    for (int r = 0; r < coef.p - 1; ++r) {
      const double norm = (coef.block(0, r) + coef.block(c, r)).norm();
      if (norm > results[j].epsilon) sets[j].push_back(coef.regressors[r]);
    }
  }
  EdgeSet out;
  for (int j = 0; j < p; ++j)
    for (int l = j + 1; l < p; ++l) {
      const bool jl = std::binary_search(sets[j].begin(), sets[j].end(), l);
      const bool lj = std::binary_search(sets[l].begin(), sets[l].end(), j);
      const bool keep = mode == SymmetrizeMode::Or ? (jl || lj) : (jl && lj);
      if (keep) out.edges.push_back({j, l});
    }
  return out;
}

Eigen::MatrixXd to_adjacency(const EdgeSet& graph, int p) {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(p, p);
  for (const Edge& e : graph.edges) {
    if (e.u < 0 || e.v >= p)
      throw std::invalid_argument("graphs: edge outside node range");
    adj(e.u, e.v) = adj(e.v, e.u) = 1.0;
  }
  return adj;
}

Eigen::MatrixXd to_adjacency(const std::vector<WeightedEdge>& graph, int p) {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(p, p);
  for (const WeightedEdge& e : graph) {
    if (e.u < 0 || e.v >= p)
      throw std::invalid_argument("graphs: edge outside node range");
    adj(e.u, e.v) = adj(e.v, e.u) = e.weight;
  }
  return adj;
}

ConditionalGraphs build_graphs(const std::vector<NodeResult>& results, int p,
                               SymmetrizeMode mode) {
  if (static_cast<int>(results.size()) != p)
    throw std::invalid_argument("graphs: expected one result per node");
  const int q = results.empty() ? 0 : results[0].coef.q;
  ConditionalGraphs graphs;
  graphs.p = p;
  graphs.mode = mode;
  graphs.edge_sets.resize(q + 1);
  graphs.weights.resize(q + 1);
  for (int c = 0; c <= q; ++c) {
    graphs.edge_sets[c] = symmetrize(results, mode, c);
    if (c >= 1) graphs.weights[c] = edge_weights(results, graphs.edge_sets[c], c);
  }
  return graphs;
}

nlohmann::json graph_to_json(const EdgeSet& edges, int p, SymmetrizeMode mode,
                             int covariate) {
  nlohmann::json j;
  j["p"] = p;
  j["mode"] = to_string(mode);
  j["covariate"] = covariate;
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : edges.edges)
    j["edges"].push_back({{"u", e.u}, {"v", e.v}});
  return j;
}

nlohmann::json graph_to_json(const std::vector<WeightedEdge>& edges, int p,
                             SymmetrizeMode mode, int covariate) {
  nlohmann::json j;
  j["p"] = p;
  j["mode"] = to_string(mode);
  j["covariate"] = covariate;
  j["edges"] = nlohmann::json::array();
  for (const WeightedEdge& e : edges) {
    nlohmann::json je{{"u", e.u}, {"v", e.v}};
    if (e.emergent || std::isinf(e.weight)) {
      je["weight"] = "inf";
      je["emergent"] = true;
    } else {
      je["weight"] = e.weight;
      je["emergent"] = false;
    }
    j["edges"].push_back(je);
  }
  return j;
}

EdgeSet edge_set_from_json(const nlohmann::json& j) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& je : j.at("edges"))
    pairs.emplace_back(je.at("u").get<int>(), je.at("v").get<int>());
  return EdgeSet::from_pairs(pairs);
}

void write_adjacency_csv(const Eigen::MatrixXd& adjacency,
                         const std::vector<std::string>& node_ids,
                         const std::string& path) {
  const int p = static_cast<int>(adjacency.rows());
  if (static_cast<int>(node_ids.size()) != p)
    throw std::invalid_argument("graphs: node id count does not match matrix");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("graphs: cannot write " + path);
  for (int j = 0; j < p; ++j) out << (j ? "," : "") << node_ids[j];
  out << '\n';
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j)
      out << (j ? "," : "") << format_double(adjacency(i, j));
    out << '\n';
  }
}

}  // namespace cfgm
