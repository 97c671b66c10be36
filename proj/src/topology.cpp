#include "fastmix/topology.hpp"

#include "fastmix/error.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

namespace fastmix {

GraphTopology::GraphTopology(int num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  if (num_nodes_ < 1) throw InvalidInput("topology needs at least one node");

  std::set<std::pair<int, int>> seen;
  std::vector<int> degree(num_nodes_, 0);
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j >= num_nodes_ || e.i >= e.j)
      throw InvalidInput("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                         ") must satisfy 0 <= i < j < " + std::to_string(num_nodes_));
    if (!seen.emplace(e.i, e.j).second)
      throw InvalidInput("duplicate edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")");
    ++degree[e.i];
    ++degree[e.j];
  }
  max_degree_ = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());

  offsets_.assign(num_nodes_ + 1, 0);
  for (int n = 0; n < num_nodes_; ++n) offsets_[n + 1] = offsets_[n] + degree[n];
  adjacency_.resize(offsets_.back());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (int k = 0; k < num_edges(); ++k) {
    const Edge& e = edges_[k];
    adjacency_[fill[e.i]++] = {e.j, k};
    adjacency_[fill[e.j]++] = {e.i, k};
  }
}

GraphTopology GraphTopology::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidInput("grid dimensions must be positive");
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int node = r * cols + c;
      if (c + 1 < cols) edges.push_back({node, node + 1});
      if (r + 1 < rows) edges.push_back({node, node + cols});
    }
  }
  return GraphTopology(rows * cols, std::move(edges));
}

GraphTopology GraphTopology::chain(int num_nodes) {
  std::vector<Edge> edges;
  for (int n = 0; n + 1 < num_nodes; ++n) edges.push_back({n, n + 1});
  return GraphTopology(num_nodes, std::move(edges));
}

void check_configuration(const IsingModel& model, const SpinConfiguration& x) {
  if (x.size() != model.num_nodes())
    throw InvalidInput("configuration has " + std::to_string(x.size()) + " spins, model has " +
                       std::to_string(model.num_nodes()) + " nodes");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 1 && x[i] != -1) throw InvalidInput("spin " + std::to_string(i) + " is not +1/-1");
}

}  // namespace fastmix
