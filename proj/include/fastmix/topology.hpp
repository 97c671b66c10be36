#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace fastmix {

struct Edge {
  int i;
  int j;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One entry of a node's adjacency list: the neighbouring node and the index
/// of the connecting edge in the topology's edge list.
struct Incidence {
  int neighbor;
  int edge;
};

/// Undirected simple graph over nodes 0..N-1. The edge order is preserved as
/// given and fixes the layout of every coupling/statistic vector.
class GraphTopology {
 public:
  GraphTopology(int num_nodes, std::vector<Edge> edges);

  /// rows x cols lattice, nodes in row-major order; each node contributes its
  /// right edge, then its down edge.
  static GraphTopology grid(int rows, int cols);
  static GraphTopology chain(int num_nodes);

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  int max_degree() const noexcept { return max_degree_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const Incidence> neighbors(int node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }

 private:
  int num_nodes_;
  std::vector<Edge> edges_;
  int max_degree_ = 0;
  std::vector<int> offsets_;
  std::vector<Incidence> adjacency_;
};

/// Ising family over a topology. Sufficient statistics are the edge products
/// x_i x_j in edge-list order, followed by the spins x_i when fields are on.
struct IsingModel {
  GraphTopology graph;
  bool fields_enabled = false;

  Eigen::Index num_stats() const noexcept {
    return graph.num_edges() + (fields_enabled ? graph.num_nodes() : 0);
  }
  int num_nodes() const noexcept { return graph.num_nodes(); }
  int num_edges() const noexcept { return graph.num_edges(); }
};

/// Entries are exactly +1 or -1.
using SpinConfiguration = Eigen::VectorXi;

void check_configuration(const IsingModel& model, const SpinConfiguration& x);

}  // namespace fastmix
