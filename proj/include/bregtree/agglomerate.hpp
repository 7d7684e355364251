#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bregtree/cluster.hpp"

namespace bregtree {

// Node of the binary merge tree. Leaves carry the original datum index as
// their id (0..m-1); internal nodes are numbered by creation order
// (m..2m-2) and record the merge cost and execution order (1..m-1).
struct DendrogramNode {
  int id = -1;
  int left = -1;
  int right = -1;
  int parent = -1;
  int merge_order = 0;   // 0 for leaves
  double merge_cost = 0.0;
  ClusterSummary summary;
};

class Dendrogram {
 public:
  // Takes ownership of a complete, creation-ordered node list. Verifies the
  // tree shape: m leaves, m-1 internal nodes, one root, children precede
  // parents, and merged summaries equal the merge of their children.
  explicit Dendrogram(std::vector<DendrogramNode> nodes);

  std::size_t leaf_count() const { return (nodes_.size() + 1) / 2; }
  int root() const { return root_; }
  const DendrogramNode& node(int id) const { return nodes_.at(id); }
  const std::vector<DendrogramNode>& nodes() const { return nodes_; }

  // Original indices of the leaves under a node, ascending.
  std::vector<int> leaves_under(int id) const;

 private:
  std::vector<DendrogramNode> nodes_;
  int root_ = -1;
};

// A candidate pair in the merge frontier; ordered by (cost, a, b) with
// +infinity after every finite cost. Ids satisfy a < b.
struct MergeCandidate {
  double cost = 0.0;
  int a = -1;
  int b = -1;

  friend bool operator<(const MergeCandidate& x, const MergeCandidate& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  }
};

enum class Strategy {
  Brute,  // O(m) space, O(m^3) cost evaluations, no caching
  Heap,   // O(m^2) space, lazily invalidated min-heap of cached costs
};

// Instrumentation for the complexity and degeneracy checks.
struct RunStats {
  std::int64_t cost_evaluations = 0;
  std::int64_t infinite_costs = 0;
  std::int64_t heap_pushes = 0;
  std::int64_t heap_peak = 0;
};

// Algorithm: start from singletons, repeatedly merge the pair with minimal
// (cost, a, b); both strategies produce the identical tree. An all-infinite
// frontier merges by id order and never aborts. Throws UsageError for empty
// input. threads > 1 evaluates cost batches concurrently; results are
// committed in deterministic order first.
Dendrogram agglomerate(std::span<const Datum> data, const DivergenceModel& model,
                       const StatisticMap& map, const Smoother& smoother,
                       Strategy strategy, int threads = 1,
                       RunStats* stats = nullptr);

// The k clusters obtained by undoing the last k-1 merges, sorted by node id.
std::vector<ClusterSummary> cut(const Dendrogram& tree, std::size_t k);

}  // namespace bregtree
