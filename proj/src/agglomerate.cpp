#include "bregtree/agglomerate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <thread>

namespace bregtree {

Dendrogram::Dendrogram(std::vector<DendrogramNode> nodes)
    : nodes_(std::move(nodes)) {
  if (nodes_.empty() || nodes_.size() % 2 == 0) {
    throw UsageError("dendrogram: node count must be odd (m leaves, m-1 merges)");
  }
  const std::size_t m = leaf_count();
  std::size_t roots = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const DendrogramNode& n = nodes_[i];
    if (n.id != static_cast<int>(i)) {
      throw UsageError("dendrogram: nodes must be stored in id order");
    }
    const bool leaf = i < m;
    if (leaf != (n.left < 0 && n.right < 0) || leaf != (n.merge_order == 0)) {
      throw UsageError("dendrogram: leaf/internal structure inconsistent");
    }
    if (n.parent < 0) {
      ++roots;
      root_ = n.id;
    }
    if (!leaf) {
      if (n.left >= n.id || n.right >= n.id || n.left == n.right ||
          n.left < 0 || n.right < 0) {
        throw UsageError("dendrogram: children must precede their parent");
      }
      for (int c : {n.left, n.right}) {
        if (nodes_[c].parent != n.id) {
          throw UsageError("dendrogram: child/parent links inconsistent");
        }
        if (nodes_[c].merge_order >= n.merge_order) {
          throw UsageError("dendrogram: merge order must increase toward root");
        }
      }
      const ClusterSummary remade =
          merge_summaries(nodes_[n.left].summary, nodes_[n.right].summary, n.id);
      if (remade.size != n.summary.size) {
        throw UsageError("dendrogram: merged size inconsistent");
      }
      require_same_dim(remade.stat, n.summary.stat, "dendrogram");
      for (std::size_t k = 0; k < remade.stat.dim(); ++k) {
        const double diff = std::abs(remade.stat[k] - n.summary.stat[k]);
        if (diff > 1e-9 * (1.0 + std::abs(remade.stat[k]))) {
          throw UsageError("dendrogram: merged summary is not the weighted mean");
        }
      }
    }
  }
  if (roots != 1) throw UsageError("dendrogram: exactly one root required");
  if (root_ != static_cast<int>(nodes_.size()) - 1) {
    throw UsageError("dendrogram: root must be the last created node");
  }
}

std::vector<int> Dendrogram::leaves_under(int id) const {
  std::vector<int> out;
  std::vector<int> stack{id};
  const int m = static_cast<int>(leaf_count());
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    const DendrogramNode& n = node(cur);
    if (cur < m) {
      out.push_back(cur);
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct CandidateGreater {
  bool operator()(const MergeCandidate& x, const MergeCandidate& y) const {
    return y < x;
  }
};

// Evaluates fn(i) for i in [0, n) with results committed by index; the
// thread count is a cap, work splits into contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Forest {
  std::vector<DendrogramNode> nodes;
  std::vector<int> alive;  // ascending ids

  void merge(int a, int b, double cost, int order) {
    const int id = static_cast<int>(nodes.size());
    DendrogramNode n;
    n.id = id;
    n.left = a;
    n.right = b;
    n.merge_order = order;
    n.merge_cost = cost;
    n.summary = merge_summaries(nodes[a].summary, nodes[b].summary, id);
    nodes[a].parent = id;
    nodes[b].parent = id;
    nodes.push_back(std::move(n));
    alive.erase(std::remove_if(alive.begin(), alive.end(),
                               [&](int c) { return c == a || c == b; }),
                alive.end());
    alive.push_back(id);
  }
};

void run_brute(const DivergenceModel& model, Forest& forest, RunStats& stats) {
  const int m = static_cast<int>(forest.nodes.size());  // leaves only so far
  for (int step = 1; step < m; ++step) {
    MergeCandidate best;
    bool first = true;
    for (std::size_t i = 0; i < forest.alive.size(); ++i) {
      for (std::size_t j = i + 1; j < forest.alive.size(); ++j) {
        const int a = forest.alive[i];
        const int b = forest.alive[j];
        const MergeCandidate cand{
            merge_cost(model, forest.nodes[a].summary, forest.nodes[b].summary),
            a, b};
        ++stats.cost_evaluations;
        if (std::isinf(cand.cost)) ++stats.infinite_costs;
        if (first || cand < best) {
          best = cand;
          first = false;
        }
      }
    }
    forest.merge(best.a, best.b, best.cost, step);
  }
}

void run_heap(const DivergenceModel& model, Forest& forest, RunStats& stats,
              int threads) {
  const int m = static_cast<int>(forest.nodes.size());
  std::vector<char> alive(2 * static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) alive[i] = 1;

  // All-pairs frontier; ids first (sequential), costs batched.
  const std::size_t total =
      static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
  std::vector<MergeCandidate> initial(total);
  std::size_t t = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      initial[t].a = i;
      initial[t].b = j;
      ++t;
    }
  }
  parallel_for(total, threads, [&](std::size_t idx) {
    MergeCandidate& c = initial[idx];
    c.cost = merge_cost(model, forest.nodes[c.a].summary,
                        forest.nodes[c.b].summary);
  });
  stats.cost_evaluations += static_cast<std::int64_t>(total);
  for (const MergeCandidate& c : initial) {
    if (std::isinf(c.cost)) ++stats.infinite_costs;
  }
  stats.heap_pushes += static_cast<std::int64_t>(total);

  std::priority_queue<MergeCandidate, std::vector<MergeCandidate>,
                      CandidateGreater>
      heap(CandidateGreater{}, std::move(initial));
  stats.heap_peak = std::max<std::int64_t>(
      stats.heap_peak, static_cast<std::int64_t>(heap.size()));

  std::vector<MergeCandidate> batch;
  for (int step = 1; step < m; ++step) {
    MergeCandidate best;
    while (true) {
      best = heap.top();
      heap.pop();
      if (alive[best.a] && alive[best.b]) break;  // lazy invalidation
    }
    alive[best.a] = 0;
    alive[best.b] = 0;
    forest.merge(best.a, best.b, best.cost, step);
    const int fresh = forest.nodes.back().id;

    batch.resize(forest.alive.size() - 1);  // survivors precede the new id
    parallel_for(batch.size(), threads, [&](std::size_t i) {
      const int other = forest.alive[i];
      batch[i] = MergeCandidate{merge_cost(model, forest.nodes[other].summary,
                                           forest.nodes[fresh].summary),
                                other, fresh};
    });
    for (const MergeCandidate& c : batch) {
      if (std::isinf(c.cost)) ++stats.infinite_costs;
      heap.push(c);
    }
    stats.cost_evaluations += static_cast<std::int64_t>(batch.size());
    stats.heap_pushes += static_cast<std::int64_t>(batch.size());
    stats.heap_peak = std::max<std::int64_t>(
        stats.heap_peak, static_cast<std::int64_t>(heap.size()));
    alive[fresh] = 1;
  }
}

}  // namespace

Dendrogram agglomerate(std::span<const Datum> data, const DivergenceModel& model,
                       const StatisticMap& map, const Smoother& smoother,
                       Strategy strategy, int threads, RunStats* stats) {
  if (data.empty()) throw UsageError("agglomerate: no data");
  if (map.stat_dim() != model.dim()) {
    throw UsageError("agglomerate: statistic map and model dimensions differ");
  }
  const int m = static_cast<int>(data.size());

  Forest forest;
  forest.nodes.reserve(2 * static_cast<std::size_t>(m) - 1);
  forest.alive.reserve(m);
  for (int i = 0; i < m; ++i) {
    DendrogramNode leaf;
    leaf.id = i;
    leaf.summary = summarize(map, data.subspan(i, 1), smoother, i);
    forest.nodes.push_back(std::move(leaf));
    forest.alive.push_back(i);
  }

  RunStats local;
  RunStats& s = stats ? *stats : local;
  if (m > 1) {
    if (strategy == Strategy::Brute) {
      run_brute(model, forest, s);
    } else {
      run_heap(model, forest, s, threads);
    }
  }
  return Dendrogram(std::move(forest.nodes));
}

std::vector<ClusterSummary> cut(const Dendrogram& tree, std::size_t k) {
  const std::size_t m = tree.leaf_count();
  if (k < 1 || k > m) {
    throw UsageError("cut: k must lie in [1, leaf count]");
  }
  // Undo the k-1 highest-order merges: repeatedly split the youngest node.
  std::vector<int> frontier{tree.root()};
  while (frontier.size() < k) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      if (tree.node(frontier[i]).merge_order >
          tree.node(frontier[pick]).merge_order) {
        pick = i;
      }
    }
    const DendrogramNode& n = tree.node(frontier[pick]);
    frontier[pick] = n.left;
    frontier.push_back(n.right);
  }
  std::sort(frontier.begin(), frontier.end());
  std::vector<ClusterSummary> out;
  out.reserve(frontier.size());
  for (int id : frontier) out.push_back(tree.node(id).summary);
  return out;
}

}  // namespace bregtree
