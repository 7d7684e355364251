#include "bregtree/eval.hpp"

#include <map>
#include <span>

namespace bregtree {

double dendrogram_purity(const Dendrogram& tree, const LabeledDataset& labels) {
  const std::size_t m = tree.leaf_count();
  if (labels.labels.size() != m) {
    throw UsageError("dendrogram_purity: expected one label per leaf");
  }
  std::map<std::string, int> index;
  for (const std::string& l : labels.labels) {
    index.emplace(l, static_cast<int>(index.size()));
  }
  const std::size_t n_labels = index.size();

  // Pairs with the same label l whose smallest common cluster is node v are
  // exactly (left-leaf, right-leaf) combinations below v; summing
  // count_l(left) * count_l(right) * frac_l(v) over internal nodes visits
  // every same-label pair once.
  std::vector<std::vector<double>> counts(tree.nodes().size());
  double weighted = 0.0;
  double pairs = 0.0;
  for (const DendrogramNode& node : tree.nodes()) {
    if (node.left < 0) {
      std::vector<double> c(n_labels, 0.0);
      c[index[labels.labels[node.id]]] = 1.0;
      counts[node.id] = std::move(c);
      continue;
    }
    const std::vector<double>& cl = counts[node.left];
    const std::vector<double>& cr = counts[node.right];
    std::vector<double> c(n_labels);
    const double size = static_cast<double>(node.summary.size);
    for (std::size_t l = 0; l < n_labels; ++l) {
      c[l] = cl[l] + cr[l];
      if (cl[l] > 0.0 && cr[l] > 0.0) {
        const double p = cl[l] * cr[l];
        pairs += p;
        weighted += p * (c[l] / size);
      }
    }
    counts[node.left].clear();
    counts[node.right].clear();
    counts[node.id] = std::move(c);
  }
  if (pairs == 0.0) {
    throw UndefinedMetricError(
        "dendrogram purity undefined: no two points share a label");
  }
  return weighted / pairs;
}

std::vector<double> tree_features(const Dendrogram& tree, std::size_t k,
                                  const Datum& x, const DivergenceModel& model,
                                  const StatisticMap& map,
                                  const Smoother& smoother) {
  const std::vector<ClusterSummary> clusters = cut(tree, k);
  const ClusterSummary point =
      summarize(map, std::span<const Datum>(&x, 1), smoother);
  std::vector<double> out;
  out.reserve(clusters.size());
  for (const ClusterSummary& c : clusters) {
    out.push_back(merge_cost(model, c, point));
  }
  return out;
}

}  // namespace bregtree
