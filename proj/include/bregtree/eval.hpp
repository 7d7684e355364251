#pragma once

#include <string>
#include <vector>

#include "bregtree/agglomerate.hpp"

namespace bregtree {

// Categorical label per datum, aligned with leaf ids.
struct LabeledDataset {
  std::vector<std::string> labels;
};

// Mean, over all unordered same-label pairs, of the label's fraction in the
// smallest tree cluster containing both points. Exact: every pair counts,
// no subsampling. Throws UsageError if labels and leaves disagree in count,
// UndefinedMetricError when no same-label pair exists.
double dendrogram_purity(const Dendrogram& tree, const LabeledDataset& labels);

// Features of a datum against the top-k clusters (the cut at k, ascending
// node id): feature i is the merge cost of adjoining {x} to cluster i.
std::vector<double> tree_features(const Dendrogram& tree, std::size_t k,
                                  const Datum& x, const DivergenceModel& model,
                                  const StatisticMap& map,
                                  const Smoother& smoother);

}  // namespace bregtree
