#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bregtree/divergence.hpp"
#include "bregtree/smoothing.hpp"
#include "bregtree/statvec.hpp"

namespace bregtree {

// Raw datum: a Euclidean point, or a dense word-count vector for text.
using Datum = std::vector<double>;

// Maps data into statistic space; overloaded to finite sets by averaging.
// Smoothing composes on top of these (both smoothing constructions are
// affine, so per-datum smoothing and smoothing of the mean coincide).
class StatisticMap {
 public:
  virtual ~StatisticMap() = default;

  std::size_t data_dim() const { return data_dim_; }
  std::size_t stat_dim() const { return stat_dim_; }

  StatVec operator()(const Datum& x) const {
    if (x.size() != data_dim_) {
      throw UsageError("statistic map: datum has dimension " +
                       std::to_string(x.size()) + ", expected " +
                       std::to_string(data_dim_));
    }
    return map_impl(x);
  }

  // tau(C) = |C|^-1 sum_x tau(x)
  StatVec mean(std::span<const Datum> points) const;

 protected:
  StatisticMap(std::size_t data_dim, std::size_t stat_dim)
      : data_dim_(data_dim), stat_dim_(stat_dim) {}

  virtual StatVec map_impl(const Datum& x) const = 0;

 private:
  std::size_t data_dim_;
  std::size_t stat_dim_;
};

// tau(x) = x.
std::shared_ptr<const StatisticMap> identity_map(std::size_t dim);

// tau(x) = (x, x x^T) flattened, or (x, x.^2) for the diagonal variant.
std::shared_ptr<const StatisticMap> gaussian_moment_map(std::size_t dim,
                                                        bool diagonal);

// Word counts -> frequencies: tau(doc) = counts / total. Rejects negative
// counts and empty documents.
std::shared_ptr<const StatisticMap> multinomial_frequency_map(std::size_t vocab);

// The only per-cluster state the merge loop needs: an id, the member count,
// and the (smoothed) mean statistic.
struct ClusterSummary {
  int id = -1;
  std::int64_t size = 0;
  StatVec stat;
};

// Summary of a point set under the given map and smoother. Throws UsageError
// on empty input.
ClusterSummary summarize(const StatisticMap& map, std::span<const Datum> points,
                         const Smoother& smoother, int id = -1);

// Size-weighted mean of the parts; the caller assigns the fresh id.
ClusterSummary merge_summaries(const ClusterSummary& a, const ClusterSummary& b,
                               int new_id = -1);

// phi(C) = sum_x B(tau(x), tau(C)). +infinity when the center is degenerate;
// never NaN. O(|C|); used by oracles and evaluation, not the merge loop.
double cluster_cost(const DivergenceModel& model, const StatisticMap& map,
                    std::span<const Datum> points, const Smoother& smoother);

// Merge cost from summaries alone:
//   delta = |a| B(a.stat, merged) + |b| B(b.stat, merged).
double merge_cost(const DivergenceModel& model, const ClusterSummary& a,
                  const ClusterSummary& b);

// Brute-force merge cost phi(C1 u C2) - phi(C1) - phi(C2); the independent
// recomputation the summary-based rule is checked against.
double merge_cost_direct(const DivergenceModel& model, const StatisticMap& map,
                         std::span<const Datum> c1, std::span<const Datum> c2,
                         const Smoother& smoother);

}  // namespace bregtree
