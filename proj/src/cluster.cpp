#include "bregtree/cluster.hpp"

#include <cmath>

namespace bregtree {

StatVec StatisticMap::mean(std::span<const Datum> points) const {
  if (points.empty()) throw UsageError("statistic map: empty point set");
  std::vector<double> acc(stat_dim_, 0.0);
  for (const Datum& x : points) {
    const StatVec s = (*this)(x);
    for (std::size_t i = 0; i < stat_dim_; ++i) acc[i] += s[i];
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  for (double& v : acc) v *= inv;
  return StatVec(std::move(acc));
}

namespace {

class IdentityMap final : public StatisticMap {
 public:
  explicit IdentityMap(std::size_t dim) : StatisticMap(dim, dim) {}

 protected:
  StatVec map_impl(const Datum& x) const override { return StatVec(x); }
};

class GaussianMomentMap final : public StatisticMap {
 public:
  GaussianMomentMap(std::size_t dim, bool diagonal)
      : StatisticMap(dim, diagonal ? 2 * dim : dim + dim * dim),
        diagonal_(diagonal) {}

 protected:
  StatVec map_impl(const Datum& x) const override {
    const std::size_t d = data_dim();
    std::vector<double> s(stat_dim());
    for (std::size_t i = 0; i < d; ++i) s[i] = x[i];
    if (diagonal_) {
      for (std::size_t i = 0; i < d; ++i) s[d + i] = x[i] * x[i];
    } else {
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s[d + i * d + j] = x[i] * x[j];
    }
    return StatVec(std::move(s));
  }

 private:
  bool diagonal_;
};

class MultinomialFrequencyMap final : public StatisticMap {
 public:
  explicit MultinomialFrequencyMap(std::size_t vocab)
      : StatisticMap(vocab, vocab) {}

 protected:
  StatVec map_impl(const Datum& x) const override {
    double total = 0.0;
    for (double c : x) {
      if (c < 0.0) throw UsageError("word counts must be nonnegative");
      total += c;
    }
    if (!(total > 0.0)) throw UsageError("document has no words");
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] / total;
    return StatVec(std::move(s));
  }
};

}  // namespace

std::shared_ptr<const StatisticMap> identity_map(std::size_t dim) {
  if (dim < 1) throw UsageError("identity_map: dimension must be >= 1");
  return std::make_shared<IdentityMap>(dim);
}

std::shared_ptr<const StatisticMap> gaussian_moment_map(std::size_t dim,
                                                        bool diagonal) {
  if (dim < 1) throw UsageError("gaussian_moment_map: dimension must be >= 1");
  return std::make_shared<GaussianMomentMap>(dim, diagonal);
}

std::shared_ptr<const StatisticMap> multinomial_frequency_map(std::size_t vocab) {
  if (vocab < 1) throw UsageError("multinomial_frequency_map: empty vocabulary");
  return std::make_shared<MultinomialFrequencyMap>(vocab);
}

ClusterSummary summarize(const StatisticMap& map, std::span<const Datum> points,
                         const Smoother& smoother, int id) {
  if (points.empty()) throw UsageError("summarize: empty cluster");
  ClusterSummary s;
  s.id = id;
  s.size = static_cast<std::int64_t>(points.size());
  s.stat = smoother.apply(map.mean(points));
  return s;
}

ClusterSummary merge_summaries(const ClusterSummary& a, const ClusterSummary& b,
                               int new_id) {
  if (a.size < 1 || b.size < 1) {
    throw UsageError("merge_summaries: cluster sizes must be >= 1");
  }
  ClusterSummary m;
  m.id = new_id;
  m.size = a.size + b.size;
  m.stat = weighted_mean(a.stat, static_cast<double>(a.size), b.stat,
                         static_cast<double>(b.size));
  return m;
}

double cluster_cost(const DivergenceModel& model, const StatisticMap& map,
                    std::span<const Datum> points, const Smoother& smoother) {
  if (points.empty()) throw UsageError("cluster_cost: empty cluster");
  const StatVec center = smoother.apply(map.mean(points));
  double acc = 0.0;
  for (const Datum& x : points) {
    const double b = model.divergence(smoother.apply(map(x)), center);
    if (std::isinf(b)) return kInfiniteDivergence;
    acc += b;
  }
  return acc;
}

double merge_cost(const DivergenceModel& model, const ClusterSummary& a,
                  const ClusterSummary& b) {
  const ClusterSummary merged = merge_summaries(a, b);
  const double da = model.divergence(a.stat, merged.stat);
  if (std::isinf(da)) return kInfiniteDivergence;
  const double db = model.divergence(b.stat, merged.stat);
  if (std::isinf(db)) return kInfiniteDivergence;
  return static_cast<double>(a.size) * da + static_cast<double>(b.size) * db;
}

double merge_cost_direct(const DivergenceModel& model, const StatisticMap& map,
                         std::span<const Datum> c1, std::span<const Datum> c2,
                         const Smoother& smoother) {
  if (c1.empty() || c2.empty()) {
    throw UsageError("merge_cost_direct: empty cluster");
  }
  std::vector<Datum> both(c1.begin(), c1.end());
  both.insert(both.end(), c2.begin(), c2.end());
  const double whole = cluster_cost(model, map, both, smoother);
  if (std::isinf(whole)) return kInfiniteDivergence;
  const double p1 = cluster_cost(model, map, c1, smoother);
  const double p2 = cluster_cost(model, map, c2, smoother);
  if (std::isinf(p1) || std::isinf(p2)) return kInfiniteDivergence;
  return whole - p1 - p2;
}

}  // namespace bregtree
