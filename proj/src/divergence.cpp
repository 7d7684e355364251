#include "bregtree/divergence.hpp"

#include <cmath>

namespace bregtree {

namespace {

class SquaredEuclidean final : public DivergenceModel {
 public:
  explicit SquaredEuclidean(std::size_t dim)
      : DivergenceModel("squared-euclidean", dim) {}

  double value(const StatVec& x) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += x[i] * x[i];
    return s;
  }

  bool in_domain(const StatVec&) const override { return true; }
  bool in_relative_interior(const StatVec&) const override { return true; }

  bool has_conjugate() const override { return true; }
  double conjugate_value(const StatVec& g) const override {
    return value(g) / 4.0;
  }

 protected:
  double divergence_impl(const StatVec& x, const StatVec& y) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
    return s;
  }
};

class L1Norm final : public DivergenceModel {
 public:
  explicit L1Norm(std::size_t dim) : DivergenceModel("l1", dim) {}

  double value(const StatVec& x) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += std::abs(x[i]);
    return s;
  }

  bool in_domain(const StatVec&) const override { return true; }
  bool in_relative_interior(const StatVec&) const override { return true; }

 protected:
  double divergence_impl(const StatVec& x, const StatVec& y) const override {
    return l1_divergence(x, y);
  }
};

}  // namespace

std::shared_ptr<const DivergenceModel> squared_euclidean(std::size_t dim) {
  return std::make_shared<SquaredEuclidean>(dim);
}

std::shared_ptr<const DivergenceModel> l1_model(std::size_t dim) {
  return std::make_shared<L1Norm>(dim);
}

double l1_divergence(const StatVec& x, const StatVec& y) {
  require_same_dim(x, y, "l1_divergence");
  double s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    // x*y = 0 falls in the "otherwise" branch; 2|x| is then 0 iff x is 0.
    if (!(x[i] * y[i] > 0.0)) s += 2.0 * std::abs(x[i]);
  }
  return s;
}

double gordon_divergence(const DivergenceModel& model, const StatVec& x,
                         const StatVec& g) {
  require_same_dim(x, g, "gordon_divergence");
  if (!model.has_conjugate()) {
    throw UnsupportedOperationError(model.name() +
                                    ": Gordon divergence needs a conjugate");
  }
  return model.value(x) + model.conjugate_value(g) - dot(g, x);
}

}  // namespace bregtree
