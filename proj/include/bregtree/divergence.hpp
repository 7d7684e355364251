#pragma once

#include <limits>
#include <memory>
#include <string>

#include "bregtree/statvec.hpp"

namespace bregtree {

constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

// A convex generator f together with its Bregman divergence
//   B_f(x, y) = f(x) - f(y) + f'(y; y - x),
// where f' is the one-sided directional derivative. Each model ships the
// divergence in closed form; the subgradient set is never materialized.
//
// Divergence values are extended reals: +infinity flags a second argument on
// the relative boundary of dom(f) (or a first argument outside dom(f)) and is
// an ordinary in-band value, never an exception. Implementations must not
// return NaN.
//
// Models are immutable after construction and safe for concurrent use.
class DivergenceModel {
 public:
  virtual ~DivergenceModel() = default;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }

  // Generator value f(x), extended real.
  virtual double value(const StatVec& x) const = 0;

  virtual bool in_domain(const StatVec& x) const = 0;
  virtual bool in_relative_interior(const StatVec& y) const = 0;

  // B_f(x, y). Throws UsageError on dimension mismatch.
  double divergence(const StatVec& x, const StatVec& y) const {
    require_same_dim(x, y, name_.c_str());
    if (x.dim() != dim_) {
      throw UsageError(name_ + ": expected dimension " + std::to_string(dim_));
    }
    return divergence_impl(x, y);
  }

  // Conjugate f*(g), available only where a closed form is shipped.
  virtual bool has_conjugate() const { return false; }
  virtual double conjugate_value(const StatVec& /*g*/) const {
    throw UnsupportedOperationError(name_ + ": no closed-form conjugate");
  }

 protected:
  DivergenceModel(std::string name, std::size_t dim)
      : name_(std::move(name)), dim_(dim) {
    if (dim == 0) throw UsageError("DivergenceModel: dimension must be >= 1");
  }

  virtual double divergence_impl(const StatVec& x, const StatVec& y) const = 0;

 private:
  std::string name_;
  std::size_t dim_;
};

// f(x) = ||x||_2^2, B(x, y) = ||x - y||_2^2. Conjugate f*(g) = ||g||^2 / 4.
std::shared_ptr<const DivergenceModel> squared_euclidean(std::size_t dim);

// f(x) = ||x||_1. Coordinate-wise rule: B_h(x, y) = 0 if x*y > 0, else 2|x|.
std::shared_ptr<const DivergenceModel> l1_model(std::size_t dim);

// Sum over coordinates of the univariate absolute-value rule; twice the l1
// distance from x to the farthest orthant containing y.
double l1_divergence(const StatVec& x, const StatVec& y);

// Gordon's divergence D_f(x, g) = f(x) + f*(g) - <g, x> for a dual element g.
// For differentiable f and g = grad f(y) this recovers B_f(x, y).
// Throws UnsupportedOperationError when the model has no conjugate.
double gordon_divergence(const DivergenceModel& model, const StatVec& x,
                         const StatVec& g);

}  // namespace bregtree
