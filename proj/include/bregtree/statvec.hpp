#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "bregtree/errors.hpp"

namespace bregtree {

// Dense point in R^n: the image of a statistic map. Coordinates are always
// finite; infinities live in divergence *values*, never in statistics.
class StatVec {
 public:
  StatVec() = default;

  explicit StatVec(std::vector<double> coords) : coords_(std::move(coords)) {
    validate();
  }

  StatVec(std::initializer_list<double> coords) : coords_(coords) { validate(); }

  static StatVec zeros(std::size_t n) {
    StatVec v;
    v.coords_.assign(n, 0.0);
    return v;
  }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const double* data() const { return coords_.data(); }

  friend bool operator==(const StatVec& a, const StatVec& b) {
    return a.coords_ == b.coords_;
  }

 private:
  void validate() const {
    for (double c : coords_) {
      if (!std::isfinite(c)) {
        throw UsageError("StatVec coordinate is not finite");
      }
    }
  }

  std::vector<double> coords_;
};

inline void require_same_dim(const StatVec& a, const StatVec& b,
                             const char* where) {
  if (a.dim() != b.dim()) {
    throw UsageError(std::string(where) + ": dimension mismatch (" +
                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) +
                     ")");
  }
}

// (wa*a + wb*b) / (wa + wb); the only vector arithmetic the merge loop needs.
inline StatVec weighted_mean(const StatVec& a, double wa, const StatVec& b,
                             double wb) {
  require_same_dim(a, b, "weighted_mean");
  const double w = wa + wb;
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out[i] = (wa * a[i] + wb * b[i]) / w;
  }
  return StatVec(std::move(out));
}

inline double dot(const StatVec& a, const StatVec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace bregtree
