#pragma once

#include <cstdint>
#include <span>

#include "bregtree/statvec.hpp"

namespace bregtree {

// Pushes statistics from the closure of a convex set S into its relative
// interior. Two constructions over a fixed anchor z in ri(S) and weight
// alpha in (0,1):
//   convex:  stat -> (1 - alpha) * stat + alpha * z     (any convex S)
//   cone:    stat -> stat + alpha * z                   (S a convex cone)
// The anchor and weight are fixed per dataset at ingestion time and never
// re-estimated mid-run. m_total records the data size the weight was derived
// from; the perturbation shrinks as m_total grows.
class Smoother {
 public:
  enum class Mode { None, Convex, Cone };

  static Smoother none() { return Smoother(); }
  static Smoother convex(StatVec anchor, double alpha, std::int64_t m_total = 1);
  static Smoother cone(StatVec anchor, double alpha, std::int64_t m_total = 1);

  StatVec apply(const StatVec& stat) const;

  Mode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  const StatVec& anchor() const { return anchor_; }
  std::int64_t data_size() const { return m_total_; }

 private:
  Smoother() = default;
  Smoother(Mode mode, StatVec anchor, double alpha, std::int64_t m_total);

  Mode mode_ = Mode::None;
  double alpha_ = 0.0;
  StatVec anchor_;
  std::int64_t m_total_ = 1;
};

// (1 - alpha) * stat + alpha * z. Throws UsageError unless alpha in (0,1).
StatVec smooth_convex(const StatVec& stat, const StatVec& z, double alpha);

// stat + alpha * z, for S a convex cone. Same alpha check.
StatVec smooth_cone(const StatVec& stat, const StatVec& z, double alpha);

// Simplex smoother: add eps(m) = 1/m + sqrt(p(1-p)/m) with p = 1/n to every
// coordinate and renormalize, i.e. a convex combination with the uniform
// distribution. All rate constants are fixed at 1.
Smoother multinomial_smoother(std::int64_t m_total, std::size_t vocab);

// Normal reference rule: h = sigma * (4 / ((d + 2) * m))^(1 / (d + 4)).
double normal_reference_bandwidth(double sigma, std::int64_t m, std::size_t d);

// Cone smoothers over Gaussian moment statistics. The full variant adds
// h^2 * I to the covariance block with one bandwidth from the mean of the
// per-coordinate deviations; the diagonal variant adds diag(h_1^2..h_d^2)
// with one bandwidth per coordinate. Layouts: (mu, vec M) and (mu, diag M).
// Throws DegenerateParameterError when a required deviation is zero.
Smoother gaussian_smoother_full(std::span<const double> sigmas,
                                std::int64_t m_total,
                                double bandwidth_scale = 1.0);
Smoother gaussian_smoother_diag(std::span<const double> sigmas,
                                std::int64_t m_total,
                                double bandwidth_scale = 1.0);

}  // namespace bregtree
