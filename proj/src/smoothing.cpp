#include "bregtree/smoothing.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace bregtree {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw UsageError("smoothing weight alpha must lie strictly in (0, 1)");
  }
}

void check_m(std::int64_t m) {
  if (m < 1) throw UsageError("data size for smoothing must be >= 1");
}

}  // namespace

Smoother::Smoother(Mode mode, StatVec anchor, double alpha, std::int64_t m_total)
    : mode_(mode), alpha_(alpha), anchor_(std::move(anchor)), m_total_(m_total) {
  check_alpha(alpha);
  check_m(m_total);
}

Smoother Smoother::convex(StatVec anchor, double alpha, std::int64_t m_total) {
  return Smoother(Mode::Convex, std::move(anchor), alpha, m_total);
}

Smoother Smoother::cone(StatVec anchor, double alpha, std::int64_t m_total) {
  return Smoother(Mode::Cone, std::move(anchor), alpha, m_total);
}

StatVec Smoother::apply(const StatVec& stat) const {
  switch (mode_) {
    case Mode::None:
      return stat;
    case Mode::Convex:
      return smooth_convex(stat, anchor_, alpha_);
    case Mode::Cone:
      return smooth_cone(stat, anchor_, alpha_);
  }
  throw UsageError("Smoother: unknown mode");
}

StatVec smooth_convex(const StatVec& stat, const StatVec& z, double alpha) {
  check_alpha(alpha);
  require_same_dim(stat, z, "smooth_convex");
  std::vector<double> out(stat.dim());
  for (std::size_t i = 0; i < stat.dim(); ++i) {
    out[i] = (1.0 - alpha) * stat[i] + alpha * z[i];
  }
  return StatVec(std::move(out));
}

StatVec smooth_cone(const StatVec& stat, const StatVec& z, double alpha) {
  check_alpha(alpha);
  require_same_dim(stat, z, "smooth_cone");
  std::vector<double> out(stat.dim());
  for (std::size_t i = 0; i < stat.dim(); ++i) {
    out[i] = stat[i] + alpha * z[i];
  }
  return StatVec(std::move(out));
}

Smoother multinomial_smoother(std::int64_t m_total, std::size_t vocab) {
  check_m(m_total);
  if (vocab < 1) throw UsageError("multinomial smoother needs vocab size >= 1");
  const double n = static_cast<double>(vocab);
  const double m = static_cast<double>(m_total);
  const double p = 1.0 / n;
  const double eps = 1.0 / m + std::sqrt(p * (1.0 - p) / m);
  // (tau + eps*1) / (1 + n*eps) == (1 - alpha)*tau + alpha*uniform
  const double alpha = n * eps / (1.0 + n * eps);
  return Smoother::convex(StatVec(std::vector<double>(vocab, p)), alpha, m_total);
}

double normal_reference_bandwidth(double sigma, std::int64_t m, std::size_t d) {
  check_m(m);
  if (d < 1) throw UsageError("bandwidth needs dimension >= 1");
  if (!(sigma >= 0.0)) throw UsageError("bandwidth needs sigma >= 0");
  const double dd = static_cast<double>(d);
  return sigma * std::pow(4.0 / ((dd + 2.0) * static_cast<double>(m)),
                          1.0 / (dd + 4.0));
}

namespace {

// Anchor in moment layout: zero mean block, bandwidth matrix in the second-
// moment block. alpha is fixed at 1/2 and the anchor doubled so alpha * z is
// exactly the bandwidth matrix.
Smoother make_gaussian_smoother(const std::vector<double>& h2, std::size_t d,
                                bool diagonal, std::int64_t m_total) {
  std::vector<double> z(diagonal ? 2 * d : d + d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(h2[i] > 0.0)) {
      throw DegenerateParameterError(
          "gaussian smoother: zero bandwidth for coordinate " +
          std::to_string(i) + " (zero sample deviation)");
    }
    if (diagonal) {
      z[d + i] = 2.0 * h2[i];
    } else {
      z[d + i * d + i] = 2.0 * h2[i];
    }
  }
  return Smoother::cone(StatVec(std::move(z)), 0.5, m_total);
}

}  // namespace

Smoother gaussian_smoother_full(std::span<const double> sigmas,
                                std::int64_t m_total, double bandwidth_scale) {
  const std::size_t d = sigmas.size();
  if (d == 0) throw UsageError("gaussian smoother needs dimension >= 1");
  if (!(bandwidth_scale > 0.0)) throw UsageError("bandwidth scale must be > 0");
  const double sigma_bar =
      std::accumulate(sigmas.begin(), sigmas.end(), 0.0) / static_cast<double>(d);
  const double h =
      bandwidth_scale * normal_reference_bandwidth(sigma_bar, m_total, d);
  return make_gaussian_smoother(std::vector<double>(d, h * h), d,
                                /*diagonal=*/false, m_total);
}

Smoother gaussian_smoother_diag(std::span<const double> sigmas,
                                std::int64_t m_total, double bandwidth_scale) {
  const std::size_t d = sigmas.size();
  if (d == 0) throw UsageError("gaussian smoother needs dimension >= 1");
  if (!(bandwidth_scale > 0.0)) throw UsageError("bandwidth scale must be > 0");
  std::vector<double> h2(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double h =
        bandwidth_scale * normal_reference_bandwidth(sigmas[i], m_total, d);
    h2[i] = h * h;
  }
  return make_gaussian_smoother(h2, d, /*diagonal=*/true, m_total);
}

}  // namespace bregtree
