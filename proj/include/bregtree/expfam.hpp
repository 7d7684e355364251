#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>

#include "bregtree/divergence.hpp"
#include "bregtree/smoothing.hpp"
#include "bregtree/statvec.hpp"

namespace bregtree {

// Shipped exponential families. Base measure is Lebesgue for the Gaussians
// and counting measure over the vocabulary for the multinomial.
enum class Family { GaussianFull, GaussianDiag, Multinomial };

// Gaussian mean parametrization: mean mu and mean second moment
// M = E[x x^T]; the covariance M - mu mu^T is derived. Diagonal-covariance
// models carry M with off-diagonal entries zero.
struct GaussianMeanParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second_moment;

  Eigen::MatrixXd covariance() const {
    return second_moment - mean * mean.transpose();
  }
};

// theta = (Sigma^-1 mu, -Sigma^-1 / 2).
struct GaussianCanonicalParams {
  Eigen::VectorXd theta1;
  Eigen::MatrixXd theta2;
};

// Point on the probability simplex; interior once smoothed.
struct MultinomialMeanParams {
  Eigen::VectorXd probs;
};

// theta = log(probs), one representative of the overcomplete class
// theta + c * 1.
struct MultinomialCanonicalParams {
  Eigen::VectorXd log_probs;
};

// Family descriptor plus the flat statistic layout used by the clustering
// loop: multinomial = probs; gaussian-full = (mu, vec M); gaussian-diag =
// (mu, diag M).
class ExpFamModel {
 public:
  ExpFamModel(Family family, std::size_t data_dim);

  Family family() const { return family_; }
  std::size_t data_dim() const { return data_dim_; }
  std::size_t stat_dim() const { return stat_dim_; }

  StatVec encode(const GaussianMeanParams& p) const;
  StatVec encode(const MultinomialMeanParams& p) const;
  GaussianMeanParams decode_gaussian(const StatVec& s) const;
  MultinomialMeanParams decode_multinomial(const StatVec& s) const;

  // dom(psi*) and ri(dom(psi*)) membership for the flat layout.
  bool mean_in_domain(const StatVec& s) const;
  bool mean_interior(const StatVec& s) const;

 private:
  Family family_;
  std::size_t data_dim_;
  std::size_t stat_dim_;
};

// Mean -> canonical. Throws DegenerateParameterError on boundary parameters
// (singular covariance, zero probability), naming the offending component.
GaussianCanonicalParams to_canonical(const GaussianMeanParams& p);
MultinomialCanonicalParams to_canonical(const MultinomialMeanParams& p);

// Canonical -> mean (round-trip inverse). The multinomial direction is the
// softmax, invariant under additive shifts of theta.
GaussianMeanParams mean_of(const GaussianCanonicalParams& p);
MultinomialMeanParams mean_of(const MultinomialCanonicalParams& p);

// log p_theta(x) with theta = to_canonical(mean).
double log_density(const GaussianMeanParams& p, const Eigen::VectorXd& x);
double log_density(const MultinomialMeanParams& p, std::size_t word);

// <tau(x), theta> - psi(theta) for an arbitrary datum statistic in the
// model's flat layout; the likelihood sums of the merge-cost identity are
// computed through this.
double log_density_stat(const ExpFamModel& model, const StatVec& mean,
                        const StatVec& datum_stat);

// KL divergence K(p_mean1, p_mean2) = B_{psi*}(tau1, tau2) in closed form.
//   multinomial: sum_i p_i ln(p_i / q_i)
//   gaussian:    (tr(S2^-1 S1) + (m2-m1)' S2^-1 (m2-m1) - d + ln|S2|/|S1|)/2
// Throws DegenerateParameterError on boundary parameters.
double kl(const GaussianMeanParams& mean1, const GaussianMeanParams& mean2);
double kl(const MultinomialMeanParams& mean1, const MultinomialMeanParams& mean2);

// Adapts the family's B_{psi*} into the DivergenceModel shape over flat
// statistics. Degenerate arguments (boundary or outside the domain) yield
// +infinity in-band so the merge loop can rank candidates; nothing throws
// except dimension mismatches.
std::shared_ptr<const DivergenceModel> divergence_model_of(Family family,
                                                           std::size_t data_dim);

// Typed smoothing application (Bernstein-rate simplex rule / normal
// reference rule); thin wrappers over the Smoother factories.
MultinomialMeanParams smooth_mean(const MultinomialMeanParams& p,
                                  std::int64_t m_total);
GaussianMeanParams smooth_mean(const GaussianMeanParams& p, bool diagonal,
                               std::span<const double> sigmas,
                               std::int64_t m_total,
                               double bandwidth_scale = 1.0);

}  // namespace bregtree
