#include "bregtree/expfam.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace bregtree {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSimplexSumTol = 1e-9;   // accumulated weighted means
constexpr double kPivotRel = 1e-12;       // Cholesky pivot rule vs trace

struct CholFactor {
  bool ok = false;
  Eigen::MatrixXd lower;
  double log_det = 0.0;  // of the factored matrix
};

// Hand-rolled SPD Cholesky with an explicit pivot rule: factoring fails when
// any pivot <= kPivotRel * trace, which classifies the matrix as a relative
// boundary point rather than an error.
CholFactor spd_cholesky(const Eigen::MatrixXd& s) {
  const Eigen::Index d = s.rows();
  CholFactor f;
  const double trace = s.trace();
  if (!(trace > 0.0)) return f;
  const double floor = kPivotRel * trace;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > floor)) return f;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    log_det += std::log(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  f.ok = true;
  f.lower = std::move(l);
  f.log_det = log_det;
  return f;
}

// KL between d-dim Gaussians given factorizations; clamps float negatives.
double gaussian_kl_core(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                        double log_det1, const Eigen::VectorXd& mu2,
                        const CholFactor& chol2) {
  const auto lower = chol2.lower.triangularView<Eigen::Lower>();
  // tr(S2^-1 S1) = sum((L^-1 S1) .* L^-1) for S2 = L L^T
  const Eigen::MatrixXd a = lower.solve(s1);
  const Eigen::MatrixXd b =
      lower.solve(Eigen::MatrixXd::Identity(s1.rows(), s1.rows()));
  const double tr = a.cwiseProduct(b).sum();
  const Eigen::VectorXd w = lower.solve((mu2 - mu1).eval());
  const double quad = w.squaredNorm();
  const double d = static_cast<double>(s1.rows());
  double v = 0.5 * (tr + quad - d + chol2.log_det - log_det1);
  if (v < 0.0 && v > -1e-9 * (1.0 + tr + quad + std::abs(chol2.log_det) +
                              std::abs(log_det1))) {
    v = 0.0;
  }
  return v;
}

double scalar_gaussian_kl(double mu1, double var1, double mu2, double var2) {
  const double dm = mu2 - mu1;
  double v = 0.5 * (var1 / var2 + dm * dm / var2 - 1.0 + std::log(var2 / var1));
  if (v < 0.0 && v > -1e-12 * (1.0 + var1 / var2)) v = 0.0;
  return v;
}

void validate_gaussian(const GaussianMeanParams& p, const char* where) {
  const Eigen::Index d = p.mean.size();
  if (p.second_moment.rows() != d || p.second_moment.cols() != d) {
    throw UsageError(std::string(where) + ": second moment shape mismatch");
  }
  const double scale = 1.0 + p.second_moment.cwiseAbs().maxCoeff();
  const double asym =
      (p.second_moment - p.second_moment.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw UsageError(std::string(where) + ": second moment not symmetric");
  }
}

void validate_simplex(const MultinomialMeanParams& p, const char* where) {
  if (p.probs.size() < 1) {
    throw UsageError(std::string(where) + ": empty probability vector");
  }
  if (std::abs(p.probs.sum() - 1.0) > kSimplexSumTol) {
    throw UsageError(std::string(where) + ": probabilities do not sum to 1");
  }
}

CholFactor factor_or_throw(const Eigen::MatrixXd& cov, const char* component) {
  CholFactor f = spd_cholesky(cov);
  if (!f.ok) {
    throw DegenerateParameterError(std::string(component) +
                                   " is not positive definite");
  }
  return f;
}

}  // namespace

ExpFamModel::ExpFamModel(Family family, std::size_t data_dim)
    : family_(family), data_dim_(data_dim) {
  if (data_dim < 1) throw UsageError("ExpFamModel: dimension must be >= 1");
  switch (family) {
    case Family::GaussianFull:
      stat_dim_ = data_dim + data_dim * data_dim;
      break;
    case Family::GaussianDiag:
      stat_dim_ = 2 * data_dim;
      break;
    case Family::Multinomial:
      stat_dim_ = data_dim;
      break;
  }
}

StatVec ExpFamModel::encode(const GaussianMeanParams& p) const {
  validate_gaussian(p, "encode");
  const std::size_t d = data_dim_;
  if (static_cast<std::size_t>(p.mean.size()) != d) {
    throw UsageError("encode: mean dimension mismatch");
  }
  std::vector<double> s(stat_dim_);
  for (std::size_t i = 0; i < d; ++i) s[i] = p.mean(i);
  if (family_ == Family::GaussianFull) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) s[d + i * d + j] = p.second_moment(i, j);
  } else if (family_ == Family::GaussianDiag) {
    for (std::size_t i = 0; i < d; ++i) s[d + i] = p.second_moment(i, i);
  } else {
    throw UsageError("encode: gaussian params on a multinomial model");
  }
  return StatVec(std::move(s));
}

StatVec ExpFamModel::encode(const MultinomialMeanParams& p) const {
  if (family_ != Family::Multinomial) {
    throw UsageError("encode: multinomial params on a gaussian model");
  }
  if (static_cast<std::size_t>(p.probs.size()) != data_dim_) {
    throw UsageError("encode: vocabulary size mismatch");
  }
  return StatVec(std::vector<double>(p.probs.data(), p.probs.data() + data_dim_));
}

GaussianMeanParams ExpFamModel::decode_gaussian(const StatVec& s) const {
  if (family_ == Family::Multinomial) {
    throw UsageError("decode_gaussian on a multinomial model");
  }
  if (s.dim() != stat_dim_) throw UsageError("decode_gaussian: bad statistic dim");
  const Eigen::Index d = static_cast<Eigen::Index>(data_dim_);
  GaussianMeanParams p;
  p.mean = Eigen::Map<const Eigen::VectorXd>(s.data(), d);
  if (family_ == Family::GaussianFull) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        m(s.data() + d, d, d);
    p.second_moment = 0.5 * (m + m.transpose());  // scrub float asymmetry
  } else {
    p.second_moment = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) p.second_moment(i, i) = s[d + i];
  }
  return p;
}

MultinomialMeanParams ExpFamModel::decode_multinomial(const StatVec& s) const {
  if (family_ != Family::Multinomial) {
    throw UsageError("decode_multinomial on a gaussian model");
  }
  if (s.dim() != stat_dim_) throw UsageError("decode_multinomial: bad dim");
  MultinomialMeanParams p;
  p.probs = Eigen::Map<const Eigen::VectorXd>(s.data(),
                                              static_cast<Eigen::Index>(s.dim()));
  return p;
}

bool ExpFamModel::mean_in_domain(const StatVec& s) const {
  if (s.dim() != stat_dim_) return false;
  if (family_ == Family::Multinomial) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
      if (s[i] < -1e-12) return false;
      sum += s[i];
    }
    return std::abs(sum - 1.0) <= kSimplexSumTol;
  }
  if (family_ == Family::GaussianDiag) {
    const std::size_t d = data_dim_;
    for (std::size_t i = 0; i < d; ++i) {
      const double var = s[d + i] - s[i] * s[i];
      if (var < -1e-9 * (1.0 + std::abs(s[d + i]))) return false;
    }
    return true;
  }
  const GaussianMeanParams p = decode_gaussian(s);
  const Eigen::MatrixXd cov = p.covariance();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                    Eigen::EigenvaluesOnly);
  const double scale = 1.0 + cov.cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() >= -1e-9 * scale;
}

bool ExpFamModel::mean_interior(const StatVec& s) const {
  if (s.dim() != stat_dim_) return false;
  if (family_ == Family::Multinomial) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
      if (!(s[i] > 0.0)) return false;
      sum += s[i];
    }
    return std::abs(sum - 1.0) <= kSimplexSumTol;
  }
  if (family_ == Family::GaussianDiag) {
    const std::size_t d = data_dim_;
    double trace = 0.0;
    std::vector<double> vars(d);
    for (std::size_t i = 0; i < d; ++i) {
      vars[i] = s[d + i] - s[i] * s[i];
      trace += vars[i];
    }
    if (!(trace > 0.0)) return false;
    for (double v : vars) {
      if (!(v > kPivotRel * trace)) return false;
    }
    return true;
  }
  return spd_cholesky(decode_gaussian(s).covariance()).ok;
}

GaussianCanonicalParams to_canonical(const GaussianMeanParams& p) {
  validate_gaussian(p, "to_canonical");
  const CholFactor chol = factor_or_throw(p.covariance(), "covariance");
  const auto lower = chol.lower.triangularView<Eigen::Lower>();
  const Eigen::Index d = p.mean.size();
  GaussianCanonicalParams c;
  c.theta1 = lower.transpose().solve(lower.solve(p.mean));
  const Eigen::MatrixXd inv = lower.transpose().solve(
      lower.solve(Eigen::MatrixXd::Identity(d, d)).eval());
  c.theta2 = -0.25 * (inv + inv.transpose());
  return c;
}

MultinomialCanonicalParams to_canonical(const MultinomialMeanParams& p) {
  validate_simplex(p, "to_canonical");
  MultinomialCanonicalParams c;
  c.log_probs.resize(p.probs.size());
  for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
    if (!(p.probs(i) > 0.0)) {
      throw DegenerateParameterError("probability of word " + std::to_string(i) +
                                     " is not strictly positive");
    }
    c.log_probs(i) = std::log(p.probs(i));
  }
  return c;
}

GaussianMeanParams mean_of(const GaussianCanonicalParams& p) {
  const Eigen::MatrixXd neg2 = -2.0 * p.theta2;
  const CholFactor chol = factor_or_throw(neg2, "-2 * theta2");
  const auto lower = chol.lower.triangularView<Eigen::Lower>();
  const Eigen::Index d = p.theta1.size();
  GaussianMeanParams m;
  const Eigen::MatrixXd sigma = lower.transpose().solve(
      lower.solve(Eigen::MatrixXd::Identity(d, d)).eval());
  m.mean = sigma * p.theta1;
  m.second_moment = 0.5 * (sigma + sigma.transpose()) + m.mean * m.mean.transpose();
  return m;
}

MultinomialMeanParams mean_of(const MultinomialCanonicalParams& p) {
  // softmax; additive shifts of theta land on the same mean parameter
  MultinomialMeanParams m;
  const double top = p.log_probs.maxCoeff();
  Eigen::VectorXd e = (p.log_probs.array() - top).exp();
  m.probs = e / e.sum();
  return m;
}

double log_density(const GaussianMeanParams& p, const Eigen::VectorXd& x) {
  validate_gaussian(p, "log_density");
  if (x.size() != p.mean.size()) throw UsageError("log_density: dim mismatch");
  const CholFactor chol = factor_or_throw(p.covariance(), "covariance");
  const Eigen::VectorXd w =
      chol.lower.triangularView<Eigen::Lower>().solve((x - p.mean).eval());
  const double d = static_cast<double>(x.size());
  return -0.5 * (w.squaredNorm() + d * std::log(2.0 * kPi) + chol.log_det);
}

double log_density(const MultinomialMeanParams& p, std::size_t word) {
  validate_simplex(p, "log_density");
  if (word >= static_cast<std::size_t>(p.probs.size())) {
    throw UsageError("log_density: word index out of range");
  }
  if (!(p.probs(static_cast<Eigen::Index>(word)) > 0.0)) {
    throw DegenerateParameterError("probability of word " + std::to_string(word) +
                                   " is not strictly positive");
  }
  return std::log(p.probs(static_cast<Eigen::Index>(word)));
}

double log_density_stat(const ExpFamModel& model, const StatVec& mean,
                        const StatVec& datum_stat) {
  if (mean.dim() != model.stat_dim() || datum_stat.dim() != model.stat_dim()) {
    throw UsageError("log_density_stat: bad statistic dimension");
  }
  const std::size_t d = model.data_dim();
  switch (model.family()) {
    case Family::Multinomial: {
      double acc = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        total += mean[i];
        if (datum_stat[i] != 0.0) {
          if (!(mean[i] > 0.0)) {
            throw DegenerateParameterError("probability of word " +
                                           std::to_string(i) +
                                           " is not strictly positive");
          }
          acc += datum_stat[i] * std::log(mean[i]);
        }
      }
      return acc - std::log(total);  // psi(log tau) = log sum tau
    }
    case Family::GaussianDiag: {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double mu = mean[i];
        const double var = mean[d + i] - mu * mu;
        if (!(var > 0.0)) {
          throw DegenerateParameterError("variance of coordinate " +
                                         std::to_string(i) +
                                         " is not strictly positive");
        }
        acc += datum_stat[i] * mu / var - datum_stat[d + i] / (2.0 * var) -
               0.5 * (std::log(2.0 * kPi * var) + mu * mu / var);
      }
      return acc;
    }
    case Family::GaussianFull: {
      const GaussianMeanParams p = model.decode_gaussian(mean);
      const CholFactor chol = factor_or_throw(p.covariance(), "covariance");
      const auto lower = chol.lower.triangularView<Eigen::Lower>();
      const Eigen::Index dd = static_cast<Eigen::Index>(d);
      const Eigen::VectorXd v =
          Eigen::Map<const Eigen::VectorXd>(datum_stat.data(), dd);
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                           Eigen::Dynamic, Eigen::RowMajor>>
          sm(datum_stat.data() + d, dd, dd);
      const Eigen::VectorXd sig_inv_mu =
          lower.transpose().solve(lower.solve(p.mean));
      const Eigen::MatrixXd sig_inv = lower.transpose().solve(
          lower.solve(Eigen::MatrixXd::Identity(dd, dd)).eval());
      const double pair_term =
          v.dot(sig_inv_mu) - 0.5 * sig_inv.cwiseProduct(sm).sum();
      const double cumulant =
          0.5 * (static_cast<double>(d) * std::log(2.0 * kPi) + chol.log_det +
                 p.mean.dot(sig_inv_mu));
      return pair_term - cumulant;
    }
  }
  throw UsageError("log_density_stat: unknown family");
}

double kl(const GaussianMeanParams& mean1, const GaussianMeanParams& mean2) {
  validate_gaussian(mean1, "kl");
  validate_gaussian(mean2, "kl");
  if (mean1.mean.size() != mean2.mean.size()) {
    throw UsageError("kl: dimension mismatch");
  }
  const Eigen::MatrixXd s1 = mean1.covariance();
  const CholFactor chol1 = factor_or_throw(s1, "first covariance");
  const CholFactor chol2 = factor_or_throw(mean2.covariance(), "second covariance");
  return gaussian_kl_core(mean1.mean, s1, chol1.log_det, mean2.mean, chol2);
}

double kl(const MultinomialMeanParams& mean1, const MultinomialMeanParams& mean2) {
  validate_simplex(mean1, "kl");
  validate_simplex(mean2, "kl");
  if (mean1.probs.size() != mean2.probs.size()) {
    throw UsageError("kl: dimension mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mean1.probs.size(); ++i) {
    const double p = mean1.probs(i);
    const double q = mean2.probs(i);
    if (!(p > 0.0) || !(q > 0.0)) {
      throw DegenerateParameterError("probability of word " + std::to_string(i) +
                                     " is not strictly positive");
    }
    acc += p * std::log(p / q);
  }
  return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;
}

namespace {

// B_{psi*} over flat statistics. Degenerate inputs yield +infinity so the
// merge loop can rank candidates; only dimension mismatches throw.
class ExpFamDivergence final : public DivergenceModel {
 public:
  ExpFamDivergence(Family family, std::size_t data_dim, std::string name)
      : DivergenceModel(std::move(name),
                        ExpFamModel(family, data_dim).stat_dim()),
        model_(family, data_dim) {}

  double value(const StatVec& x) const override {
    const std::size_t d = model_.data_dim();
    switch (model_.family()) {
      case Family::Multinomial: {
        if (!model_.mean_in_domain(x)) return kInfiniteDivergence;
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (x[i] > 0.0) acc += x[i] * std::log(x[i]);
        }
        return acc;
      }
      case Family::GaussianDiag: {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double var = x[d + i] - x[i] * x[i];
          if (!(var > 0.0)) return kInfiniteDivergence;
          acc += -0.5 * std::log(2.0 * kPi * var) - 0.5;
        }
        return acc;
      }
      case Family::GaussianFull: {
        const CholFactor chol =
            spd_cholesky(model_.decode_gaussian(x).covariance());
        if (!chol.ok) return kInfiniteDivergence;
        const double dd = static_cast<double>(d);
        return -0.5 * (dd * std::log(2.0 * kPi) + dd + chol.log_det);
      }
    }
    return kInfiniteDivergence;
  }

  bool in_domain(const StatVec& x) const override {
    return model_.mean_in_domain(x);
  }
  bool in_relative_interior(const StatVec& y) const override {
    return model_.mean_interior(y);
  }

 protected:
  double divergence_impl(const StatVec& x, const StatVec& y) const override {
    switch (model_.family()) {
      case Family::Multinomial:
        return multinomial_div(x, y);
      case Family::GaussianDiag:
        return diag_div(x, y);
      case Family::GaussianFull:
        return full_div(x, y);
    }
    return kInfiniteDivergence;
  }

 private:
  double multinomial_div(const StatVec& x, const StatVec& y) const {
    const std::size_t n = model_.data_dim();
    double sum_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(y[i] > 0.0)) return kInfiniteDivergence;  // relative boundary
      sum_y += y[i];
    }
    if (std::abs(sum_y - 1.0) > kSimplexSumTol) return kInfiniteDivergence;
    if (x == y) return 0.0;
    double sum_x = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] < -1e-12) return kInfiniteDivergence;  // outside dom(psi*)
      sum_x += x[i];
      if (x[i] > 0.0) acc += x[i] * std::log(x[i] / y[i]);
    }
    if (std::abs(sum_x - 1.0) > kSimplexSumTol) return kInfiniteDivergence;
    return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;
  }

  double diag_div(const StatVec& x, const StatVec& y) const {
    const std::size_t d = model_.data_dim();
    double trace_x = 0.0;
    double trace_y = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      trace_x += x[d + i] - x[i] * x[i];
      trace_y += y[d + i] - y[i] * y[i];
    }
    if (!(trace_y > 0.0)) return kInfiniteDivergence;
    const double floor_y = kPivotRel * trace_y;
    const double floor_x = trace_x > 0.0 ? kPivotRel * trace_x : 0.0;
    if (x == y) {
      for (std::size_t i = 0; i < d; ++i) {
        if (!(y[d + i] - y[i] * y[i] > floor_y)) return kInfiniteDivergence;
      }
      return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double var_y = y[d + i] - y[i] * y[i];
      if (!(var_y > floor_y)) return kInfiniteDivergence;
      const double var_x = x[d + i] - x[i] * x[i];
      if (!(var_x > floor_x) || !(var_x > 0.0)) return kInfiniteDivergence;
      acc += scalar_gaussian_kl(x[i], var_x, y[i], var_y);
    }
    return acc;
  }

  double full_div(const StatVec& x, const StatVec& y) const {
    const GaussianMeanParams py = model_.decode_gaussian(y);
    const CholFactor chol_y = spd_cholesky(py.covariance());
    if (!chol_y.ok) return kInfiniteDivergence;
    if (x == y) return 0.0;
    const GaussianMeanParams px = model_.decode_gaussian(x);
    const Eigen::MatrixXd cov_x = px.covariance();
    const CholFactor chol_x = spd_cholesky(cov_x);
    if (!chol_x.ok) return kInfiniteDivergence;
    return gaussian_kl_core(px.mean, cov_x, chol_x.log_det, py.mean, chol_y);
  }

  ExpFamModel model_;
};

}  // namespace

std::shared_ptr<const DivergenceModel> divergence_model_of(Family family,
                                                           std::size_t data_dim) {
  std::string name;
  switch (family) {
    case Family::GaussianFull:
      name = "kl-gaussian-full";
      break;
    case Family::GaussianDiag:
      name = "kl-gaussian-diag";
      break;
    case Family::Multinomial:
      name = "kl-multinomial";
      break;
  }
  return std::make_shared<ExpFamDivergence>(family, data_dim, std::move(name));
}

MultinomialMeanParams smooth_mean(const MultinomialMeanParams& p,
                                  std::int64_t m_total) {
  validate_simplex(p, "smooth_mean");
  const std::size_t n = static_cast<std::size_t>(p.probs.size());
  const ExpFamModel model(Family::Multinomial, n);
  const Smoother sm = multinomial_smoother(m_total, n);
  return model.decode_multinomial(sm.apply(model.encode(p)));
}

GaussianMeanParams smooth_mean(const GaussianMeanParams& p, bool diagonal,
                               std::span<const double> sigmas,
                               std::int64_t m_total, double bandwidth_scale) {
  validate_gaussian(p, "smooth_mean");
  const std::size_t d = static_cast<std::size_t>(p.mean.size());
  if (sigmas.size() != d) throw UsageError("smooth_mean: sigma size mismatch");
  const ExpFamModel model(diagonal ? Family::GaussianDiag : Family::GaussianFull,
                          d);
  const Smoother sm = diagonal
                          ? gaussian_smoother_diag(sigmas, m_total, bandwidth_scale)
                          : gaussian_smoother_full(sigmas, m_total, bandwidth_scale);
  return model.decode_gaussian(sm.apply(model.encode(p)));
}

}  // namespace bregtree
