#pragma once

// Test-only oracles, independent of the implementation paths they check:
// definitional Bregman evaluation through numeric directional derivatives,
// quadrature and Monte Carlo KL, the Lance-Williams form of Ward's method,
// and pairwise-enumeration dendrogram purity.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bregtree/agglomerate.hpp"
#include "bregtree/divergence.hpp"

namespace oracles {

// B_f(x, y) = f(x) - f(y) + f'(y; y - x) with the directional derivative
// replaced by a one-sided difference quotient of model.value.
inline double bregman_by_definition(const bregtree::DivergenceModel& model,
                                    const bregtree::StatVec& x,
                                    const bregtree::StatVec& y,
                                    double t = 1e-7) {
  std::vector<double> shifted(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) {
    shifted[i] = y[i] + t * (y[i] - x[i]);
  }
  const double dir =
      (model.value(bregtree::StatVec(shifted)) - model.value(y)) / t;
  return model.value(x) - model.value(y) + dir;
}

inline double normal_log_pdf(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * (d * d / var + std::log(2.0 * M_PI * var));
}

// Simpson quadrature of int p ln(p/q) over a wide grid.
inline double gaussian_kl_quadrature(double mu1, double var1, double mu2,
                                     double var2) {
  const double sd = std::sqrt(std::max(var1, var2));
  const double lo = std::min(mu1, mu2) - 15.0 * sd;
  const double hi = std::max(mu1, mu2) + 15.0 * sd;
  const int n = 200000;  // even
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double lp = normal_log_pdf(x, mu1, var1);
    const double lq = normal_log_pdf(x, mu2, var2);
    return std::exp(lp) * (lp - lq);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double mvn_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                          const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::VectorXd w = llt.matrixL().solve(x - mu);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  return -0.5 * (w.squaredNorm() +
                 static_cast<double>(mu.size()) * std::log(2.0 * M_PI) +
                 log_det);
}

inline double gaussian_kl_monte_carlo(const Eigen::VectorXd& mu1,
                                      const Eigen::MatrixXd& s1,
                                      const Eigen::VectorXd& mu2,
                                      const Eigen::MatrixXd& s2, int samples,
                                      std::uint32_t seed) {
  const Eigen::LLT<Eigen::MatrixXd> llt1(s1);
  const Eigen::LLT<Eigen::MatrixXd> llt2(s2);
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index d = mu1.size();
  double acc = 0.0;
  Eigen::VectorXd z(d);
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) z(i) = gauss(rng);
    const Eigen::VectorXd x = mu1 + llt1.matrixL() * z;
    acc += mvn_log_pdf(x, mu1, llt1) - mvn_log_pdf(x, mu2, llt2);
  }
  return acc / samples;
}

struct WardMerge {
  int a = -1;
  int b = -1;
  double cost = 0.0;
};

// Textbook Ward's method in Lance-Williams form: a full distance table
// initialized with pairwise ||xi - xj||^2 / 2 and updated by the recurrence
//   D(k, ij) = ((ni+nk) D(i,k) + (nj+nk) D(j,k) - nk D(i,j)) / (ni+nj+nk).
// Same id scheme and (cost, a, b) tie rule as the library.
inline std::vector<WardMerge> ward_lance_williams(
    const std::vector<std::vector<double>>& pts) {
  const int m = static_cast<int>(pts.size());
  const int total = 2 * m - 1;
  std::vector<double> size(total, 0.0);
  std::vector<char> alive(total, 0);
  std::vector<std::vector<double>> dist(total, std::vector<double>(total, 0.0));
  for (int i = 0; i < m; ++i) {
    size[i] = 1.0;
    alive[i] = 1;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < pts[i].size(); ++c) {
        const double d = pts[i][c] - pts[j][c];
        d2 += d * d;
      }
      dist[i][j] = dist[j][i] = 0.5 * d2;
    }
  }
  std::vector<WardMerge> merges;
  for (int step = 1; step < m; ++step) {
    const int fresh = m + step - 1;
    WardMerge best;
    bool first = true;
    for (int i = 0; i < fresh; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < fresh; ++j) {
        if (!alive[j]) continue;
        const double c = dist[i][j];
        if (first || c < best.cost ||
            (c == best.cost && (i < best.a || (i == best.a && j < best.b)))) {
          best = WardMerge{i, j, c};
          first = false;
        }
      }
    }
    alive[best.a] = alive[best.b] = 0;
    size[fresh] = size[best.a] + size[best.b];
    for (int k = 0; k < fresh; ++k) {
      if (!alive[k]) continue;
      const double n = size[best.a] + size[best.b] + size[k];
      dist[k][fresh] = dist[fresh][k] =
          ((size[best.a] + size[k]) * dist[best.a][k] +
           (size[best.b] + size[k]) * dist[best.b][k] -
           size[k] * dist[best.a][best.b]) /
          n;
    }
    alive[fresh] = 1;
    merges.push_back(best);
  }
  return merges;
}

// Purity by explicit enumeration: for every unordered same-label pair walk
// to the lowest common ancestor and take the label's fraction there.
inline double purity_by_pairs(const bregtree::Dendrogram& tree,
                              const std::vector<std::string>& labels) {
  const int m = static_cast<int>(tree.leaf_count());
  auto lca = [&](int i, int j) {
    std::vector<char> seen(tree.nodes().size(), 0);
    for (int cur = i; cur >= 0; cur = tree.node(cur).parent) seen[cur] = 1;
    int cur = j;
    while (!seen[cur]) cur = tree.node(cur).parent;
    return cur;
  };
  double acc = 0.0;
  long pairs = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (labels[i] != labels[j]) continue;
      const int node = lca(i, j);
      const std::vector<int> leaves = tree.leaves_under(node);
      long same = 0;
      for (int leaf : leaves) {
        if (labels[leaf] == labels[i]) ++same;
      }
      acc += static_cast<double>(same) / static_cast<double>(leaves.size());
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

// --- random generators (fixed-seed reproducible) ---

inline Eigen::VectorXd random_simplex(int n, std::mt19937& rng) {
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = expo(rng) + 1e-6;
  return v / v.sum();
}

inline Eigen::MatrixXd random_spd(int d, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = gauss(rng);
  }
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  return a * a.transpose() / d + unif(rng) * Eigen::MatrixXd::Identity(d, d);
}

inline std::vector<bregtree::Datum> random_points(int m, int dim,
                                                  std::mt19937& rng,
                                                  double spread = 1.0) {
  std::normal_distribution<double> gauss(0.0, spread);
  std::vector<bregtree::Datum> out(m, bregtree::Datum(dim));
  for (auto& p : out) {
    for (double& c : p) c = gauss(rng);
  }
  return out;
}

// Documents with a strictly positive count for every word, so unsmoothed
// cluster means stay interior.
inline std::vector<bregtree::Datum> random_documents(int m, int vocab,
                                                     std::mt19937& rng) {
  std::uniform_int_distribution<int> count(1, 8);
  std::vector<bregtree::Datum> out(m, bregtree::Datum(vocab));
  for (auto& doc : out) {
    for (double& c : doc) c = static_cast<double>(count(rng));
  }
  return out;
}

}  // namespace oracles
