#pragma once

// Random instance generators and implementation-independent oracles shared by
// the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "setfusion/gating.hpp"
#include "setfusion/kernels.hpp"
#include "setfusion/metric_learning.hpp"
#include "setfusion/set_model.hpp"

namespace setfusion::testing {

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Matrix random_symmetric(Index d, std::mt19937_64& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  return 0.5 * (g + g.transpose());
}

/// Well-conditioned SPD: G G^T / d + 0.5 I.
inline Matrix random_spd(Index d, std::mt19937_64& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  Matrix s = g * g.transpose() / static_cast<double>(d) + 0.5 * Matrix::Identity(d, d);
  return 0.5 * (s + s.transpose());
}

inline Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

/// Random image set: n samples around a random mean with a random mixing matrix.
inline ImageSet random_set(Index d, Index n, std::mt19937_64& rng, double mean_scale = 1.0,
                           const std::string& label = "a", const std::string& id = "s") {
  const Vector mean = mean_scale * gaussian_matrix(d, 1, rng).col(0);
  const Matrix mix = gaussian_matrix(d, d, rng) / std::sqrt(static_cast<double>(d));
  Matrix x = (mix * gaussian_matrix(d, n, rng)).colwise() + mean;
  return ImageSet{std::move(x), label, id};
}

inline TrainConfig config_with_q(int q) {
  TrainConfig cfg;
  cfg.q = q;
  return cfg;
}

/// A gallery of random descriptor triples with labels cycling over `classes`.
inline std::vector<DescriptorTriple> random_gallery(std::size_t n, Index d, int q, int classes, std::mt19937_64& rng,
                                                    std::vector<int>* labels = nullptr) {
  std::vector<DescriptorTriple> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    out.push_back(encode_set(random_set(d, 3 * d, rng, 1.0 + c, "c" + std::to_string(c), "s" + std::to_string(i)),
                             config_with_q(q)));
    if (labels) labels->push_back(c);
  }
  return out;
}

inline std::vector<KernelId> all_kernel_ids() { return {kAllKernels[0], kAllKernels[1], kAllKernels[2]}; }

/// Random gating parameters of magnitude `scale` (larger than the trainer's start
/// so that the gates are visibly non-uniform).
inline GatingParams random_params(std::size_t kernels, Index n, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  GatingParams p;
  p.rhos.resize(static_cast<Index>(kernels));
  for (std::size_t q = 0; q < kernels; ++q) {
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = u(rng);
    p.deltas.push_back(d);
    p.rhos(static_cast<Index>(q)) = u(rng);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Oracles

/// Two-pass mean then covariance with explicit loops.
inline Matrix two_pass_covariance(const Matrix& x) {
  const Index d = x.rows(), n = x.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (Index i = 0; i < d; ++i) {
    for (Index k = 0; k < n; ++k) mean[static_cast<std::size_t>(i)] += x(i, k);
    mean[static_cast<std::size_t>(i)] /= static_cast<double>(n);
  }
  Matrix c = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      double s = 0.0;
      for (Index k = 0; k < n; ++k)
        s += (x(i, k) - mean[static_cast<std::size_t>(i)]) * (x(j, k) - mean[static_cast<std::size_t>(j)]);
      c(i, j) = s / static_cast<double>(n - 1);
    }
  return c;
}

/// Four nested loops over (i, j, q, outer-product entries), literally as the double sums read.
inline ScatterPair brute_force_scatter(const KernelBank& bank, const std::vector<int>& labels,
                                       const GatingWeights& w) {
  const Index n = bank.n_train();
  ScatterPair s;
  s.within = Matrix::Zero(n, n);
  s.between = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
      (same ? s.n_within_pairs : s.n_between_pairs) += 1;
      Matrix& target = same ? s.within : s.between;
      for (std::size_t q = 0; q < bank.size(); ++q) {
        const double weight = w(static_cast<Index>(q), i) * w(static_cast<Index>(q), j);
        for (Index a = 0; a < n; ++a)
          for (Index b = 0; b < n; ++b) {
            const double da = bank.gram(q)(a, i) - bank.gram(q)(a, j);
            const double db = bank.gram(q)(b, i) - bank.gram(q)(b, j);
            target(a, b) += weight * da * db;
          }
      }
    }
  }
  s.within /= static_cast<double>(s.n_within_pairs);
  s.between /= static_cast<double>(s.n_between_pairs);
  return s;
}

/// J(delta, rho) with E fixed, evaluated through the explicit scatter matrices.
inline double objective_through_scatter(const KernelBank& bank, const GatingParams& p, const Matrix& e,
                                        const std::vector<int>& labels) {
  const GatingWeights w = gating_weights(bank, p);
  return objective_value(e, scatter_matrices(bank, labels, w));
}

/// Central differences of J for every delta and rho coordinate.
inline GatingGradients finite_difference_gradient(const KernelBank& bank, const GatingParams& p, const Matrix& e,
                                                  const std::vector<int>& labels, double h) {
  GatingGradients g;
  g.rhos.resize(p.rhos.size());
  for (std::size_t q = 0; q < p.deltas.size(); ++q) {
    Vector gq(p.deltas[q].size());
    for (Index i = 0; i < gq.size(); ++i) {
      GatingParams plus = p, minus = p;
      plus.deltas[q](i) += h;
      minus.deltas[q](i) -= h;
      gq(i) = (objective_through_scatter(bank, plus, e, labels) - objective_through_scatter(bank, minus, e, labels)) /
              (2.0 * h);
    }
    g.deltas.push_back(gq);
    GatingParams plus = p, minus = p;
    plus.rhos(static_cast<Index>(q)) += h;
    minus.rhos(static_cast<Index>(q)) -= h;
    g.rhos(static_cast<Index>(q)) =
        (objective_through_scatter(bank, plus, e, labels) - objective_through_scatter(bank, minus, e, labels)) /
        (2.0 * h);
  }
  return g;
}

/// Best trace ratio over `samples` random orthonormal d x k candidates.
inline double monte_carlo_trace_ratio(const Matrix& b, const Matrix& t, Index k, int samples, std::mt19937_64& rng) {
  double best = -1e300;
  for (int s = 0; s < samples; ++s) {
    const Matrix v = random_orthonormal(b.rows(), k, rng);
    best = std::max(best, (v.transpose() * b * v).trace() / (v.transpose() * t * v).trace());
  }
  return best;
}

/// Squared projection metric 0.5 ||Y1 Y1^T - Y2 Y2^T||_F^2.
inline double projection_metric_sq(const Matrix& y1, const Matrix& y2) {
  return 0.5 * (y1 * y1.transpose() - y2 * y2.transpose()).squaredNorm();
}

/// det(P) through the Schur complement of the bottom-right entry.
inline double schur_determinant(const Matrix& p) {
  const Index d = p.rows() - 1;
  const double corner = p(d, d);
  const Vector col = p.topRightCorner(d, 1);
  const Matrix schur = p.topLeftCorner(d, d) - col * col.transpose() / corner;
  return corner * schur.partialPivLu().determinant();
}

/// Matrix log of a symmetric 2x2 SPD matrix from closed-form eigenpairs.
inline Matrix log_2x2(const Matrix& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 1);
  const double mid = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  const double l1 = mid + rad, l2 = mid - rad;
  Vector v1(2);
  if (std::abs(b) > 0.0) {
    v1 << b, l1 - a;
  } else {
    v1 << (a >= c ? 1.0 : 0.0), (a >= c ? 0.0 : 1.0);
  }
  v1.normalize();
  Vector v2(2);
  v2 << -v1(1), v1(0);
  return std::log(l1) * v1 * v1.transpose() + std::log(l2) * v2 * v2.transpose();
}

/// Per-coordinate relative error with an absolute floor of 1e-6 on the
/// denominator; central differences at h = 1e-5 are accurate to about 1e-10
/// absolute, so coordinates that are essentially zero are not over-weighted.
inline double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Worst gradient_relative_error over every delta and rho coordinate.
inline double worst_gradient_error(const GatingGradients& analytic, const GatingGradients& numeric) {
  double worst = 0.0;
  for (std::size_t q = 0; q < analytic.deltas.size(); ++q) {
    for (Index i = 0; i < analytic.deltas[q].size(); ++i)
      worst = std::max(worst, gradient_relative_error(analytic.deltas[q](i), numeric.deltas[q](i)));
    worst = std::max(worst, gradient_relative_error(analytic.rhos(static_cast<Index>(q)), numeric.rhos(static_cast<Index>(q))));
  }
  return worst;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace setfusion::testing
