#include "setfusion/gating.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {
namespace {

void require_shapes(const KernelBank& bank, const GatingParams& params) {
  const Index n = bank.n_train();
  bool ok = params.deltas.size() == bank.size() && params.rhos.size() == static_cast<Index>(bank.size());
  for (std::size_t q = 0; ok && q < params.deltas.size(); ++q) {
    ok = params.deltas[q].size() == n && bank.gram(q).rows() == n && bank.gram(q).cols() == n;
  }
  if (!ok) {
    std::ostringstream os;
    os << "gating parameters do not match a bank of " << bank.size() << " kernels over " << n << " samples";
    fail(ErrorCode::ShapeMismatch, os.str());
  }
}

void require_labels(const KernelBank& bank, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != bank.n_train()) {
    fail(ErrorCode::ShapeMismatch, "label count does not match the kernel bank");
  }
}

// In-place softmax over one column of scores.
void softmax(Eigen::Ref<Vector> scores) {
  const double top = scores.maxCoeff();
  scores = (scores.array() - top).exp().matrix();
  scores /= scores.sum();
}

// Pair weights c^q_ij = xi_q(i) xi_q(j) ||E^T (K^q_{.i} - K^q_{.j})||^2, one N x N matrix per kernel.
std::vector<Matrix> pair_terms(const KernelBank& bank, const GatingWeights& weights, const Matrix& transform) {
  const Index n = bank.n_train();
  if (transform.rows() != n) fail(ErrorCode::ShapeMismatch, "transform rows do not match the kernel bank");
  std::vector<Matrix> terms;
  terms.reserve(bank.size());
  for (std::size_t q = 0; q < bank.size(); ++q) {
    const Matrix projected = transform.transpose() * bank.gram(q);
    Matrix c = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = j + 1; i < n; ++i) {
        const double s = (projected.col(i) - projected.col(j)).squaredNorm();
        c(i, j) = c(j, i) = weights(static_cast<Index>(q), i) * weights(static_cast<Index>(q), j) * s;
      }
    }
    terms.push_back(std::move(c));
  }
  return terms;
}

struct PairCounts {
  double within = 0.0;
  double between = 0.0;
};

PairCounts count_pairs(std::span<const int> labels) {
  PairCounts counts;
  for (int a : labels)
    for (int b : labels) (a == b ? counts.within : counts.between) += 1.0;
  return counts;
}

}  // namespace

GatingParams init_gating(std::size_t kernel_count, Index n_train, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double delta_range = 0.01 / static_cast<double>(n_train);
  std::uniform_real_distribution<double> delta_dist(-delta_range, delta_range);
  std::uniform_real_distribution<double> rho_dist(-0.01, 0.01);

  GatingParams params;
  params.rhos.resize(static_cast<Index>(kernel_count));
  for (std::size_t q = 0; q < kernel_count; ++q) {
    Vector d(n_train);
    for (Index i = 0; i < n_train; ++i) d(i) = delta_dist(rng);
    params.deltas.push_back(std::move(d));
    params.rhos(static_cast<Index>(q)) = rho_dist(rng);
  }
  return params;
}

GatingWeights gating_weights(const KernelBank& bank, const GatingParams& params) {
  require_shapes(bank, params);
  const Index kernels = static_cast<Index>(bank.size());
  const Index n = bank.n_train();
  Matrix xi(kernels, n);
  for (Index q = 0; q < kernels; ++q) {
    // delta_q^T K_{.i} for every i at once; K is symmetric.
    xi.row(q) = (bank.gram(static_cast<std::size_t>(q)) * params.deltas[static_cast<std::size_t>(q)]).transpose();
    xi.row(q).array() += params.rhos(q);
  }
  for (Index i = 0; i < n; ++i) softmax(xi.col(i));
  return GatingWeights{std::move(xi)};
}

Vector gating_weights_for(std::span<const Vector> kernel_columns, const GatingParams& params) {
  if (kernel_columns.size() != params.kernel_count()) fail(ErrorCode::ShapeMismatch, "kernel count mismatch");
  Vector scores(static_cast<Index>(kernel_columns.size()));
  for (std::size_t q = 0; q < kernel_columns.size(); ++q) {
    if (kernel_columns[q].size() != params.deltas[q].size()) fail(ErrorCode::ShapeMismatch, "kernel vector length mismatch");
    scores(static_cast<Index>(q)) = params.deltas[q].dot(kernel_columns[q]) + params.rhos(static_cast<Index>(q));
  }
  softmax(scores);
  return scores;
}

double ProjectedObjective::value() const {
  const double total = within + between;
  if (!(total > 1e-15)) fail(ErrorCode::DegenerateDenominator, "projected total scatter vanishes");
  return between / total;
}

ProjectedObjective projected_objective(const KernelBank& bank, const GatingWeights& weights,
                                       const Matrix& transform, std::span<const int> labels) {
  require_labels(bank, labels);
  const std::vector<Matrix> terms = pair_terms(bank, weights, transform);
  const PairCounts counts = count_pairs(labels);
  if (counts.between == 0.0) fail(ErrorCode::SingleClassGallery, "gallery has a single class");

  ProjectedObjective h;
  const Index n = bank.n_train();
  for (const Matrix& c : terms) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) (labels[i] == labels[j] ? h.within : h.between) += c(i, j);
  }
  h.within /= counts.within;
  h.between /= counts.between;
  return h;
}

GatingGradients gating_gradients(const KernelBank& bank, const GatingParams& params, const Matrix& transform,
                                 std::span<const int> labels) {
  require_shapes(bank, params);
  require_labels(bank, labels);
  const GatingWeights weights = gating_weights(bank, params);
  const std::vector<Matrix> terms = pair_terms(bank, weights, transform);
  const PairCounts counts = count_pairs(labels);
  if (counts.between == 0.0) fail(ErrorCode::SingleClassGallery, "gallery has a single class");

  const Index n = bank.n_train();
  const std::size_t kernels = bank.size();

  Matrix total = Matrix::Zero(n, n);
  for (const Matrix& c : terms) total += c;

  double h_within = 0.0;
  double h_between = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) (labels[i] == labels[j] ? h_within : h_between) += total(i, j);
  h_within /= counts.within;
  h_between /= counts.between;
  const double denom = (h_within + h_between) * (h_within + h_between);
  if (!(denom > 0.0)) fail(ErrorCode::DegenerateDenominator, "projected total scatter vanishes");

  GatingGradients grads;
  grads.rhos.resize(static_cast<Index>(kernels));
  for (std::size_t q = 0; q < kernels; ++q) {
    // u_i = sum_j (c^q_ij - xi_q(i) sum_k c^k_ij), split by pair type.
    Vector u_within = Vector::Zero(n);
    Vector u_between = Vector::Zero(n);
    const Matrix& c = terms[q];
    for (Index i = 0; i < n; ++i) {
      const double xi_i = weights(static_cast<Index>(q), i);
      for (Index j = 0; j < n; ++j) {
        const double v = c(i, j) - xi_i * total(i, j);
        (labels[i] == labels[j] ? u_within(i) : u_between(i)) += v;
      }
    }
    const Vector d_within = (2.0 / counts.within) * (bank.gram(q) * u_within);
    const Vector d_between = (2.0 / counts.between) * (bank.gram(q) * u_between);
    const double r_within = (2.0 / counts.within) * u_within.sum();
    const double r_between = (2.0 / counts.between) * u_between.sum();

    grads.deltas.push_back((d_between * h_within - d_within * h_between) / denom);
    grads.rhos(static_cast<Index>(q)) = (r_between * h_within - r_within * h_between) / denom;
  }
  return grads;
}

GatingParams gating_step(const GatingParams& params, const GatingGradients& grads, double gamma) {
  if (grads.deltas.size() != params.deltas.size() || grads.rhos.size() != params.rhos.size()) {
    fail(ErrorCode::ShapeMismatch, "gradient shape does not match gating parameters");
  }
  bool finite = grads.rhos.allFinite();
  for (const Vector& g : grads.deltas) finite = finite && g.allFinite();
  if (!finite) fail(ErrorCode::NonFiniteGradient, "gating gradient has non-finite entries");

  GatingParams next = params;
  for (std::size_t q = 0; q < params.deltas.size(); ++q) {
    if (grads.deltas[q].size() != params.deltas[q].size()) fail(ErrorCode::ShapeMismatch, "gradient length mismatch");
    next.deltas[q] += gamma * grads.deltas[q];
  }
  next.rhos += gamma * grads.rhos;
  return next;
}

}  // namespace setfusion
