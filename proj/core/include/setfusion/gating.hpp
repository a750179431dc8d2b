#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "setfusion/kernels.hpp"

namespace setfusion {

/// Softmax gating parameters: one N-vector delta_q and one scalar rho_q per kernel.
struct GatingParams {
  std::vector<Vector> deltas;
  Vector rhos;

  std::size_t kernel_count() const noexcept { return deltas.size(); }
};

/// xi(q, i): weight of kernel q for gallery sample i. Columns sum to one.
struct GatingWeights {
  Matrix xi;

  double operator()(Index q, Index i) const { return xi(q, i); }
  Index kernel_count() const noexcept { return xi.rows(); }
  Index n_samples() const noexcept { return xi.cols(); }
};

struct GatingGradients {
  std::vector<Vector> deltas;
  Vector rhos;
};

/// Small random start: delta ~ U[-0.01/N, 0.01/N], rho ~ U[-0.01, 0.01].
GatingParams init_gating(std::size_t kernel_count, Index n_train, std::uint64_t seed);

/// xi_q(i) = softmax_q(delta_q^T K^q_{.i} + rho_q), max-subtracted.
GatingWeights gating_weights(const KernelBank& bank, const GatingParams& params);

/// Gate values of a single (test) sample given its Q kernel vectors.
Vector gating_weights_for(std::span<const Vector> kernel_columns, const GatingParams& params);

/// Between/within objective pieces for a fixed transform E:
/// H_x = tr(E^T Upsilon_x E), J = H_b / (H_w + H_b).
struct ProjectedObjective {
  double within = 0.0;
  double between = 0.0;
  double value() const;
};

ProjectedObjective projected_objective(const KernelBank& bank, const GatingWeights& weights,
                                       const Matrix& transform, std::span<const int> labels);

/// Analytic dJ/d(delta_q) and dJ/d(rho_q) with E held fixed.
GatingGradients gating_gradients(const KernelBank& bank, const GatingParams& params, const Matrix& transform,
                                 std::span<const int> labels);

/// delta <- delta + gamma grad, rho <- rho + gamma grad.
GatingParams gating_step(const GatingParams& params, const GatingGradients& grads, double gamma);

}  // namespace setfusion
