#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "setfusion/config.hpp"
#include "setfusion/gating.hpp"
#include "setfusion/kernels.hpp"

namespace setfusion {

/// Gated kernel-space scatter matrices over ordered sample pairs.
struct ScatterPair {
  Matrix within;
  Matrix between;
  Index n_within_pairs = 0;   ///< ordered same-label pairs, i == j included
  Index n_between_pairs = 0;

  Matrix total() const { return within + between; }
};

/// Upsilon_x = (1/N_x) sum_{(i,j) in x} sum_q xi_q(i) xi_q(j) (K_i - K_j)(K_i - K_j)^T.
/// Throws SingleClassGallery when there are no between-class pairs.
ScatterPair scatter_matrices(const KernelBank& bank, std::span<const int> labels, const GatingWeights& weights);

/// tr(E^T Ub E) / tr(E^T Ut E) with Ut = Uw + Ub.
double objective_value(const Matrix& transform, const ScatterPair& scatter);

/// Trace ratio tr(V^T B V) / tr(V^T T V).
double trace_ratio(const Matrix& v, const Matrix& between, const Matrix& total);

struct NullSpaceReduction {
  Matrix basis;            ///< A: eigenvectors of Ut above 1e-10 lambda_max
  Matrix reduced_between;  ///< A^T Ub A
  Matrix reduced_total;    ///< A^T Ut A, positive definite
  Index effective_dim = 0;
};

NullSpaceReduction remove_null_space(const Matrix& within, const Matrix& between);

struct TraceRatioResult {
  Matrix projection;        ///< V, d_e x d_w, orthonormal columns
  Matrix null_space_basis;  ///< A, filled by solve_trace_ratio
  std::vector<double> ratio_history;
  Index effective_dim = 0;
  int iterations = 0;

  double ratio() const { return ratio_history.empty() ? 0.0 : ratio_history.back(); }
};

/// Iterative trace-ratio maximization over orthonormal V from a seeded random
/// start. Each step takes the top-d_w eigenvectors of (B - lambda T), then
/// re-orients them by the eigenvectors of V V^T T V V^T. Stops when lambda moves
/// by less than eps or after max_iters steps.
TraceRatioResult itr_solve(const Matrix& reduced_between, const Matrix& reduced_total, Index target_dim,
                           int max_iters, double eps, std::uint64_t seed);

/// Null-space removal followed by itr_solve; the transform is E = A V.
/// target_dim is clamped to the effective dimension.
TraceRatioResult solve_trace_ratio(const ScatterPair& scatter, Index target_dim, int max_iters, double eps,
                                   std::uint64_t seed);

/// Generalized-eigenvector ratio-trace solution (top-d_w of Ut^+ Ub). Kept as a
/// comparison baseline; the trainer uses the trace-ratio solver.
Matrix ratio_trace_solution(const ScatterPair& scatter, Index target_dim);

/// Trained model. The gallery part (descriptors, feature cache, class names)
/// is attached by fit_model or load_model; train() leaves it empty.
struct ModelState {
  TrainConfig config;
  Matrix transform;               ///< E, N x d_w
  GatingParams gating;
  GatingWeights train_weights;    ///< xi at the final gating parameters
  KernelBank bank;
  std::vector<int> labels;
  std::vector<double> objective_trace;
  int iterations = 0;

  std::vector<DescriptorTriple> gallery;
  std::vector<std::string> class_names;
  /// gallery_features[q][i]: kernel feature of gallery set i for bank kernel q.
  std::vector<std::vector<Matrix>> gallery_features;

  Index n_train() const noexcept { return bank.n_train(); }
  Index target_dim() const noexcept { return transform.cols(); }
};

/// Alternates gating weights, scatter, trace-ratio solve and gating ascent.
ModelState train(const KernelBank& bank, std::span<const int> labels, const TrainConfig& cfg);

/// Seed used for the trace-ratio start inside train().
std::uint64_t itr_seed(const TrainConfig& cfg);

/// Encode, build the bank, train and attach the gallery.
ModelState fit_model(std::span<const ImageSet> gallery, const TrainConfig& cfg);

/// Fills gallery, class names and the feature cache of a trained model.
void attach_gallery(ModelState& model, std::vector<DescriptorTriple> gallery, std::vector<std::string> class_names);

/// q capped at min(d, smallest set size) over the gallery.
int effective_subspace_dim(std::span<const ImageSet> gallery, int q);

}  // namespace setfusion
