#include "setfusion/metric_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "setfusion/error.hpp"

namespace setfusion {
namespace {

constexpr double kNullSpaceTolerance = 1e-10;
constexpr double kEigenGapTolerance = 1e-12;
constexpr double kAscentSlack = 1e-14;
constexpr int kMaxStepHalvings = 30;

// Weighted graph Laplacian form: sum_ij w_ij (k_i - k_j)(k_i - k_j)^T = 2 K (diag(W 1) - W) K
// for symmetric W, which keeps the scatter at O(N^3) instead of O(N^4).
Matrix laplacian_scatter(const Matrix& gram, const Matrix& pair_weights) {
  Matrix laplacian = -pair_weights;
  laplacian.diagonal() += pair_weights.rowwise().sum();
  return 2.0 * gram * laplacian * gram;
}

Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

double max_abs_change(const GatingParams& a, const GatingParams& b) {
  double change = (a.rhos - b.rhos).cwiseAbs().maxCoeff();
  for (std::size_t q = 0; q < a.deltas.size(); ++q) {
    change = std::max(change, (a.deltas[q] - b.deltas[q]).cwiseAbs().maxCoeff());
  }
  return change;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ScatterPair scatter_matrices(const KernelBank& bank, std::span<const int> labels, const GatingWeights& weights) {
  const Index n = bank.n_train();
  if (static_cast<Index>(labels.size()) != n) fail(ErrorCode::ShapeMismatch, "label count does not match the kernel bank");
  if (weights.kernel_count() != static_cast<Index>(bank.size()) || weights.n_samples() != n) {
    fail(ErrorCode::ShapeMismatch, "gating weights do not match the kernel bank");
  }

  Matrix same(n, n);
  ScatterPair out;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const bool s = labels[i] == labels[j];
      same(i, j) = s ? 1.0 : 0.0;
      ++(s ? out.n_within_pairs : out.n_between_pairs);
    }
  }
  if (out.n_between_pairs == 0) fail(ErrorCode::SingleClassGallery, "gallery has a single class");

  out.within = Matrix::Zero(n, n);
  out.between = Matrix::Zero(n, n);
  for (std::size_t q = 0; q < bank.size(); ++q) {
    const Vector xi = weights.xi.row(static_cast<Index>(q)).transpose();
    const Matrix outer = xi * xi.transpose();
    const Matrix w_within = outer.cwiseProduct(same);
    const Matrix w_between = outer - w_within;
    out.within += laplacian_scatter(bank.gram(q), w_within);
    out.between += laplacian_scatter(bank.gram(q), w_between);
  }
  out.within = symmetrized(out.within) / static_cast<double>(out.n_within_pairs);
  out.between = symmetrized(out.between) / static_cast<double>(out.n_between_pairs);
  return out;
}

double trace_ratio(const Matrix& v, const Matrix& between, const Matrix& total) {
  const double denom = (v.transpose() * total * v).trace();
  if (!(denom > 1e-15)) fail(ErrorCode::DegenerateDenominator, "tr(V^T Ut V) vanishes");
  return (v.transpose() * between * v).trace() / denom;
}

double objective_value(const Matrix& transform, const ScatterPair& scatter) {
  if (transform.rows() != scatter.within.rows()) fail(ErrorCode::ShapeMismatch, "transform rows do not match scatter");
  return trace_ratio(transform, scatter.between, scatter.total());
}

NullSpaceReduction remove_null_space(const Matrix& within, const Matrix& between) {
  if (within.rows() != between.rows() || within.cols() != between.cols()) {
    fail(ErrorCode::ShapeMismatch, "scatter matrices differ in shape");
  }
  const Matrix total = symmetrized(within + between);
  const EigenPair eig = sym_eig(total);
  const double top = eig.values(0);
  if (!(top > 1e-15)) fail(ErrorCode::ZeroTotalScatter, "total scatter is zero");

  Index kept = 0;
  while (kept < eig.values.size() && eig.values(kept) > kNullSpaceTolerance * top) ++kept;

  NullSpaceReduction out;
  out.basis = eig.vectors.leftCols(kept);
  out.reduced_total = symmetrized(out.basis.transpose() * total * out.basis);
  out.reduced_between = symmetrized(out.basis.transpose() * between * out.basis);
  out.effective_dim = kept;
  return out;
}

TraceRatioResult itr_solve(const Matrix& reduced_between, const Matrix& reduced_total, Index target_dim,
                           int max_iters, double eps, std::uint64_t seed) {
  const Index de = reduced_total.rows();
  if (de < 1 || reduced_total.cols() != de || reduced_between.rows() != de || reduced_between.cols() != de) {
    fail(ErrorCode::BadDimension, "trace-ratio matrices must be square and of equal size");
  }
  if (target_dim < 1 || target_dim > de) {
    std::ostringstream os;
    os << "target dimension " << target_dim << " outside [1, " << de << "]";
    fail(ErrorCode::BadDimension, os.str());
  }
  if (max_iters < 1) fail(ErrorCode::BadDimension, "trace-ratio solver needs at least one iteration");

  TraceRatioResult result;
  result.effective_dim = de;
  Matrix v = random_orthonormal(de, target_dim, seed);
  double lambda = trace_ratio(v, reduced_between, reduced_total);
  result.ratio_history.push_back(lambda);

  for (int it = 1; it <= max_iters; ++it) {
    const EigenPair diff = sym_eig(symmetrized(reduced_between - lambda * reduced_total));
    if (target_dim < de && std::abs(diff.values(target_dim - 1) - diff.values(target_dim)) <= kEigenGapTolerance) {
      spdlog::debug("trace-difference eigen-gap degenerate at step {} (lambda {})", it, lambda);
    }
    v = diff.vectors.leftCols(target_dim);

    // Re-orient within span(V) by the eigenvectors of V V^T T V V^T.
    const Matrix restricted = symmetrized(v * (v.transpose() * reduced_total * v) * v.transpose());
    v = sym_eig(restricted).vectors.leftCols(target_dim);

    const double next = trace_ratio(v, reduced_between, reduced_total);
    result.ratio_history.push_back(next);
    result.iterations = it;
    const bool done = std::abs(next - lambda) < eps;
    lambda = next;
    if (done) break;
  }
  result.projection = std::move(v);
  return result;
}

TraceRatioResult solve_trace_ratio(const ScatterPair& scatter, Index target_dim, int max_iters, double eps,
                                   std::uint64_t seed) {
  NullSpaceReduction reduced = remove_null_space(scatter.within, scatter.between);
  const Index dw = std::min(target_dim, reduced.effective_dim);
  TraceRatioResult result = itr_solve(reduced.reduced_between, reduced.reduced_total, dw, max_iters, eps, seed);
  result.null_space_basis = std::move(reduced.basis);
  return result;
}

Matrix ratio_trace_solution(const ScatterPair& scatter, Index target_dim) {
  const NullSpaceReduction reduced = remove_null_space(scatter.within, scatter.between);
  const Index dw = std::min(target_dim, reduced.effective_dim);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(reduced.reduced_between, reduced.reduced_total);
  if (solver.info() != Eigen::Success) fail(ErrorCode::NonFinite, "generalized eigen-solver failed");
  const Matrix top = solver.eigenvectors().rightCols(dw).rowwise().reverse();
  return reduced.basis * top;
}

std::uint64_t itr_seed(const TrainConfig& cfg) { return splitmix64(cfg.seed ^ 0x1f2e3d4c5b6a7988ULL); }

ModelState train(const KernelBank& bank, std::span<const int> labels, const TrainConfig& cfg) {
  cfg.validate();
  const Index n = bank.n_train();
  if (bank.size() == 0) fail(ErrorCode::InvalidConfig, "kernel bank is empty");
  if (n < 2) fail(ErrorCode::TooFewSamples, "training needs at least two gallery sets");
  if (static_cast<Index>(labels.size()) != n) fail(ErrorCode::ShapeMismatch, "label count does not match the kernel bank");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    fail(ErrorCode::SingleClassGallery, "training needs at least two classes");
  }

  ModelState model;
  model.config = cfg;
  model.bank = bank;
  model.labels.assign(labels.begin(), labels.end());

  GatingParams params = init_gating(bank.size(), n, cfg.seed);
  const std::uint64_t v_seed = itr_seed(cfg);
  Matrix previous_transform;
  bool warned_clamp = false;

  for (int it = 1; it <= cfg.outer_iters; ++it) {
    const GatingWeights weights = gating_weights(bank, params);
    const ScatterPair scatter = scatter_matrices(bank, labels, weights);
    const TraceRatioResult solved = solve_trace_ratio(scatter, cfg.target_dim, cfg.itr_iters, cfg.eps, v_seed);
    if (!warned_clamp && solved.projection.cols() < cfg.target_dim) {
      spdlog::warn("target dimension {} clamped to effective dimension {}", cfg.target_dim, solved.projection.cols());
      warned_clamp = true;
    }
    Matrix transform = solved.null_space_basis * solved.projection;
    model.objective_trace.push_back(objective_value(transform, scatter));

    GatingParams next = params;
    if (cfg.gamma > 0.0) {
      const GatingGradients grads = gating_gradients(bank, params, transform, labels);
      const double before = projected_objective(bank, weights, transform, labels).value();
      double gamma = cfg.gamma;
      bool accepted = false;
      for (int attempt = 0; attempt <= kMaxStepHalvings && !accepted; ++attempt) {
        GatingParams candidate = gating_step(params, grads, gamma);
        const double after = projected_objective(bank, gating_weights(bank, candidate), transform, labels).value();
        if (after >= before - kAscentSlack) {
          next = std::move(candidate);
          accepted = true;
        } else {
          gamma *= 0.5;
        }
      }
      if (!accepted) spdlog::debug("gating step rejected at iteration {}", it);
    }

    bool converged = false;
    if (it > 2) {
      const bool params_settled = max_abs_change(next, params) < cfg.eps;
      const bool transform_settled = previous_transform.rows() == transform.rows() &&
                                     previous_transform.cols() == transform.cols() &&
                                     (transform - previous_transform).cwiseAbs().maxCoeff() < cfg.eps;
      converged = params_settled || transform_settled;
    }
    params = std::move(next);
    previous_transform = transform;
    model.transform = std::move(transform);
    model.iterations = it;
    if (converged) break;
  }

  model.train_weights = gating_weights(bank, params);
  model.gating = std::move(params);
  return model;
}

int effective_subspace_dim(std::span<const ImageSet> gallery, int q) {
  Index cap = std::numeric_limits<Index>::max();
  for (const ImageSet& s : gallery) cap = std::min({cap, s.dim(), s.size()});
  return static_cast<int>(std::min<Index>(q, cap));
}

void attach_gallery(ModelState& model, std::vector<DescriptorTriple> gallery, std::vector<std::string> class_names) {
  if (static_cast<Index>(gallery.size()) != model.n_train()) {
    fail(ErrorCode::ShapeMismatch, "gallery size does not match the trained model");
  }
  model.gallery_features.clear();
  for (const KernelMatrix& km : model.bank.kernels) {
    model.gallery_features.push_back(kernel_features(gallery, km.id));
  }
  model.gallery = std::move(gallery);
  model.class_names = std::move(class_names);
}

ModelState fit_model(std::span<const ImageSet> gallery, const TrainConfig& cfg) {
  cfg.validate();
  if (gallery.size() < 2) fail(ErrorCode::TooFewSamples, "training needs at least two gallery sets");
  for (const ImageSet& s : gallery) {
    if (s.dim() != gallery.front().dim()) fail(ErrorCode::DimensionMismatch, "set '" + s.set_id + "' has a different feature dimension");
  }

  TrainConfig effective = cfg;
  effective.q = effective_subspace_dim(gallery, cfg.q);

  std::vector<std::string> class_names;
  for (const ImageSet& s : gallery) class_names.push_back(s.label);
  std::sort(class_names.begin(), class_names.end());
  class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());

  std::vector<int> labels;
  labels.reserve(gallery.size());
  for (const ImageSet& s : gallery) {
    labels.push_back(static_cast<int>(std::lower_bound(class_names.begin(), class_names.end(), s.label) - class_names.begin()));
  }

  std::vector<DescriptorTriple> triples;
  triples.reserve(gallery.size());
  for (const ImageSet& s : gallery) triples.push_back(encode_set(s, effective));

  const KernelBank bank = build_kernel_bank(triples, effective.descriptors, effective.normalize_kernels);
  ModelState model = train(bank, labels, effective);
  attach_gallery(model, std::move(triples), std::move(class_names));
  return model;
}

}  // namespace setfusion
