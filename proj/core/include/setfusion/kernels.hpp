#pragma once

#include <span>
#include <vector>

#include "setfusion/config.hpp"
#include "setfusion/set_model.hpp"

namespace setfusion {

/// tr(log C1 log C2).
double k_log(const SpdMatrix& c1, const SpdMatrix& c2);
/// ||Y1^T Y2||_F^2, in [0, q].
double k_proj(const GrassmannPoint& y1, const GrassmannPoint& y2);
/// Log-Euclidean kernel on the (d+1)-dimensional Gaussian embeddings.
double k_gauss(const GaussianDescriptor& g1, const GaussianDescriptor& g2);

double kernel_value(const DescriptorTriple& a, const DescriptorTriple& b, KernelId id);

/// Per-descriptor quantity the kernel is an inner product of: the matrix log
/// for the two SPD kernels, the projector Y Y^T for the projection kernel.
/// Precomputing it turns a Gram matrix into O(N^2) cheap inner products.
Matrix kernel_feature(const DescriptorTriple& x, KernelId id);
std::vector<Matrix> kernel_features(std::span<const DescriptorTriple> xs, KernelId id);
double feature_inner(KernelId id, const Matrix& a, const Matrix& b);

/// One Gram matrix of the bank, possibly trace-normalized by `scale`.
struct KernelMatrix {
  KernelId id;
  Matrix gram;
  double scale = 1.0;        ///< multiplier applied to raw kernel values
  bool normalized = false;
};

/// The Q training Gram matrices, in slot order.
struct KernelBank {
  std::vector<KernelMatrix> kernels;

  std::size_t size() const noexcept { return kernels.size(); }
  Index n_train() const noexcept { return kernels.empty() ? 0 : kernels.front().gram.rows(); }
  const Matrix& gram(std::size_t q) const { return kernels[q].gram; }
};

/// N / tr(K); throws NormalizationDegenerate when tr(K) <= 1e-12.
double trace_normalization(const Matrix& raw_gram);

/// K[i][j] = k(x_i, x_j) over the upper triangle, mirrored; with `normalize`
/// the result is N K / tr(K).
Matrix gram_matrix(std::span<const DescriptorTriple> xs, KernelId id, bool normalize);

KernelBank build_kernel_bank(std::span<const DescriptorTriple> xs, std::span<const KernelId> ids,
                             bool normalize);

/// Entry i is k(test, gallery_i) * normalize_ref.
Vector cross_kernel_vector(const DescriptorTriple& test, std::span<const DescriptorTriple> gallery,
                           KernelId id, double normalize_ref);

/// Same as above from precomputed gallery features.
Vector cross_kernel_vector(const Matrix& test_feature, std::span<const Matrix> gallery_features,
                           KernelId id, double normalize_ref);

}  // namespace setfusion
