#pragma once

#include <string>

#include "setfusion/config.hpp"
#include "setfusion/spd.hpp"

namespace setfusion {

/// One image set: a d x n feature matrix whose columns are the frames.
struct ImageSet {
  Matrix features;
  std::string label;
  std::string set_id;

  Index dim() const noexcept { return features.rows(); }
  Index size() const noexcept { return features.cols(); }
};

/// Point on the Grassmann manifold G(q, d) held as a d x q orthonormal basis.
class GrassmannPoint {
 public:
  explicit GrassmannPoint(Matrix basis);

  const Matrix& basis() const noexcept { return basis_; }
  Index subspace_dim() const noexcept { return basis_.cols(); }
  Index ambient_dim() const noexcept { return basis_.rows(); }

 private:
  Matrix basis_;
};

/// Single Gaussian model and its determinant-one SPD embedding of size d+1.
struct GaussianDescriptor {
  Vector mean;
  SpdMatrix covariance;
  SpdMatrix embedding;
};

/// The three descriptors of one set in slot order (covariance, subspace, gaussian).
struct DescriptorTriple {
  SpdMatrix cov;
  GrassmannPoint subspace;
  GaussianDescriptor gauss;
  std::string label;
  std::string set_id;

  Index dim() const noexcept { return cov.dim(); }
};

Vector sample_mean(const Matrix& features);

/// Unbiased (n - 1) sample covariance, without regularization.
Matrix sample_covariance(const Matrix& features);

SpdMatrix covariance_descriptor(const ImageSet& set, double alpha);

/// Top-q eigenvectors of S S^T (uncentred), sign-normalized.
GrassmannPoint subspace_descriptor(const ImageSet& set, int q);

/// Maps N(mean, cov) to |A|^{-2/(d+1)} [[A A^T + m m^T, m], [m^T, 1]] with A the
/// Cholesky factor of cov.
SpdMatrix embed_gaussian(const Vector& mean, const SpdMatrix& cov);

GaussianDescriptor gaussian_descriptor(const ImageSet& set, double alpha);

DescriptorTriple encode_set(const ImageSet& set, const TrainConfig& cfg);

}  // namespace setfusion
