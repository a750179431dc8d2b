#include "setfusion/set_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {
namespace {

constexpr double kOrthonormalTolerance = 1e-10;
constexpr double kRankTolerance = 1e-12;

void require_samples(const ImageSet& set) {
  if (set.size() < 2) {
    std::ostringstream os;
    os << "set '" << set.set_id << "' has " << set.size() << " samples, need at least 2";
    fail(ErrorCode::TooFewSamples, os.str());
  }
  if (set.dim() < 1) fail(ErrorCode::BadDimension, "set '" + set.set_id + "' has zero feature dimension");
  if (!set.features.allFinite()) fail(ErrorCode::NonFinite, "set '" + set.set_id + "' has non-finite features");
}

}  // namespace

GrassmannPoint::GrassmannPoint(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    std::ostringstream os;
    os << "invalid Grassmann basis shape " << basis_.rows() << "x" << basis_.cols();
    fail(ErrorCode::BadDimension, os.str());
  }
  const Matrix gram = basis_.transpose() * basis_;
  const double err = (gram - Matrix::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalTolerance)) fail(ErrorCode::BadDimension, "basis is not orthonormal");
}

Vector sample_mean(const Matrix& features) {
  return features.rowwise().sum() / static_cast<double>(features.cols());
}

Matrix sample_covariance(const Matrix& features) {
  const Vector mean = sample_mean(features);
  const Matrix centred = features.colwise() - mean;
  return symmetrized(centred * centred.transpose() / static_cast<double>(features.cols() - 1));
}

SpdMatrix covariance_descriptor(const ImageSet& set, double alpha) {
  require_samples(set);
  return regularize_spd(sample_covariance(set.features), alpha);
}

GrassmannPoint subspace_descriptor(const ImageSet& set, int q) {
  require_samples(set);
  if (q < 1 || q > set.dim()) {
    std::ostringstream os;
    os << "subspace dimension " << q << " outside [1, " << set.dim() << "]";
    fail(ErrorCode::BadDimension, os.str());
  }
  const EigenPair eig = sym_eig(symmetrized(set.features * set.features.transpose()));
  const double top = eig.values(0);
  if (!(top > 0.0) || !(eig.values(q - 1) >= kRankTolerance * top)) {
    std::ostringstream os;
    os << "set '" << set.set_id << "' does not span " << q << " dimensions";
    fail(ErrorCode::RankDeficient, os.str());
  }
  return GrassmannPoint(eig.vectors.leftCols(q));
}

SpdMatrix embed_gaussian(const Vector& mean, const SpdMatrix& cov) {
  const Index d = cov.dim();
  if (mean.size() != d) fail(ErrorCode::DimensionMismatch, "mean and covariance sizes differ");
  Eigen::LLT<Matrix> chol(cov.matrix());
  if (chol.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");

  // |A| is the product of the Cholesky diagonal; work in logs to avoid overflow.
  const Matrix lower = chol.matrixL();
  const double log_det_a = lower.diagonal().array().log().sum();
  const double scale = std::exp(-2.0 * log_det_a / static_cast<double>(d + 1));

  Matrix block(d + 1, d + 1);
  block.topLeftCorner(d, d) = cov.matrix() + mean * mean.transpose();
  block.topRightCorner(d, 1) = mean;
  block.bottomLeftCorner(1, d) = mean.transpose();
  block(d, d) = 1.0;
  return SpdMatrix(symmetrized(scale * block));
}

GaussianDescriptor gaussian_descriptor(const ImageSet& set, double alpha) {
  require_samples(set);
  Vector mean = sample_mean(set.features);
  SpdMatrix cov = covariance_descriptor(set, alpha);
  SpdMatrix embedding = embed_gaussian(mean, cov);
  return GaussianDescriptor{std::move(mean), std::move(cov), std::move(embedding)};
}

DescriptorTriple encode_set(const ImageSet& set, const TrainConfig& cfg) {
  require_samples(set);
  SpdMatrix cov = covariance_descriptor(set, cfg.alpha);
  GrassmannPoint subspace = subspace_descriptor(set, cfg.q);
  Vector mean = sample_mean(set.features);
  SpdMatrix embedding = embed_gaussian(mean, cov);
  GaussianDescriptor gauss{std::move(mean), cov, std::move(embedding)};
  return DescriptorTriple{std::move(cov), std::move(subspace), std::move(gauss), set.label, set.set_id};
}

}  // namespace setfusion
