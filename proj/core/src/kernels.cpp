#include "setfusion/kernels.hpp"

#include <sstream>

#include "setfusion/error.hpp"
#include "setfusion/parallel.hpp"

namespace setfusion {
namespace {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << " dimensions differ: " << a << " vs " << b;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
}

// tr(A B) for symmetric A, B. Elementwise, so the value is bitwise symmetric in (A, B).
double log_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// Y Y^T; tr(P1 P2) = ||Y1^T Y2||_F^2.
Matrix projector(const GrassmannPoint& y) { return symmetrized(y.basis() * y.basis().transpose()); }

}  // namespace

double k_log(const SpdMatrix& c1, const SpdMatrix& c2) {
  require_same_dim(c1.dim(), c2.dim(), "SPD");
  return log_inner(spd_log(c1), spd_log(c2));
}

double k_proj(const GrassmannPoint& y1, const GrassmannPoint& y2) {
  require_same_dim(y1.ambient_dim(), y2.ambient_dim(), "ambient");
  require_same_dim(y1.subspace_dim(), y2.subspace_dim(), "subspace");
  return log_inner(projector(y1), projector(y2));
}

double k_gauss(const GaussianDescriptor& g1, const GaussianDescriptor& g2) {
  require_same_dim(g1.mean.size(), g2.mean.size(), "Gaussian");
  return k_log(g1.embedding, g2.embedding);
}

double kernel_value(const DescriptorTriple& a, const DescriptorTriple& b, KernelId id) {
  switch (id) {
    case KernelId::LogEuclidean: return k_log(a.cov, b.cov);
    case KernelId::Projection: return k_proj(a.subspace, b.subspace);
    case KernelId::GaussianEmbedded: return k_gauss(a.gauss, b.gauss);
  }
  fail(ErrorCode::InvalidConfig, "unknown kernel id");
}

Matrix kernel_feature(const DescriptorTriple& x, KernelId id) {
  switch (id) {
    case KernelId::LogEuclidean: return spd_log(x.cov);
    case KernelId::Projection: return projector(x.subspace);
    case KernelId::GaussianEmbedded: return spd_log(x.gauss.embedding);
  }
  fail(ErrorCode::InvalidConfig, "unknown kernel id");
}

std::vector<Matrix> kernel_features(std::span<const DescriptorTriple> xs, KernelId id) {
  std::vector<Matrix> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { out[i] = kernel_feature(xs[i], id); });
  return out;
}

double feature_inner(KernelId id, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << descriptor_name(id) << " descriptor shapes differ: " << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols();
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  return log_inner(a, b);
}

double trace_normalization(const Matrix& raw_gram) {
  const double trace = raw_gram.trace();
  if (!(trace > 1e-12)) {
    std::ostringstream os;
    os << "Gram trace " << trace << " too small to normalize";
    fail(ErrorCode::NormalizationDegenerate, os.str());
  }
  return static_cast<double>(raw_gram.rows()) / trace;
}

Matrix gram_matrix(std::span<const DescriptorTriple> xs, KernelId id, bool normalize) {
  const std::size_t n = xs.size();
  if (n == 0) fail(ErrorCode::BadDimension, "Gram matrix of an empty collection");
  for (const DescriptorTriple& x : xs) require_same_dim(x.dim(), xs.front().dim(), "descriptor");

  const std::vector<Matrix> features = kernel_features(xs, id);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

  Matrix gram(n, n);
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    try {
      gram(i, j) = feature_inner(id, features[i], features[j]);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "pair (" << xs[i].set_id << ", " << xs[j].set_id << "): " << e.what();
      throw Error(e.code(), os.str());
    }
  });
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();

  if (normalize) gram *= trace_normalization(gram);
  return gram;
}

KernelBank build_kernel_bank(std::span<const DescriptorTriple> xs, std::span<const KernelId> ids,
                             bool normalize) {
  KernelBank bank;
  for (KernelId id : ids) {
    KernelMatrix km{id, gram_matrix(xs, id, false), 1.0, normalize};
    if (normalize) {
      km.scale = trace_normalization(km.gram);
      km.gram *= km.scale;
    }
    bank.kernels.push_back(std::move(km));
  }
  return bank;
}

Vector cross_kernel_vector(const Matrix& test_feature, std::span<const Matrix> gallery_features,
                           KernelId id, double normalize_ref) {
  if (gallery_features.empty()) fail(ErrorCode::BadDimension, "empty gallery");
  Vector out(static_cast<Index>(gallery_features.size()));
  for (std::size_t i = 0; i < gallery_features.size(); ++i) {
    out(static_cast<Index>(i)) = feature_inner(id, test_feature, gallery_features[i]) * normalize_ref;
  }
  return out;
}

Vector cross_kernel_vector(const DescriptorTriple& test, std::span<const DescriptorTriple> gallery,
                           KernelId id, double normalize_ref) {
  if (gallery.empty()) fail(ErrorCode::BadDimension, "empty gallery");
  return cross_kernel_vector(kernel_feature(test, id), kernel_features(gallery, id), id, normalize_ref);
}

}  // namespace setfusion
