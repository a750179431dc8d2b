#pragma once

#include <Eigen/Dense>

namespace setfusion {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative symmetry tolerance for inputs claimed to be symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;
/// Eigenvalues at or below this fraction of the largest make a matrix "not SPD".
inline constexpr double kSpdTolerance = 1e-10;
/// Eigenvalues at or below this fraction of the largest are rejected by spd_log.
inline constexpr double kLogFloor = 1e-12;
/// Additive ridge used when the trace regularizer degenerates (zero-trace input).
inline constexpr double kRegularizationFloor = 1e-8;

/// Eigen-decomposition of a symmetric matrix.
///
/// `values` are sorted in descending order and column i of `vectors` belongs
/// to `values[i]`. Each eigenvector is sign-normalized so that its
/// largest-magnitude entry (first one on ties) is positive, which makes the
/// output a deterministic function of the input.
struct EigenPair {
  Vector values;
  Matrix vectors;
};

/// Throws NonFinite / NonSymmetric when `m` is not a finite symmetric matrix.
void require_symmetric(const Matrix& m);

EigenPair sym_eig(const Matrix& m);

/// Symmetric positive-definite matrix. Construction validates symmetry,
/// finiteness and strict positivity of the spectrum.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  /// Non-throwing form of the constructor's check.
  static bool is_spd(const Matrix& m);

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) { return a.m_ == b.m_; }

 private:
  Matrix m_;
};

/// Principal matrix logarithm V diag(ln l) V^T.
Matrix spd_log(const SpdMatrix& c);

/// Matrix exponential of a symmetric matrix, V diag(exp l) V^T.
Matrix sym_exp(const Matrix& s);

/// C + (tr(C)/alpha) I, or C + 1e-8 I when tr(C) <= 1e-8 d.
/// `alpha` may be +infinity, which disables the trace ridge.
SpdMatrix regularize_spd(const Matrix& c, double alpha);

/// 0.5 (m + m^T); used wherever round-off could break exact symmetry.
Matrix symmetrized(const Matrix& m);

}  // namespace setfusion
