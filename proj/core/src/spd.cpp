#include "setfusion/spd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfusion/error.hpp"

namespace setfusion {

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    fail(ErrorCode::BadDimension, os.str());
  }
  if (!m.allFinite()) fail(ErrorCode::NonFinite, "matrix has NaN or infinite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds tolerance at scale " << scale;
    fail(ErrorCode::NonSymmetric, os.str());
  }
}

EigenPair sym_eig(const Matrix& m) {
  require_symmetric(m);
  const Index n = m.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) fail(ErrorCode::NonFinite, "eigen-solver did not converge");

  // Eigen returns ascending order.
  EigenPair out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
  for (Index j = 0; j < n; ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < n; ++i) {
      const double a = std::abs(out.vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.vectors(arg, j) < 0.0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  const EigenPair eig = sym_eig(m_);
  const double top = eig.values(0);
  const double bottom = eig.values(eig.values.size() - 1);
  if (!(top > 0.0) || !(bottom > kSpdTolerance * top)) {
    std::ostringstream os;
    os << "eigenvalue range [" << bottom << ", " << top << "] is not positive definite";
    fail(ErrorCode::NotPositiveDefinite, os.str());
  }
}

bool SpdMatrix::is_spd(const Matrix& m) {
  try {
    SpdMatrix check(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Matrix spd_log(const SpdMatrix& c) {
  const EigenPair eig = sym_eig(c.matrix());
  const double top = eig.values(0);
  const Index n = eig.values.size();
  if (!(top > 0.0) || !(eig.values(n - 1) > kLogFloor * top)) {
    fail(ErrorCode::NotPositiveDefinite, "eigenvalue below the logarithm floor");
  }
  const Vector logs = eig.values.array().log().matrix();
  return symmetrized(eig.vectors * logs.asDiagonal() * eig.vectors.transpose());
}

Matrix sym_exp(const Matrix& s) {
  const EigenPair eig = sym_eig(s);
  const Vector exps = eig.values.array().exp().matrix();
  return symmetrized(eig.vectors * exps.asDiagonal() * eig.vectors.transpose());
}

SpdMatrix regularize_spd(const Matrix& c, double alpha) {
  require_symmetric(c);
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidConfig, "regularizer alpha must be positive");
  const Index d = c.rows();
  const double trace = c.trace();
  const Matrix identity = Matrix::Identity(d, d);
  if (trace <= kRegularizationFloor * static_cast<double>(d)) {
    return SpdMatrix(symmetrized(c) + kRegularizationFloor * identity);
  }
  return SpdMatrix(symmetrized(c) + (trace / alpha) * identity);
}

}  // namespace setfusion
