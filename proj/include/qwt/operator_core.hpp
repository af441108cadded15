#pragma once

// Dense complex Hermitian linear algebra used by every spectral construction
// in the toolkit: eigendecomposition, spectral projectors, Schatten norms,
// operator functions, Kronecker products and partial traces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "qwt/errors.hpp"

namespace qwt {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;  // general (possibly rectangular) matrix
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kRelativeZero = 1e-10;
inline constexpr double kProjectorTolerance = 1e-8;

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidOperator(std::string(what) + " has non-finite entries");
  }
}

/// Square complex matrix equal to its adjoint. Construction symmetrizes the
/// input, H <- (H + H^dagger)/2, so the stored entries are exactly Hermitian.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw ShapeError("Hermitian operator must be square, got " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()));
    }
    if (m.rows() == 0) throw ShapeError("Hermitian operator must have positive dimension");
    require_finite(m, "Hermitian operator");
    m_ = (m + m.adjoint()) * 0.5;
  }

  static HermitianOperator zero(Eigen::Index dim) { return HermitianOperator(Matrix::Zero(dim, dim)); }
  static HermitianOperator identity(Eigen::Index dim) { return HermitianOperator(Matrix::Identity(dim, dim)); }
  static HermitianOperator diagonal(const RealVector& d) {
    return HermitianOperator(Matrix(d.cast<cplx>().asDiagonal()));
  }
  /// |v><v| for an arbitrary (not necessarily normalized) vector.
  static HermitianOperator outer(const Vector& v) { return HermitianOperator(Matrix(v * v.adjoint())); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  double trace() const { return m_.trace().real(); }

  HermitianOperator operator+(const HermitianOperator& o) const { return HermitianOperator(m_ + o.m_); }
  HermitianOperator operator-(const HermitianOperator& o) const { return HermitianOperator(m_ - o.m_); }
  HermitianOperator operator*(double s) const { return HermitianOperator(m_ * s); }
  friend HermitianOperator operator*(double s, const HermitianOperator& h) { return h * s; }

  /// X H X^dagger, which stays Hermitian for any X of matching width.
  HermitianOperator conjugated_by(const Matrix& x) const { return HermitianOperator(Matrix(x * m_ * x.adjoint())); }

 private:
  Matrix m_;
};

struct EigenSystem {
  RealVector values;  // descending
  Matrix vectors;     // columns are eigenvectors, unitary
};

/// Hermitian eigendecomposition, eigenvalues sorted descending.
inline EigenSystem eig_h(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw InvalidOperator("eigendecomposition did not converge");
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Scale-relative zero threshold tau = 1e-10 (1 + ||H||_inf).
inline double zero_threshold(const RealVector& eigenvalues) {
  double norm = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return kRelativeZero * (1.0 + norm);
}

inline double zero_threshold(const HermitianOperator& h) { return zero_threshold(eig_h(h).values); }

/// Tr[A B] without forming the product.
inline cplx trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b.transpose()).sum(); }

inline double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  return trace_product(a.matrix(), b.matrix()).real();
}

/// Orthogonal projector P = P^dagger = P^2.
class Projector {
 public:
  Projector() = default;

  /// Projector onto the span of orthonormal columns.
  static Projector from_orthonormal_columns(const Matrix& columns, Eigen::Index dim) {
    Projector p;
    p.rank_ = columns.cols();
    p.op_ = columns.cols() ? HermitianOperator(Matrix(columns * columns.adjoint())) : HermitianOperator::zero(dim);
    return p;
  }

  /// Adopts an operator after checking idempotence within tolerance.
  static Projector verified(const HermitianOperator& h) {
    const Matrix& m = h.matrix();
    double defect = (m * m - m).cwiseAbs().maxCoeff();
    if (defect > kProjectorTolerance) {
      throw ValidationError("projector invariant P^2 = P violated by " + std::to_string(defect));
    }
    Projector p;
    p.op_ = h;
    p.rank_ = static_cast<Eigen::Index>(std::llround(h.trace()));
    return p;
  }

  static Projector identity(Eigen::Index dim) { return verified(HermitianOperator::identity(dim)); }
  static Projector zero(Eigen::Index dim) { return verified(HermitianOperator::zero(dim)); }

  const HermitianOperator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  Eigen::Index dim() const { return op_.dim(); }
  Eigen::Index rank() const { return rank_; }

  Projector complement() const {
    Projector p;
    p.op_ = HermitianOperator::identity(dim()) - op_;
    p.rank_ = dim() - rank_;
    return p;
  }

  /// P rho P as a Hermitian operator.
  HermitianOperator compress(const HermitianOperator& h) const {
    return HermitianOperator(Matrix(matrix() * h.matrix() * matrix()));
  }

 private:
  HermitianOperator op_;
  Eigen::Index rank_ = 0;
};

/// Unit-trace positive semidefinite operator.
class DensityOperator {
 public:
  DensityOperator() = default;

  explicit DensityOperator(HermitianOperator h) : op_(std::move(h)) {
    RealVector ev = eig_h(op_).values;
    if (ev.minCoeff() < -kRelativeZero) {
      throw ValidationError("density operator has negative eigenvalue " + std::to_string(ev.minCoeff()));
    }
    if (std::abs(op_.trace() - 1.0) > kRelativeZero) {
      throw ValidationError("density operator trace is " + std::to_string(op_.trace()) + ", expected 1");
    }
  }

  explicit DensityOperator(const Matrix& m) : DensityOperator(HermitianOperator(m)) {}

  static DensityOperator maximally_mixed(Eigen::Index dim) {
    return DensityOperator(HermitianOperator::identity(dim) * (1.0 / static_cast<double>(dim)));
  }
  static DensityOperator pure(const Vector& v) { return DensityOperator(HermitianOperator::outer(v.normalized())); }

  const HermitianOperator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  Eigen::Index dim() const { return op_.dim(); }

 private:
  HermitianOperator op_;
};

enum class Positivity { strict, weak };

/// Spectral projector {H > 0} (strict: eigenvalues > tau) or {H >= 0}
/// (weak: eigenvalues >= -tau), tau = 1e-10 (1 + ||H||_inf).
inline Projector positive_part_projector(const HermitianOperator& h, Positivity mode) {
  EigenSystem es = eig_h(h);
  const double tau = zero_threshold(es.values);
  Eigen::Index count = 0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    bool keep = mode == Positivity::strict ? es.values[k] > tau : es.values[k] >= -tau;
    if (keep) ++count;
  }
  // eigenvalues are descending, so the selected ones form a leading block
  return Projector::from_orthonormal_columns(es.vectors.leftCols(count), h.dim());
}

inline Projector support_projector(const HermitianOperator& h) { return positive_part_projector(h, Positivity::strict); }

inline RealVector singular_values(const Matrix& a) {
  if (a.size() == 0) return RealVector();
  require_finite(a, "matrix");
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

/// Schatten-1 norm (sum of singular values).
inline double trace_norm(const Matrix& a) { return singular_values(a).sum(); }
inline double trace_norm(const HermitianOperator& h) { return eig_h(h).values.cwiseAbs().sum(); }

/// Largest singular value.
inline double operator_norm(const Matrix& a) {
  RealVector s = singular_values(a);
  return s.size() ? s.maxCoeff() : 0.0;
}
inline double operator_norm(const HermitianOperator& h) { return eig_h(h).values.cwiseAbs().maxCoeff(); }

inline double lambda_min(const HermitianOperator& h) { return eig_h(h).values.minCoeff(); }
inline double lambda_max(const HermitianOperator& h) { return eig_h(h).values.maxCoeff(); }

/// f(H) through the spectral decomposition.
inline HermitianOperator apply_function(const HermitianOperator& h, const std::function<double(double)>& f) {
  EigenSystem es = eig_h(h);
  RealVector mapped = es.values.unaryExpr(f);
  return HermitianOperator(Matrix(es.vectors * mapped.cast<cplx>().asDiagonal() * es.vectors.adjoint()));
}

/// Square root of a PSD operator; negative eigenvalues within tolerance are clamped.
inline HermitianOperator sqrt_psd(const HermitianOperator& h) {
  EigenSystem es = eig_h(h);
  const double tau = zero_threshold(es.values);
  if (es.values.minCoeff() < -tau) throw NotPositive("square root of an operator with eigenvalue " + std::to_string(es.values.minCoeff()));
  RealVector mapped = es.values.unaryExpr([](double x) { return std::sqrt(std::max(x, 0.0)); });
  return HermitianOperator(Matrix(es.vectors * mapped.cast<cplx>().asDiagonal() * es.vectors.adjoint()));
}

/// S^{-1/2} on the support of a PSD operator S and zero on its kernel.
inline HermitianOperator inv_sqrt_on_support(const HermitianOperator& h) {
  EigenSystem es = eig_h(h);
  const double tau = zero_threshold(es.values);
  if (es.values.minCoeff() < -tau) {
    throw NotPositive("inverse square root needs a PSD operator, found eigenvalue " + std::to_string(es.values.minCoeff()));
  }
  RealVector mapped = es.values.unaryExpr([tau](double x) { return x > tau ? 1.0 / std::sqrt(x) : 0.0; });
  return HermitianOperator(Matrix(es.vectors * mapped.cast<cplx>().asDiagonal() * es.vectors.adjoint()));
}

/// Kronecker product A (x) B.
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(tensor(a.matrix(), b.matrix()));
}

enum class Subsystem { first, second };

/// Traces out one factor of an operator on C^{dim_first} (x) C^{dim_second}.
inline HermitianOperator partial_trace(const HermitianOperator& h, Eigen::Index dim_first, Eigen::Index dim_second,
                                       Subsystem traced) {
  if (dim_first <= 0 || dim_second <= 0 || dim_first * dim_second != h.dim()) {
    throw ShapeError("partial trace: " + std::to_string(dim_first) + "x" + std::to_string(dim_second) +
                     " does not factor dimension " + std::to_string(h.dim()));
  }
  const Matrix& m = h.matrix();
  if (traced == Subsystem::first) {
    Matrix out = Matrix::Zero(dim_second, dim_second);
    for (Eigen::Index a = 0; a < dim_first; ++a) out += m.block(a * dim_second, a * dim_second, dim_second, dim_second);
    return HermitianOperator(out);
  }
  Matrix out(dim_first, dim_first);
  for (Eigen::Index a = 0; a < dim_first; ++a) {
    for (Eigen::Index b = 0; b < dim_first; ++b) {
      out(a, b) = m.block(a * dim_second, b * dim_second, dim_second, dim_second).trace();
    }
  }
  return HermitianOperator(out);
}

/// Block-diagonal direct sum of square operators.
inline HermitianOperator direct_sum(const std::vector<HermitianOperator>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.dim();
  Matrix out = Matrix::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.dim(), b.dim()) = b.matrix();
    offset += b.dim();
  }
  return HermitianOperator(out);
}

}  // namespace qwt
