#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "wsample/errors.hpp"
#include "wsample/types.hpp"

namespace wsample {

/// Tallies for the cost contract of the projection kernel.
struct OpCounter {
  std::size_t inner_products = 0;
  std::size_t vector_updates = 0;
  std::size_t scalar_multiplications = 0;
};

/// Relative pivot threshold below which lu_solve reports singularity.
inline constexpr double kSingularPivot = 1e-14;

/// Solves A x = rhs by Gaussian elimination with partial pivoting. Throws SingularError
/// with the 0-based elimination step when the pivot falls below 1e-14 * max|A_ij|.
template <typename DerivedA, typename DerivedB>
VectorX<typename DerivedA::Scalar> lu_solve(const Eigen::MatrixBase<DerivedA>& A,
                                            const Eigen::MatrixBase<DerivedB>& rhs) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index k = A.rows();
  if (A.cols() != k) throw InputError("lu_solve needs a square matrix");
  if (rhs.size() != k) throw InputError("lu_solve right-hand side has the wrong length");

  MatrixX<Scalar> lu = A;
  VectorX<Scalar> x = rhs;
  const double scale = k == 0 ? 0.0 : lu.cwiseAbs().maxCoeff();
  for (Eigen::Index col = 0; col < k; ++col) {
    Eigen::Index pivot_row = col;
    const double pivot = lu.col(col).tail(k - col).cwiseAbs().maxCoeff(&pivot_row);
    pivot_row += col;
    if (!(pivot >= kSingularPivot * scale) || pivot == 0.0)
      throw SingularError("singular matrix at pivot " + std::to_string(col), static_cast<std::size_t>(col));
    if (pivot_row != col) {
      lu.row(col).swap(lu.row(pivot_row));
      std::swap(x[col], x[pivot_row]);
    }
    for (Eigen::Index r = col + 1; r < k; ++r) {
      const Scalar factor = lu(r, col) / lu(col, col);
      if (factor == Scalar(0)) continue;
      lu.row(r).tail(k - col - 1) -= factor * lu.row(col).tail(k - col - 1);
      x[r] -= factor * x[col];
    }
  }
  for (Eigen::Index r = k - 1; r >= 0; --r) {
    Scalar acc = x[r];
    for (Eigen::Index c = r + 1; c < k; ++c) acc -= lu(r, c) * x[c];
    x[r] = acc / lu(r, r);
  }
  return x;
}

/// max_ij |(V^* V - I)_ij|.
template <typename Derived>
double orthonormality_defect(const Eigen::MatrixBase<Derived>& V) {
  using Scalar = typename Derived::Scalar;
  if (V.cols() == 0) return 0.0;
  const MatrixX<Scalar> gram = V.adjoint() * V;
  return (gram - MatrixX<Scalar>::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff();
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Throws RankError when a
/// column keeps less than 1e-12 of its norm after projection.
template <typename Derived>
MatrixX<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> Q = M;
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    const double original = Q.col(j).norm();
    if (original == 0.0 || !std::isfinite(original))
      throw RankError("column " + std::to_string(j) + " is zero or non-finite");
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) {
        const Scalar proj = Q.col(i).dot(Q.col(j));
        Q.col(j) -= proj * Q.col(i);
      }
    const double remaining = Q.col(j).norm();
    if (remaining < 1e-12 * original)
      throw RankError("column " + std::to_string(j) + " is linearly dependent on earlier columns");
    Q.col(j) /= remaining;
  }
  return Q;
}

/// u - sum_i (w_i^* u) w_i for orthonormal columns w_i: k inner products and k
/// vector updates, 2kn scalar multiplications.
template <typename DerivedU, typename DerivedW>
VectorX<typename DerivedU::Scalar> project_perpendicular(const Eigen::MatrixBase<DerivedU>& u,
                                                         const Eigen::MatrixBase<DerivedW>& W,
                                                         OpCounter* counter = nullptr) {
  using Scalar = typename DerivedU::Scalar;
  if (W.rows() != u.size()) throw InputError("projection basis has the wrong number of rows");
  VectorX<Scalar> r = u;
  const auto n = static_cast<std::size_t>(u.size());
  for (Eigen::Index i = 0; i < W.cols(); ++i) {
    // Eigen's dot conjugates its left operand: this is conj(w_i)^T u.
    const Scalar c = W.col(i).dot(u);
    r.noalias() -= c * W.col(i);
    if (counter) {
      ++counter->inner_products;
      ++counter->vector_updates;
      counter->scalar_multiplications += 2 * n;
    }
  }
  return r;
}

/// Component of u inside span(W), for orthonormal W.
template <typename DerivedU, typename DerivedW>
VectorX<typename DerivedU::Scalar> project_parallel(const Eigen::MatrixBase<DerivedU>& u,
                                                    const Eigen::MatrixBase<DerivedW>& W) {
  return W * (W.adjoint() * u);
}

/// Singular values in decreasing order.
template <typename Derived>
RealVector singular_values(const Eigen::MatrixBase<Derived>& A) {
  using Plain = MatrixX<typename Derived::Scalar>;
  return Eigen::JacobiSVD<Plain>(Plain(A)).singularValues();
}

/// 2-norm condition number sigma_max / sigma_min. Returns +inf when sigma_min < 1e-300.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& A) {
  if (A.rows() != A.cols()) throw InputError("condition_number needs a square matrix");
  if (A.rows() == 0) return 1.0;
  const RealVector s = singular_values(A);
  const double smallest = s[s.size() - 1];
  if (!(smallest >= 1e-300)) return std::numeric_limits<double>::infinity();
  return s[0] / smallest;
}

}  // namespace wsample
