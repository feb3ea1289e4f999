#pragma once

#include <complex>

#include <Eigen/Core>

namespace wsample {

using Complex = std::complex<double>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ComplexVector = VectorX<Complex>;
using ComplexMatrix = MatrixX<Complex>;
using RealVector = VectorX<double>;

}  // namespace wsample
