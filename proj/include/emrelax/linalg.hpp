#pragma once

#include <Eigen/Dense>

#include "emrelax/common.hpp"

namespace emrelax {

using Mat10c = Eigen::Matrix<cplx, 10, 10>;
using Vec10c = Eigen::Matrix<cplx, 10, 1>;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;

/// exp(A) by Pade scaling and squaring.
MatXc expm(const MatXc& a);
Mat10c expm(const Mat10c& a);

/// Smallest eigenvalue of the Hermitian part of a.
double min_hermitian_eig(const MatXc& a);

/// Hermitian part (a + a^H)/2.
inline MatXc hermitian_part(const MatXc& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace emrelax
