#include "emrelax/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace emrelax {

MatXc expm(const MatXc& a) { return a.exp(); }

Mat10c expm(const Mat10c& a) { return a.exp(); }

double min_hermitian_eig(const MatXc& a) {
  Eigen::SelfAdjointEigenSolver<MatXc> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace emrelax
