#include "qtraj/fidelity.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m));
  Eigen::VectorXd vals = es.eigenvalues();
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < 0.0) {
      if (vals(i) < -kPsdTol) {
        std::ostringstream os;
        os << "matrix square root of non-PSD input (eigenvalue " << vals(i) << ")";
        throw NumericalError(os.str());
      }
      vals(i) = 0.0;
    }
  }
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw ValidationError("fidelity requires equal dimensions");
  }
  const Matrix root = psd_sqrt(rho.matrix());
  const Matrix inner = root * sigma.matrix() * root;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(inner), Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v > 0.0) sum += std::sqrt(v);
  }
  return sum * sum;
}

}  // namespace qtraj
