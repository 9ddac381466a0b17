#include "qtraj/density_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

DensityMatrix DensityMatrix::make(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ValidationError("density matrix must be square and non-empty");
  }
  const double herm_residual = max_abs(m - m.adjoint());
  if (herm_residual > kHermiticityTol) {
    std::ostringstream os;
    os << "density matrix not Hermitian (residual " << herm_residual << ")";
    throw ValidationError(os.str());
  }
  Matrix h = hermitize(m);
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol) {
    std::ostringstream os;
    os << "density matrix not positive semidefinite (min eigenvalue " << min_eig << ")";
    throw ValidationError(os.str());
  }
  return DensityMatrix(std::move(h));
}

DensityMatrix DensityMatrix::mixed(Index d) {
  if (d <= 0) throw ValidationError("dimension must be positive");
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::basis_state(Index d, Index k) {
  if (d <= 0 || k < 0 || k >= d) throw ValidationError("basis index out of range");
  Matrix m = Matrix::Zero(d, d);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace qtraj
