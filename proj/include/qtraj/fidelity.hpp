#ifndef QTRAJ_FIDELITY_HPP
#define QTRAJ_FIDELITY_HPP

#include "qtraj/density_matrix.hpp"

namespace qtraj {

/// Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
/// Symmetric, in [0,1], equal to 1 iff the states coincide.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Square root of a PSD Hermitian matrix; eigenvalues in [-1e-10, 0) clamp to 0.
Matrix psd_sqrt(const Matrix& m);

}  // namespace qtraj

#endif
