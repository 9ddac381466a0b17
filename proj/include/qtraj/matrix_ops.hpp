#ifndef QTRAJ_MATRIX_OPS_HPP
#define QTRAJ_MATRIX_OPS_HPP

#include <Eigen/Dense>
#include <complex>

namespace qtraj {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline Matrix dagger(const Matrix& m) { return m.adjoint(); }

// Largest entrywise modulus; the norm used by all validation tolerances.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// (m + m†)/2. Collapses the anti-Hermitian drift of accumulate/renormalize loops.
inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Column-major vectorization, the convention the superoperator acts in.
inline Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, Index d) {
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

// Hilbert-Schmidt inner product <a,b> = Tr(a† b); real for Hermitian pairs.
inline Complex hs_inner(const Matrix& a, const Matrix& b) {
  return (a.adjoint() * b).trace();
}

inline double hs_norm(const Matrix& a) { return a.norm(); }

}  // namespace qtraj

#endif
