#ifndef QTRAJ_DENSITY_MATRIX_HPP
#define QTRAJ_DENSITY_MATRIX_HPP

#include "qtraj/matrix_ops.hpp"

namespace qtraj {

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;

/// Hermitian, positive semidefinite, trace-one state. Construction goes
/// through make(), which re-Hermitizes via (m + m†)/2 and then validates.
class DensityMatrix {
 public:
  static DensityMatrix make(const Matrix& m);

  /// Completely mixed state 1/d.
  static DensityMatrix mixed(Index d);

  /// Pure state |k><k| in the computational basis.
  static DensityMatrix basis_state(Index d, Index k);

  const Matrix& matrix() const { return mat_; }
  Index dim() const { return mat_.rows(); }

  double min_eigenvalue() const;

 private:
  explicit DensityMatrix(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

}  // namespace qtraj

#endif
