#include "qtraj/channel_analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

constexpr double kSupportTol = 1e-9;
constexpr double kBasisResidualTol = 1e-7;

// Positive part sum_{lambda > tol} lambda v v† of a Hermitian matrix.
Matrix positive_part(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(x));
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v > 1e-12) {
      out += v * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
  }
  return out;
}

// Columns with eigenvalue > tol (ascending order from the solver).
Matrix support_basis(const Matrix& psd, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(psd));
  std::vector<Index> cols;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > tol) cols.push_back(i);
  }
  Matrix basis(psd.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    basis.col(static_cast<Index>(k)) = es.eigenvectors().col(cols[k]);
  }
  return basis;
}

Matrix kernel_basis(const Matrix& psd, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(psd));
  std::vector<Index> cols;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) <= tol) cols.push_back(i);
  }
  Matrix basis(psd.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    basis.col(static_cast<Index>(k)) = es.eigenvectors().col(cols[k]);
  }
  return basis;
}

// Restriction of the model to an enclosure spanned by the isometry columns.
KrausModel compress_model(const KrausModel& model, const Matrix& isometry) {
  const Index k = isometry.cols();
  std::vector<std::vector<Matrix>> ops(model.n_outcomes());
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    for (const auto& v : model.operators(y)) {
      ops[y].push_back(isometry.adjoint() * v * isometry);
    }
  }
  return KrausModel(k, model.outcome_labels(), std::move(ops));
}

// Maximal-rank invariant state spanned by a Hermitian fixed-point basis:
// average of the normalized positive and negative parts of every element.
Matrix maximal_invariant_state(const KrausModel& model, const std::vector<Matrix>& basis) {
  std::vector<Matrix> candidates;
  for (const auto& x : basis) {
    const Matrix pos = positive_part(x);
    const Matrix neg = positive_part(-x);
    const double tp = pos.trace().real();
    const double tn = neg.trace().real();
    if (tp > 1e-10) candidates.push_back(pos / tp);
    if (tn > 1e-10) candidates.push_back(neg / tn);
  }
  if (candidates.empty()) {
    throw NumericalError("fixed-point basis yielded no invariant state");
  }
  Matrix avg = Matrix::Zero(model.dim(), model.dim());
  for (const auto& c : candidates) avg += c;
  avg = hermitize(avg / static_cast<double>(candidates.size()));
  const double residual = max_abs(channel_apply_raw(model, avg) - avg);
  if (residual > 1e-8) {
    std::ostringstream os;
    os << "candidate invariant state not fixed (residual " << residual << ")";
    throw NumericalError(os.str());
  }
  return avg;
}

// Recursive refinement of an enclosure into minimal subspaces. `embed` maps
// the compressed space of `model` back to the full space; the compressed
// channel always carries a full-rank invariant state here.
void split_enclosure(const KrausModel& model, const Matrix& embed, ChannelDecomposition& out) {
  const Index k = model.dim();
  FixedPointSpace fps = fixed_point_space(model);
  for (auto& w : fps.warnings) out.warnings.push_back(std::move(w));

  if (fps.dimension() == 1) {
    Matrix x = fps.basis.front();
    if (x.trace().real() < 0.0) x = -x;
    const Matrix pos = positive_part(x);
    const double tr = pos.trace().real();
    if (tr <= 1e-12) throw NumericalError("unique fixed point is not a state");
    const Matrix state = pos / tr;
    MinimalSubspace sub;
    sub.projector = hermitize(embed * embed.adjoint());
    sub.dim = k;
    sub.invariant_state = hermitize(embed * state * embed.adjoint());
    out.subspaces.push_back(std::move(sub));
    return;
  }

  const Matrix rho = maximal_invariant_state(model, fps.basis);

  // First fixed-point direction independent of rho; orthogonality to rho
  // guarantees a negative eigenvalue of the weighted direction below.
  const double rho_sq = hs_inner(rho, rho).real();
  Matrix direction;
  bool found = false;
  for (const auto& x : fps.basis) {
    Matrix perp = x - (hs_inner(rho, x).real() / rho_sq) * rho;
    if (hs_norm(perp) > kBasisResidualTol) {
      direction = hermitize(perp);
      found = true;
      break;
    }
  }
  if (!found) {
    throw NumericalError("degenerate fixed-point basis: no direction independent of the invariant state");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> rho_es(rho);
  if (rho_es.eigenvalues().minCoeff() < 1e-12) {
    throw NumericalError("invariant state unexpectedly rank-deficient inside enclosure");
  }
  const Matrix inv_sqrt = rho_es.eigenvectors() *
                          rho_es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          rho_es.eigenvectors().adjoint();
  const Matrix weighted = hermitize(inv_sqrt * direction * inv_sqrt);
  Eigen::SelfAdjointEigenSolver<Matrix> wes(weighted, Eigen::EigenvaluesOnly);
  const double lambda_min = wes.eigenvalues().minCoeff();
  if (lambda_min >= -1e-12) {
    throw NumericalError("fixed-point direction has no negative component against the invariant state");
  }

  // Push to the positivity boundary: smaller-support invariant state.
  Matrix boundary = hermitize(rho - (1.0 / lambda_min) * direction);
  boundary = positive_part(boundary);
  const double btr = boundary.trace().real();
  if (btr <= 1e-12) throw NumericalError("boundary invariant state vanished");
  boundary /= btr;

  const Matrix b1 = support_basis(boundary, kSupportTol);
  const Matrix b2 = kernel_basis(boundary, kSupportTol);
  if (b1.cols() == 0 || b1.cols() >= k) {
    throw NumericalError("enclosure split produced a trivial part");
  }
  split_enclosure(compress_model(model, b1), embed * b1, out);
  split_enclosure(compress_model(model, b2), embed * b2, out);
}

}  // namespace

Matrix Superoperator::apply(const Matrix& rho) const {
  return unvectorize(mat * vectorize(rho), dim);
}

Superoperator build_superoperator(const KrausModel& model) {
  const Index d = model.dim();
  Superoperator s;
  s.dim = d;
  s.mat = Matrix::Zero(d * d, d * d);
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    for (const auto& v : model.operators(y)) {
      s.mat += Eigen::kroneckerProduct(v.conjugate(), v);
    }
  }
  return s;
}

FixedPointSpace fixed_point_space(const KrausModel& model) {
  const Index d = model.dim();
  const Superoperator s = build_superoperator(model);
  const Matrix shifted = s.mat - Matrix::Identity(d * d, d * d);

  Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
  FixedPointSpace out;
  std::vector<Index> null_cols;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    const double sv = svd.singularValues()(i);
    if (sv <= kFixedPointTol) {
      null_cols.push_back(i);
    } else if (sv <= kFixedPointWarnTol) {
      std::ostringstream os;
      os << "fixed-point rank ambiguity: singular value " << sv << " of (S - 1) within ["
         << kFixedPointTol << ", " << kFixedPointWarnTol << "]";
      out.warnings.push_back(os.str());
    }
  }
  if (null_cols.empty()) {
    throw NumericalError("no fixed point detected; channel is not trace preserving");
  }

  // Hermitian + anti-Hermitian parts of each kernel element, orthonormalized
  // over the reals in the Hilbert-Schmidt inner product.
  std::vector<Matrix> basis;
  auto add_direction = [&](Matrix cand) {
    for (const auto& b : basis) {
      cand -= hs_inner(b, cand).real() * b;
    }
    const double norm = hs_norm(cand);
    if (norm > kBasisResidualTol) {
      basis.push_back(cand / norm);
    }
  };
  const Complex im(0.0, 1.0);
  for (const Index c : null_cols) {
    const Matrix x = unvectorize(svd.matrixV().col(c), d);
    add_direction(hermitize(x));
    add_direction(hermitize(-im * (x - x.adjoint()) * 0.5));
  }
  if (basis.size() != null_cols.size()) {
    std::ostringstream os;
    os << "fixed-point space not adjoint-closed: kernel dimension " << null_cols.size()
       << " vs Hermitian basis size " << basis.size();
    throw NumericalError(os.str());
  }
  out.basis = std::move(basis);
  return out;
}

ChannelDecomposition decompose(const KrausModel& model) {
  const Index d = model.dim();
  ChannelDecomposition out;

  FixedPointSpace fps = fixed_point_space(model);
  out.warnings = fps.warnings;
  out.maximal_invariant_state = maximal_invariant_state(model, fps.basis);

  const Matrix support = support_basis(out.maximal_invariant_state, kSupportTol);
  out.faithful = (support.cols() == d);
  if (out.faithful) {
    split_enclosure(model, Matrix::Identity(d, d), out);
  } else {
    split_enclosure(compress_model(model, support), support, out);
  }
  return out;
}

IdentifiabilityResult check_identifiability(const KrausModel& model_a,
                                            const KrausModel& model_b, int max_len) {
  if (max_len < 1) throw ValidationError("identifiability search needs max_len >= 1");
  if (model_a.outcome_labels() != model_b.outcome_labels()) {
    throw ValidationError("identifiability requires a shared outcome alphabet");
  }
  const double n_outcomes = static_cast<double>(model_a.n_outcomes());
  if (std::pow(n_outcomes, max_len) > kIdentifiabilityBudget) {
    std::ostringstream os;
    os << "identifiability budget exceeded: |Y|^" << max_len << " > " << kIdentifiabilityBudget;
    throw ValidationError(os.str());
  }

  const ChannelDecomposition da = decompose(model_a);
  const ChannelDecomposition db = decompose(model_b);
  if (!da.faithful || !db.faithful) {
    throw ValidationError("identifiability requires faithful channels on both sides");
  }

  IdentifiabilityResult result;
  for (std::size_t i = 0; i < da.count(); ++i) {
    for (std::size_t j = 0; j < db.count(); ++j) {
      PairSeparation pair;
      pair.subspace_a = i;
      pair.subspace_b = j;
      result.pairs.push_back(pair);
    }
  }

  const std::size_t ny = model_a.n_outcomes();
  std::vector<std::size_t> word;

  // Iterative deepening; words of one length are visited lexicographically,
  // so the first hit per pair is the shortest, lexicographically-first witness.
  for (int len = 1; len <= max_len; ++len) {
    bool all_done = true;
    for (const auto& p : result.pairs) all_done = all_done && p.separated;
    if (all_done) break;

    auto dfs = [&](auto&& self, const std::vector<Matrix>& sa, const std::vector<Matrix>& sb,
                   int depth) -> void {
      if (depth == len) {
        for (auto& pair : result.pairs) {
          if (pair.separated) continue;
          const double pa = sa[pair.subspace_a].trace().real();
          const double pb = sb[pair.subspace_b].trace().real();
          const double margin = std::abs(pa - pb);
          if (margin > pair.margin) pair.margin = margin;
          if (margin > kSeparationTol) {
            pair.separated = true;
            pair.witness = word;
            pair.witness_prob_a = pa;
            pair.witness_prob_b = pb;
            pair.margin = margin;
          }
        }
        return;
      }
      for (std::size_t y = 0; y < ny; ++y) {
        std::vector<Matrix> na(sa.size()), nb(sb.size());
        for (std::size_t i = 0; i < sa.size(); ++i) na[i] = apply_kraus(model_a, y, sa[i]);
        for (std::size_t j = 0; j < sb.size(); ++j) nb[j] = apply_kraus(model_b, y, sb[j]);
        word.push_back(y);
        self(self, na, nb, depth + 1);
        word.pop_back();
      }
    };

    std::vector<Matrix> init_a, init_b;
    for (const auto& sub : da.subspaces) init_a.push_back(sub.invariant_state);
    for (const auto& sub : db.subspaces) init_b.push_back(sub.invariant_state);
    dfs(dfs, init_a, init_b, 0);
  }

  result.decided = true;
  for (const auto& p : result.pairs) result.decided = result.decided && p.separated;
  return result;
}

}  // namespace qtraj
