#include "qtraj/kraus_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "qtraj/errors.hpp"

namespace qtraj {

KrausModel::KrausModel(Index dim, std::vector<std::string> outcome_labels,
                       std::vector<std::vector<Matrix>> operators,
                       std::optional<ModelParam> param)
    : dim_(dim),
      labels_(std::move(outcome_labels)),
      ops_(std::move(operators)),
      param_(std::move(param)) {
  if (dim_ <= 0) throw ValidationError("model dimension must be positive");
  if (labels_.empty()) throw ValidationError("outcome alphabet must be non-empty");
  if (ops_.size() != labels_.size()) {
    throw ValidationError("one operator list required per outcome");
  }
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw ValidationError("outcome labels must be non-empty");
    if (!seen.insert(l).second) {
      throw ValidationError("duplicate outcome label '" + l + "'");
    }
  }
  for (std::size_t y = 0; y < ops_.size(); ++y) {
    if (ops_[y].empty()) {
      throw ValidationError("outcome '" + labels_[y] + "' has no operators");
    }
    for (const auto& v : ops_[y]) {
      if (v.rows() != dim_ || v.cols() != dim_) {
        std::ostringstream os;
        os << "operator for outcome '" << labels_[y] << "' is " << v.rows() << "x"
           << v.cols() << ", expected " << dim_ << "x" << dim_;
        throw ValidationError(os.str());
      }
    }
  }
}

KrausModel KrausModel::make_validated(Index dim, std::vector<std::string> outcome_labels,
                                      std::vector<std::vector<Matrix>> operators,
                                      std::optional<ModelParam> param) {
  KrausModel m(dim, std::move(outcome_labels), std::move(operators), std::move(param));
  const auto report = validate_model(m);
  if (!report.pass) {
    std::ostringstream os;
    os << "Kraus completeness violated: residual " << report.residual;
    throw ValidationError(os.str());
  }
  return m;
}

KrausModel KrausModel::identity(Index dim) {
  return KrausModel(dim, {"0"}, {{Matrix::Identity(dim, dim)}});
}

KrausModel KrausModel::direct_sum(const KrausModel& a, const KrausModel& b) {
  if (a.outcome_labels() != b.outcome_labels()) {
    throw ValidationError("direct sum requires identical outcome alphabets");
  }
  const Index d = a.dim() + b.dim();
  std::vector<std::vector<Matrix>> ops(a.n_outcomes());
  for (std::size_t y = 0; y < a.n_outcomes(); ++y) {
    const auto& va = a.operators(y);
    const auto& vb = b.operators(y);
    if (va.size() != vb.size()) {
      throw ValidationError("direct sum requires matching operator counts per outcome");
    }
    for (std::size_t mu = 0; mu < va.size(); ++mu) {
      Matrix v = Matrix::Zero(d, d);
      v.topLeftCorner(a.dim(), a.dim()) = va[mu];
      v.bottomRightCorner(b.dim(), b.dim()) = vb[mu];
      ops[y].push_back(std::move(v));
    }
  }
  return KrausModel(d, a.outcome_labels(), std::move(ops));
}

const std::vector<Matrix>& KrausModel::operators(std::size_t y) const {
  if (y >= ops_.size()) throw ValidationError("outcome index out of range");
  return ops_[y];
}

std::size_t KrausModel::outcome_index(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw ValidationError("unknown outcome label '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

ValidityReport validate_model(const KrausModel& model) {
  Matrix sum = Matrix::Zero(model.dim(), model.dim());
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    for (const auto& v : model.operators(y)) {
      sum += v.adjoint() * v;
    }
  }
  ValidityReport report;
  report.residual = max_abs(sum - Matrix::Identity(model.dim(), model.dim()));
  report.pass = report.residual <= kCompletenessTol;
  return report;
}

Matrix apply_kraus(const KrausModel& model, std::size_t y, const Matrix& rho) {
  const auto& ops = model.operators(y);
  Matrix out = Matrix::Zero(model.dim(), model.dim());
  for (const auto& v : ops) {
    out.noalias() += v * rho * v.adjoint();
  }
  return out;
}

double outcome_probability(const KrausModel& model, std::size_t y, const DensityMatrix& rho) {
  return apply_kraus(model, y, rho.matrix()).trace().real();
}

Matrix channel_apply_raw(const KrausModel& model, const Matrix& x) {
  Matrix out = Matrix::Zero(model.dim(), model.dim());
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    out += apply_kraus(model, y, x);
  }
  return out;
}

DensityMatrix channel_apply(const KrausModel& model, const DensityMatrix& rho) {
  return DensityMatrix::make(channel_apply_raw(model, rho.matrix()));
}

double word_likelihood(const KrausModel& model, std::span<const std::size_t> word,
                       const DensityMatrix& rho) {
  Matrix state = rho.matrix();
  for (const std::size_t y : word) {
    state = apply_kraus(model, y, state);
  }
  return state.trace().real();
}

KrausStep kraus_step(const KrausModel& model, std::size_t y, const Matrix& rho) {
  KrausStep step;
  Matrix mapped = apply_kraus(model, y, rho);
  step.probability = mapped.trace().real();
  if (step.probability > kProbabilityFloor) {
    step.state = hermitize(mapped / step.probability);
  } else {
    step.state = rho;
  }
  return step;
}

std::size_t sample_outcome(const KrausModel& model, const Matrix& rho, double u) {
  const std::size_t ny = model.n_outcomes();
  std::vector<double> probs(ny);
  double total = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    probs[y] = apply_kraus(model, y, rho).trace().real();
    if (probs[y] < 0.0) probs[y] = 0.0;
    total += probs[y];
  }
  if (total < kProbabilityFloor) {
    throw NumericalError("all outcome probabilities vanish; completeness violated");
  }
  const double target = u * total;
  double cumulative = 0.0;
  for (std::size_t y = 0; y + 1 < ny; ++y) {
    cumulative += probs[y];
    if (target < cumulative) return y;
  }
  return ny - 1;
}

}  // namespace qtraj
