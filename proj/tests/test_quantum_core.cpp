#include <cmath>

#include "doctest.h"
#include "qtraj/density_matrix.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/fidelity.hpp"
#include "qtraj/kraus_model.hpp"
#include "test_helpers.hpp"

using namespace qtraj;
using namespace qtraj::test;

namespace {

DensityMatrix diag_state(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return DensityMatrix::make(m);
}

// Closed form for qubits: F = Tr(rho sigma) + 2 sqrt(det rho det sigma).
double qubit_fidelity_oracle(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const double overlap = (rho.matrix() * sigma.matrix()).trace().real();
  const double dets = rho.matrix().determinant().real() * sigma.matrix().determinant().real();
  return overlap + 2.0 * std::sqrt(std::max(0.0, dets));
}

}  // namespace

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix::mixed(2));
  CHECK_NOTHROW(diag_state(0.25, 0.75));

  Matrix bad_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix::make(bad_trace), ValidationError);

  Matrix non_herm = Matrix::Zero(2, 2);
  non_herm(0, 0) = 0.5;
  non_herm(1, 1) = 0.5;
  non_herm(0, 1) = Complex(0.3, 0.0);
  non_herm(1, 0) = Complex(0.0, 0.3);
  CHECK_THROWS_AS(DensityMatrix::make(non_herm), ValidationError);

  Matrix non_psd = Matrix::Zero(2, 2);
  non_psd(0, 0) = 1.5;
  non_psd(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix::make(non_psd), ValidationError);

  // Anti-Hermitian drift below tolerance is absorbed by re-Hermitization.
  Matrix drift = Matrix::Identity(2, 2) * 0.5;
  drift(0, 1) = Complex(0.0, 5e-11);
  const DensityMatrix fixed = DensityMatrix::make(drift);
  CHECK(max_abs(fixed.matrix() - fixed.matrix().adjoint()) == 0.0);
}

TEST_CASE("validate_model on the example family") {
  const auto report = validate_model(example_model(1.8));
  CHECK(report.pass);
  CHECK(report.residual <= 1e-12);

  CHECK(validate_model(KrausModel::identity(3)).pass);

  // V1 zeroed out: residual max(1 - p/3, 3/4).
  const double p = 1.8;
  const KrausModel good = example_model(p);
  KrausModel broken(2, good.outcome_labels(), {good.operators(0), {Matrix::Zero(2, 2)}});
  const auto broken_report = validate_model(broken);
  CHECK_FALSE(broken_report.pass);
  CHECK(broken_report.residual == doctest::Approx(std::max(1.0 - p / 3.0, 0.75)).epsilon(1e-12));
}

TEST_CASE("model structural errors") {
  CHECK_THROWS_AS(KrausModel(2, {"0", "1"}, {{Matrix::Zero(2, 2)}}), ValidationError);
  CHECK_THROWS_AS(KrausModel(2, {"0", "0"}, {{Matrix::Zero(2, 2)}, {Matrix::Zero(2, 2)}}),
                  ValidationError);
  CHECK_THROWS_AS(KrausModel(2, {"0"}, {{Matrix::Zero(3, 3)}}), ValidationError);
  CHECK_THROWS_AS(example_model(1.8).outcome_index("2"), ValidationError);
  CHECK(example_model(1.8).outcome_index("1") == 1);
}

TEST_CASE("apply_kraus worked cases") {
  const KrausModel m3 = example_model(3.0);
  const DensityMatrix ground = DensityMatrix::basis_state(2, 0);

  const Matrix out0 = apply_kraus(m3, 0, ground.matrix());
  CHECK(max_abs(out0 - ground.matrix()) <= 1e-15);

  const Matrix out1 = apply_kraus(m3, 1, ground.matrix());
  CHECK(max_abs(out1) <= 1e-15);

  const KrausModel id = KrausModel::identity(2);
  Rng rng(11);
  for (int k = 0; k < 5; ++k) {
    const DensityMatrix rho = random_density(rng, 2);
    CHECK(max_abs(apply_kraus(id, 0, rho.matrix()) - rho.matrix()) <= 1e-15);
  }

  CHECK_THROWS_AS(apply_kraus(m3, 2, ground.matrix()), ValidationError);
}

TEST_CASE("outcome probabilities") {
  const KrausModel m3 = example_model(3.0);
  const DensityMatrix mixed = DensityMatrix::mixed(2);
  CHECK(outcome_probability(m3, 0, mixed) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(outcome_probability(m3, 1, mixed) == doctest::Approx(0.375).epsilon(1e-12));

  const KrausModel m18 = example_model(1.8);
  const DensityMatrix inv = DensityMatrix::make(example_invariant(1.8));
  CHECK(outcome_probability(m18, 0, inv) == doctest::Approx(11.0 / 23.0).epsilon(1e-12));

  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix rho = random_density(rng, 2);
    double total = 0.0;
    for (std::size_t y = 0; y < m18.n_outcomes(); ++y) {
      total += outcome_probability(m18, y, rho);
    }
    CHECK(std::abs(total - 1.0) <= 1e-10);
  }
}

TEST_CASE("channel_apply fixed points and identity") {
  const KrausModel id = KrausModel::identity(2);
  Rng rng(23);
  const DensityMatrix rho = random_density(rng, 2);
  CHECK(max_abs(channel_apply(id, rho).matrix() - rho.matrix()) <= 1e-15);

  const KrausModel m18 = example_model(1.8);
  const DensityMatrix inv = DensityMatrix::make(example_invariant(1.8));
  CHECK(max_abs(channel_apply(m18, inv).matrix() - inv.matrix()) <= 1e-9);

  const KrausModel m3 = example_model(3.0);
  const DensityMatrix ground = DensityMatrix::basis_state(2, 0);
  CHECK(max_abs(channel_apply(m3, ground).matrix() - ground.matrix()) <= 1e-12);
}

TEST_CASE("word likelihood basics and normalization") {
  const KrausModel m3 = example_model(3.0);
  const DensityMatrix mixed = DensityMatrix::mixed(2);

  CHECK(word_likelihood(m3, {}, mixed) == doctest::Approx(1.0));

  const std::size_t word0[] = {0};
  CHECK(word_likelihood(m3, word0, mixed) == doctest::Approx(0.625).epsilon(1e-12));

  const KrausModel m18 = example_model(1.8);
  for (int len = 1; len <= 6; ++len) {
    double total = 0.0;
    for (const auto& w : all_words(2, len)) {
      total += word_likelihood(m18, w, mixed);
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("word likelihood factorizes over the normalized chain") {
  const KrausModel m18 = example_model(1.8);
  Rng rng(5);
  const DensityMatrix rho0 = random_density(rng, 2);
  for (const auto& w : all_words(2, 6)) {
    double product = 1.0;
    Matrix state = rho0.matrix();
    bool dead = false;
    for (const std::size_t y : w) {
      const KrausStep step = kraus_step(m18, y, state);
      product *= step.probability;
      if (step.probability <= kProbabilityFloor) {
        dead = true;
        break;
      }
      state = step.state;
    }
    if (!dead) {
      CHECK(std::abs(product - word_likelihood(m18, w, rho0)) <= 1e-9);
    }
  }
}

TEST_CASE("trace and positivity preservation over random states") {
  Rng rng(99);
  for (const double p : {0.0, 0.7, 1.8, 2.9}) {
    const KrausModel model = example_model(p);
    for (int k = 0; k < 30; ++k) {
      const DensityMatrix rho = random_density(rng, 2);
      double total = 0.0;
      Matrix mean = Matrix::Zero(2, 2);
      for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
        const Matrix mapped = apply_kraus(model, y, rho.matrix());
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(mapped), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        total += mapped.trace().real();
        mean += mapped;
      }
      CHECK(std::abs(total - 1.0) <= 1e-10);
      // E[rho_{n+1} | rho_n] = Phi(rho_n) by outcome enumeration.
      CHECK(max_abs(mean - channel_apply(model, rho).matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("fidelity") {
  Rng rng(301);
  for (int k = 0; k < 10; ++k) {
    const DensityMatrix rho = random_density(rng, 2);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
  }

  CHECK(fidelity(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fidelity(DensityMatrix::mixed(2), DensityMatrix::basis_state(2, 0)) ==
        doctest::Approx(0.5).epsilon(1e-12));

  for (int k = 0; k < 40; ++k) {
    const DensityMatrix a = random_density(rng, 2);
    const DensityMatrix b = random_density(rng, 2);
    const double f = fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-10);
    CHECK(f == doctest::Approx(fidelity(b, a)).epsilon(1e-9));
    CHECK(f == doctest::Approx(qubit_fidelity_oracle(a, b)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(fidelity(DensityMatrix::mixed(2), DensityMatrix::mixed(3)), ValidationError);
}

TEST_CASE("sample_outcome walks the cdf in label order") {
  const KrausModel m3 = example_model(3.0);
  const DensityMatrix mixed = DensityMatrix::mixed(2);
  // P(0) = 0.625: u below it picks outcome 0, above picks outcome 1.
  CHECK(sample_outcome(m3, mixed.matrix(), 0.0) == 0);
  CHECK(sample_outcome(m3, mixed.matrix(), 0.624) == 0);
  CHECK(sample_outcome(m3, mixed.matrix(), 0.626) == 1);
  CHECK(sample_outcome(m3, mixed.matrix(), 0.999999) == 1);

  KrausModel dead(2, {"0"}, {{Matrix::Zero(2, 2)}});
  CHECK_THROWS_AS(sample_outcome(dead, mixed.matrix(), 0.5), NumericalError);
}
