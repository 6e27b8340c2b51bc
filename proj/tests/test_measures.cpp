#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qtradeoff/measures.hpp"
#include "qtradeoff/states.hpp"
#include "test_support.hpp"

using namespace qtradeoff;
using qtradeoff::testkit::Rng;

namespace {

constexpr double kLn2 = std::numbers::ln2;

DensityMatrix timebin(double p) { return cc_family(p, 1.0 - p); }

}  // namespace

TEST(ShannonEntropy, Examples) {
  EXPECT_DOUBLE_EQ(shannon_entropy({1.0, 0.0, 0.0, 0.0}), 0.0);
  EXPECT_NEAR(shannon_entropy({0.25, 0.25, 0.25, 0.25}), 2 * kLn2, 1e-15);
  EXPECT_NEAR(shannon_entropy({0.5, 0.5, 0.0, 0.0}), kLn2, 1e-15);
}

TEST(ShannonEntropy, Errors) {
  EXPECT_THROW(shannon_entropy({1.1, -0.1}), std::invalid_argument);
  EXPECT_THROW(shannon_entropy({0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(shannon_entropy({std::nan(""), 1.0}), std::invalid_argument);
  EXPECT_NO_THROW(shannon_entropy({1.0 + 5e-10, -5e-10}));
}

TEST(SpectrumTuple, Invariants) {
  EXPECT_NO_THROW(SpectrumTuple({0.4, 0.3, 0.2, 0.1}));
  EXPECT_THROW(SpectrumTuple({0.1, 0.2, 0.3, 0.4}), std::invalid_argument);
  EXPECT_THROW(SpectrumTuple({0.5, 0.3, 0.2, 0.1}), std::invalid_argument);
  EXPECT_THROW(SpectrumTuple({1.1, 0.0, 0.0, -0.1}), std::invalid_argument);
  const auto s = SpectrumTuple::from_unsorted({0.1, 0.4, 0.2, 0.3});
  EXPECT_EQ(s.values(), (std::array<double, 4>{0.4, 0.3, 0.2, 0.1}));
}

TEST(VonNeumannEntropy, PureAndMaximallyMixed) {
  EXPECT_NEAR(von_neumann_entropy(spdc_state(0.3)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(ComplexMatrix::identity(4) * Complex(0.25), {4})), 2 * kLn2, 1e-14);
}

// Weights p^2, (1-p)^2, p(1-p), p(1-p) at p = 0.3 give 1.2217...; this is
// twice the binary entropy of 0.3 (0.610864).
TEST(VonNeumannEntropy, TimebinStateAtPointThree) {
  const double expected = shannon_entropy({0.09, 0.49, 0.21, 0.21});
  EXPECT_NEAR(expected, 2 * 0.6108643020548935, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(timebin(0.3)), expected, 1e-10);
}

TEST(MutualInformation, ProductStateIsZero) {
  Rng rng(1);
  const auto rho = tensor(testkit::random_state({2, 2}, rng), testkit::random_state({4}, rng));
  EXPECT_NEAR(mutual_information(rho, {{0, 1}}), 0.0, 1e-10);
}

TEST(MutualInformation, TimebinValues) {
  EXPECT_NEAR(mutual_information(timebin(0.5), {{0, 1}}), 2 * kLn2, 1e-10);
  EXPECT_NEAR(mutual_information(timebin(0.25), {{0, 1}}), 1.1246702892376166, 1e-10);
  EXPECT_NEAR(mutual_information(experimental_state(std::numbers::pi / 3), {{0, 1}}),
              timebin_mutual_information(0.25), 1e-10);
}

TEST(MutualInformation, InvalidCuts) {
  const auto rho = timebin(0.5);
  EXPECT_THROW(mutual_information(rho, {{}}), std::invalid_argument);
  EXPECT_THROW(mutual_information(rho, {{0, 1, 2}}), std::invalid_argument);
  EXPECT_THROW(mutual_information(rho, {{3}}), std::invalid_argument);
  EXPECT_THROW(mutual_information(rho, {{1, 1}}), std::invalid_argument);
}

TEST(Concurrence, Examples) {
  EXPECT_NEAR(concurrence(DensityMatrix(ComplexMatrix::projector(kets::plus()), {2, 2})), 1.0, 1e-12);
  EXPECT_NEAR(concurrence(DensityMatrix(ComplexMatrix::identity(4) * Complex(0.25), {2, 2})), 0.0, 1e-12);
  EXPECT_NEAR(concurrence(partial_trace(timebin(0.2), {0, 1})), 0.32, 1e-10);
}

TEST(Concurrence, WrongDims) {
  EXPECT_THROW(concurrence(DensityMatrix(ComplexMatrix::identity(4) * Complex(0.25), {4})), std::invalid_argument);
  EXPECT_THROW(concurrence(timebin(0.2)), std::invalid_argument);
}

TEST(Concurrence, SpinFlipMatrix) {
  const ComplexMatrix flip = spin_flip_two_qubit();
  const ComplexMatrix expected{{0, 0, 0, 1}, {0, 0, -1, 0}, {0, -1, 0, 0}, {1, 0, 0, 0}};
  EXPECT_EQ(flip, expected);
}

TEST(Concurrence, WernerStateThreshold) {
  // Werner state w |Phi+><Phi+| + (1 - w) I/4 has concurrence max(0, (3w - 1)/2).
  const Ket bell{1.0 / std::numbers::sqrt2, 0.0, 0.0, 1.0 / std::numbers::sqrt2};
  for (double w : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.9}) {
    const ComplexMatrix m =
        ComplexMatrix::projector(bell) * Complex(w) + ComplexMatrix::identity(4) * Complex((1 - w) / 4);
    EXPECT_NEAR(concurrence(DensityMatrix(m, {2, 2})), std::max(0.0, (3 * w - 1) / 2), 1e-10) << "w=" << w;
  }
}

TEST(MeasureReport, ConsistentEntropies) {
  const auto r = measure_report(timebin(0.35));
  EXPECT_NEAR(r.mutual_information, r.entropy_A + r.entropy_B - r.entropy_AB, 1e-12);
  EXPECT_GE(r.concurrence, 0.0);
  EXPECT_LE(r.concurrence, 1.0);
}

TEST(Fidelity, Examples) {
  Rng rng(9);
  const auto rho = testkit::random_state({2, 2}, rng);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  const DensityMatrix zero(ComplexMatrix::diagonal({1.0, 0.0}), {2});
  const DensityMatrix one(ComplexMatrix::diagonal({0.0, 1.0}), {2});
  const DensityMatrix mixed(ComplexMatrix::diagonal({0.5, 0.5}), {2});
  EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-15);
  EXPECT_NEAR(fidelity(zero, mixed), 0.5, 1e-14);
  EXPECT_THROW(fidelity(zero, rho), std::invalid_argument);
}

TEST(Fidelity, StaysWithinUnitIntervalForRankDeficientStates) {
  for (double p : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const double f = fidelity(timebin(p), timebin(p));
    EXPECT_LE(f, 1.0 + 1e-9);
    EXPECT_GE(f, 1.0 - 1e-9);
  }
}

TEST(ClosedForms, MutualInformationExamples) {
  EXPECT_NEAR(closed_form_I(0.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(closed_form_I(0.5, 0.5), 2 * kLn2, 1e-15);
  for (double p : {0.1, 0.37})
    for (double q : {0.2, 0.81}) {
      EXPECT_NEAR(closed_form_I(p, q), closed_form_I(1 - p, q), 1e-14);
      EXPECT_NEAR(closed_form_I(p, q), closed_form_I(p, 1 - q), 1e-14);
    }
  EXPECT_NEAR(closed_form_I(0.3, 0.7), timebin_mutual_information(0.3), 1e-15);
}

TEST(ClosedForms, ConcurrenceExamples) {
  EXPECT_NEAR(closed_form_E(0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(closed_form_E(0.302, 0.698), 0.0, 1e-3);
  for (double p : {0.05, 0.2, 0.6})
    for (double q : {0.1, 0.45}) EXPECT_NEAR(closed_form_E(p, q), closed_form_E(p, 1 - q), 1e-15);
  EXPECT_NEAR(closed_form_E(0.2, 0.8), timebin_concurrence(0.2), 1e-15);
  EXPECT_NEAR(timebin_concurrence(0.2), 0.32, 1e-12);
}

TEST(ClosedForms, RejectOutOfRange) {
  EXPECT_THROW(closed_form_I(1.2, 0.5), std::invalid_argument);
  EXPECT_THROW(closed_form_E(0.5, -0.2), std::invalid_argument);
  EXPECT_THROW(timebin_concurrence(2.0), std::invalid_argument);
  EXPECT_THROW(timebin_mutual_information(-1.0), std::invalid_argument);
}

TEST(ClosedForms, SpinFlipEigenvaluesDescending) {
  const auto mu = closed_form_spin_flip_eigenvalues(0.3, 0.8);
  EXPECT_TRUE(std::is_sorted(mu.begin(), mu.end(), std::greater<>{}));
  const auto numeric = spin_flip_eigenvalues(partial_trace(cc_family(0.3, 0.8), {0, 1}));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(numeric[k], mu[k], 1e-12);
}

TEST(KFunction, Examples) {
  EXPECT_DOUBLE_EQ(k_function(SpectrumTuple({1, 0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(k_function(SpectrumTuple({0.25, 0.25, 0.25, 0.25})), -0.5);
  EXPECT_DOUBLE_EQ(k_function(SpectrumTuple({0.5, 0.5, 0, 0})), 0.5);
}
