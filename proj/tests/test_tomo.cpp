#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qtradeoff/tomo.hpp"
#include "test_support.hpp"

using namespace qtradeoff;
using qtradeoff::testkit::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

DensityMatrix basis_state_0000() { return DensityMatrix(ComplexMatrix::projector(kets::basis(16, 0)), kFourQubitDims); }

DensityMatrix maximally_mixed16() {
  return DensityMatrix(ComplexMatrix::identity(16) * Complex(1.0 / 16), kFourQubitDims);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(Settings, EnumerateAll81) {
  const auto all = all_settings();
  ASSERT_EQ(all.size(), kSettings);
  std::set<std::string> names;
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].index(), i);
    names.insert(all[i].to_string());
    EXPECT_EQ(TomographySetting::parse(all[i].to_string()), all[i]);
  }
  EXPECT_EQ(names.size(), kSettings);
  EXPECT_EQ(all.front().to_string(), "XXXX");
  EXPECT_EQ(all.back().to_string(), "ZZZZ");
}

TEST(Settings, ParseErrors) {
  EXPECT_THROW(TomographySetting::parse("XYZ"), std::invalid_argument);
  EXPECT_THROW(TomographySetting::parse("XYZW"), std::invalid_argument);
  EXPECT_THROW(TomographySetting::from_index(81), std::out_of_range);
}

TEST(Settings, OutcomeBitOrder) {
  EXPECT_EQ(outcome_bit(0b1000, 0), 1);
  EXPECT_EQ(outcome_bit(0b1000, 3), 0);
  EXPECT_EQ(outcome_bit(0b0001, 3), 1);
}

TEST(BornProbabilities, GroundStateInZBasis) {
  const auto probs = born_probabilities(basis_state_0000(), TomographySetting::parse("ZZZZ"));
  EXPECT_NEAR(probs[0], 1.0, 1e-15);
  for (std::size_t j = 1; j < kOutcomes; ++j) EXPECT_NEAR(probs[j], 0.0, 1e-15);
}

TEST(BornProbabilities, MaximallyMixedIsUniform) {
  for (const auto& s : all_settings()) {
    const auto probs = born_probabilities(maximally_mixed16(), s);
    for (double p : probs) EXPECT_NEAR(p, 1.0 / 16, 1e-14);
  }
}

TEST(BornProbabilities, SumToOne) {
  Rng rng(4);
  const auto rho = testkit::random_state(kFourQubitDims, rng);
  for (const auto& s : all_settings()) {
    const auto probs = born_probabilities(rho, s);
    double total = 0.0;
    for (double p : probs) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

// At p = 0 the state is pure |+> on A times |10> on B. In setting XXZZ the
// A qubits see XX = +1 with certainty and B gives outcome (1, 0).
TEST(BornProbabilities, PurePlusStateStatistics) {
  const auto rho = experimental_state(kPi / 2);
  const auto probs = born_probabilities(rho, TomographySetting::parse("XXZZ"));
  double xx_plus = 0.0;
  for (std::size_t j = 0; j < kOutcomes; ++j) {
    const int a0 = outcome_bit(j, 0), a1 = outcome_bit(j, 1), b0 = outcome_bit(j, 2), b1 = outcome_bit(j, 3);
    if (b0 != 1 || b1 != 0) {
      EXPECT_NEAR(probs[j], 0.0, 1e-14);
    }
    if (a0 == a1) xx_plus += probs[j];
  }
  EXPECT_NEAR(xx_plus, 1.0, 1e-14);
  // ZZ on A is -1 for |01> + |10>.
  const auto z = born_probabilities(rho, TomographySetting::parse("ZZZZ"));
  EXPECT_NEAR(z[0b0110] + z[0b1010], 1.0, 1e-14);
  EXPECT_NEAR(z[0b0110], 0.5, 1e-14);
}

TEST(SampleCounts, DegenerateDistribution) {
  OutcomeProbabilities probs{};
  probs[0] = 1.0;
  const auto c = sample_counts(probs, 1234, 7);
  EXPECT_EQ(c[0], 1234u);
  probs[0] = 0.0;
  probs[15] = 1.0;
  EXPECT_EQ(sample_counts(probs, 99, 7)[15], 99u);
}

TEST(SampleCounts, DeterministicInSeed) {
  OutcomeProbabilities probs;
  probs.fill(1.0 / 16);
  EXPECT_EQ(sample_counts(probs, 10000, 5), sample_counts(probs, 10000, 5));
  EXPECT_NE(sample_counts(probs, 10000, 5), sample_counts(probs, 10000, 6));
  EXPECT_EQ(sample_counts(probs, 10000, 5, CountModel::poisson), sample_counts(probs, 10000, 5, CountModel::poisson));
}

TEST(SampleCounts, MultinomialWithinFiveSigma) {
  Rng rng(13);
  OutcomeProbabilities probs;
  double total = 0.0;
  for (auto& p : probs) total += (p = testkit::uniform(rng));
  for (auto& p : probs) p /= total;
  const std::uint64_t shots = 1'000'000;
  const auto c = sample_counts(probs, shots, 99);
  std::uint64_t sum = 0;
  for (std::size_t j = 0; j < kOutcomes; ++j) {
    sum += c[j];
    const double sigma = std::sqrt(probs[j] * (1 - probs[j]) / shots);
    EXPECT_LE(std::abs(static_cast<double>(c[j]) / shots - probs[j]), 5 * sigma) << "outcome " << j;
  }
  EXPECT_EQ(sum, shots);
}

TEST(SampleCounts, PoissonMeans) {
  OutcomeProbabilities probs;
  probs.fill(1.0 / 16);
  const std::uint64_t shots = 1'600'000;
  const auto c = sample_counts(probs, shots, 3, CountModel::poisson);
  for (auto k : c) EXPECT_LE(std::abs(static_cast<double>(k) - 100000.0), 5 * std::sqrt(100000.0));
}

TEST(SampleCounts, RejectsZeroShots) {
  OutcomeProbabilities probs{};
  probs[0] = 1;
  EXPECT_THROW(sample_counts(probs, 0, 1), std::invalid_argument);
}

TEST(StreamSeeds, DistinctAcrossInputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 5; ++s)
    for (std::uint64_t a = 0; a < 81; ++a)
      for (std::uint64_t b = 0; b < 3; ++b) seen.insert(derive_stream_seed(s, a, b));
  EXPECT_EQ(seen.size(), 5u * 81u * 3u);
}

TEST(Noise, IdentityParameters) {
  const auto rho = experimental_state(kPi / 5);
  EXPECT_EQ(apply_noise(rho, {}).matrix(), rho.matrix());
}

TEST(Noise, ZeroVisibilityRemovesPathCoherence) {
  const auto rho = apply_noise(experimental_state(kPi / 5), {0.0, 0.0});
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      if (outcome_bit(i, 1) != outcome_bit(j, 1) || outcome_bit(i, 3) != outcome_bit(j, 3)) {
        EXPECT_EQ(rho(i, j), Complex(0.0));
      }
}

TEST(Noise, VisibilityScalesCoherencesPerDifferingPathBit) {
  Rng rng(1);
  const auto rho = testkit::random_state(kFourQubitDims, rng);
  const double v = visibility_from_contrast(50.0);
  EXPECT_NEAR(v, 49.0 / 51.0, 1e-15);
  const auto noisy = apply_noise(rho, {v, 0.0});
  // Index 0b0000 vs 0b0101 differs in both path qubits; 0b0000 vs 0b1000 in none.
  EXPECT_NEAR(std::abs(noisy(0, 5) - rho(0, 5) * v * v), 0.0, 1e-15);
  EXPECT_EQ(noisy(0, 8), rho(0, 8));
}

TEST(Noise, DepolarizingFixesMaximallyMixedState) {
  const auto rho = apply_noise(maximally_mixed16(), {1.0, 0.3});
  EXPECT_MATRIX_NEAR(rho.matrix(), maximally_mixed16().matrix(), 1e-15);
}

TEST(Noise, FullDepolarizingGivesMaximallyMixed) {
  const auto rho = apply_noise(experimental_state(kPi / 3), {1.0, 1.0});
  EXPECT_MATRIX_NEAR(rho.matrix(), maximally_mixed16().matrix(), 1e-15);
}

TEST(Noise, PreservesTraceAndRejectsBadParameters) {
  const auto rho = apply_noise(experimental_state(kPi / 3), {0.7, 0.2});
  EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_THROW(apply_noise(rho, {1.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(apply_noise(rho, {1.0, -0.1}), std::invalid_argument);
  EXPECT_THROW(visibility_from_contrast(0.5), std::invalid_argument);
  EXPECT_THROW(apply_noise(spdc_state(0.1), {}), std::invalid_argument);
}

TEST(PauliBookkeeping, ExactEstimatesMatchTraceForEveryCompatibleSetting) {
  Rng rng(17);
  const auto rho = testkit::random_state(kFourQubitDims, rng);
  const auto data = exact_frequencies(rho);
  const auto pooled = pauli_expectations(data);
  for (std::size_t idx = 1; idx < kPauliStrings; ++idx) {
    const PauliString p = PauliString::from_index(idx);
    const double exact = (p.matrix() * rho.matrix()).trace().real();
    EXPECT_NEAR(pooled[idx], exact, 1e-10) << p.to_string();
    std::size_t compatible = 0;
    for (const auto& f : data) {
      if (!p.measured_by(f.setting)) continue;
      ++compatible;
      EXPECT_NEAR(pauli_estimate(p, f), exact, 1e-10) << p.to_string() << " via " << f.setting.to_string();
    }
    EXPECT_EQ(compatible, static_cast<std::size_t>(std::pow(3, 4 - p.weight())));
  }
}

TEST(PauliBookkeeping, IncompleteSettingsRejected) {
  auto data = exact_frequencies(maximally_mixed16());
  data.pop_back();
  EXPECT_THROW(pauli_expectations(data), std::invalid_argument);
  data.push_back(data.front());
  EXPECT_THROW(pauli_expectations(data), std::invalid_argument);
}

TEST(Reconstruction, ExactDataIsExact) {
  Rng rng(5);
  for (int n = 0; n < 3; ++n) {
    const auto rho = testkit::random_state(kFourQubitDims, rng, 3);
    const auto r = reconstruct_from_frequencies(exact_frequencies(rho), rho);
    EXPECT_MATRIX_NEAR(r.rho_hat.matrix(), rho.matrix(), 1e-9);
    EXPECT_GE(r.fidelity_to_target, 1 - 1e-9);
  }
}

TEST(Reconstruction, NoTargetGivesNanFidelity) {
  const auto r = reconstruct_from_frequencies(exact_frequencies(maximally_mixed16()));
  EXPECT_TRUE(std::isnan(r.fidelity_to_target));
}

TEST(Reconstruction, ProjectionYieldsPhysicalState) {
  ComplexMatrix m = ComplexMatrix::diagonal({0.6, 0.5, -0.05, -0.05});
  const auto rho = project_to_physical(m, {2, 2});
  const auto e = eigenvalues(rho.matrix());
  EXPECT_NEAR(e[0], 0.55, 1e-12);
  EXPECT_NEAR(e[1], 0.45, 1e-12);
  EXPECT_NEAR(e[2], 0.0, 1e-12);
  EXPECT_NEAR(e[3], 0.0, 1e-12);
}

TEST(Reconstruction, RecordsWithoutCountsRejected) {
  auto d = simulate_tomography(maximally_mixed16(), 10, 1);
  d.records[3].counts.fill(0);
  d.records[3].total_shots = 0;
  EXPECT_THROW(reconstruct(d.records), std::invalid_argument);
}

TEST(Reconstruction, MaximumLikelihoodStaysPhysicalAndClose) {
  const auto target = experimental_state(3 * kPi / 8);
  const auto d = simulate_tomography(target, 10000, 21);
  const auto lin = reconstruct(d.records, target, ReconstructionMethod::linear);
  const auto mle = reconstruct(d.records, target, ReconstructionMethod::maximum_likelihood);
  EXPECT_GE(mle.fidelity_to_target, 0.99);
  EXPECT_GE(mle.fidelity_to_target, lin.fidelity_to_target - 1e-3);
  EXPECT_GE(eigenvalues(mle.rho_hat.matrix()).back(), -1e-12);
}

TEST(Records, CountsSumToShots) {
  const auto d = simulate_tomography(experimental_state(0.4), 777, 2);
  ASSERT_EQ(d.records.size(), kSettings);
  for (const auto& r : d.records) {
    std::uint64_t s = 0;
    for (auto c : r.counts) s += c;
    EXPECT_EQ(s, 777u);
    EXPECT_EQ(r.total_shots, 777u);
    EXPECT_EQ(r.seed, derive_stream_seed(2, r.setting.index()));
  }
}

TEST(Records, ThreadCountDoesNotChangeCounts) {
  const auto rho = experimental_state(0.7);
  EXPECT_EQ(simulate_tomography(rho, 500, 8, CountModel::multinomial, 1).records,
            simulate_tomography(rho, 500, 8, CountModel::multinomial, 4).records);
}

TEST(Records, TextRoundTrip) {
  ExperimentOptions opt;
  opt.shots = 321;
  opt.seed = 77;
  opt.noise = {0.91, 0.013};
  const auto run = run_experiment(9 * kPi / 32, opt);
  const std::string text = to_text(run.dataset);
  EXPECT_EQ(text.rfind(std::string(kRecordMagic), 0), 0u);
  const auto back = from_text(text);
  EXPECT_EQ(back, run.dataset);
  EXPECT_EQ(to_text(back), text);
}

TEST(Records, MalformedTextRejected) {
  EXPECT_THROW(from_text("not a record\n"), std::runtime_error);
  const auto d = simulate_tomography(maximally_mixed16(), 5, 1);
  std::string text = to_text(d);
  // Dropping the trailing " <count>\n" leaves the last line one count short.
  EXPECT_THROW(from_text(text.substr(0, text.size() - 3)), std::runtime_error);
  const auto pos = text.find("XXXX");
  text.replace(pos, 4, "QQQQ");
  EXPECT_ANY_THROW(from_text(text));
}

TEST(Experiment, ExactEndpoints) {
  ExperimentOptions opt;
  opt.exact = true;
  const auto at_half_pi = run_experiment(kPi / 2, opt);
  EXPECT_NEAR(at_half_pi.result.measures.concurrence, 1.0, 1e-9);
  EXPECT_NEAR(at_half_pi.result.measures.mutual_information, 0.0, 1e-9);
  const auto at_zero = run_experiment(0.0, opt);
  EXPECT_NEAR(at_zero.result.measures.concurrence, 0.0, 1e-9);
  EXPECT_NEAR(at_zero.result.measures.mutual_information, 0.0, 1e-9);
  EXPECT_TRUE(at_zero.dataset.records.empty());
}

TEST(Experiment, RejectsBadAngle) {
  EXPECT_THROW(run_experiment(-1.0, {}), std::invalid_argument);
}

TEST(Experiment, FidelityDecreasesWithNoise) {
  const double theta = kPi / 4;
  std::vector<double> medians;
  for (double v : {1.0, 0.98, 0.96}) {
    std::vector<double> f;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      ExperimentOptions opt;
      opt.seed = seed;
      opt.noise.visibility = v;
      f.push_back(run_experiment(theta, opt).result.fidelity_to_target);
    }
    medians.push_back(median(f));
  }
  EXPECT_GE(medians[0], medians[1]);
  EXPECT_GE(medians[1], medians[2]);
}

TEST(Experiment, EstimatesConvergeWithShots) {
  const double theta = 3 * kPi / 8;
  const double p = StateParams::from_theta(theta).p;
  const double i_true = timebin_mutual_information(p), e_true = timebin_concurrence(p);
  std::vector<double> err;
  for (std::uint64_t shots : {1000u, 10000u, 100000u}) {
    std::vector<double> e;
    for (std::uint64_t seed = 1; seed <= 7; ++seed) {
      ExperimentOptions opt;
      opt.shots = shots;
      opt.seed = seed;
      const auto m = run_experiment(theta, opt).result.measures;
      e.push_back(std::abs(m.mutual_information - i_true) + std::abs(m.concurrence - e_true));
    }
    err.push_back(median(e));
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
}

TEST(Bootstrap, ErrorsArePositiveAndReproducible) {
  ExperimentOptions opt;
  opt.seed = 3;
  const auto run = run_experiment(3 * kPi / 8, opt);
  const auto a = bootstrap_errors(run.dataset.records, 20, 9, ReconstructionMethod::linear);
  const auto b = bootstrap_errors(run.dataset.records, 20, 9, ReconstructionMethod::linear, 3);
  EXPECT_GT(a.sigma_I, 0.0);
  EXPECT_GT(a.sigma_E, 0.0);
  EXPECT_LT(a.sigma_I, 0.05);
  EXPECT_EQ(a.sigma_I, b.sigma_I);
  EXPECT_EQ(a.sigma_E, b.sigma_E);
  EXPECT_EQ(a.resamples, 20u);
  EXPECT_THROW(bootstrap_errors(run.dataset.records, 1, 9), std::invalid_argument);
}
