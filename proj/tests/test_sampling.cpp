#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "mipt/dense_state.hpp"
#include "mipt/errors.hpp"
#include "mipt/mps.hpp"
#include "mipt/mps_sampling.hpp"
#include "mipt/tableau.hpp"
#include "support.hpp"

using namespace mipt;

namespace {

const double kLog2 = std::log(2.0);

// Agreement within 3 standard errors, with an absolute floor for
// estimators whose per-sample values are constant.
void expect_within(const EstimatorResult& r, double exact, double floor = 1e-9) {
  EXPECT_LE(std::abs(r.value - exact), 3.0 * r.stderr_ + floor)
      << "estimate " << r.value << " +- " << r.stderr_ << " vs " << exact;
}

MpsState ghz(std::size_t n) {
  MpsState s(n, LocalState::Zero);
  s.apply_unitary(gates::hadamard(), 0);
  for (std::size_t i = 0; i + 1 < n; ++i) s.apply_unitary(gates::cnot(), i);
  return s;
}

MpsState t_states(std::size_t n) {
  MpsState s(n, LocalState::Plus);
  gates::Matrix t = gates::Matrix::Identity(2, 2);
  t(1, 1) = std::polar(1.0, std::numbers::pi / 4);
  for (std::size_t q = 0; q < n; ++q) s.apply_unitary(t, q);
  return s;
}

MpsState normalized(MpsState s) {
  s.right_normalize();
  return s;
}

}  // namespace

TEST(PauliSampler, ProductStatesSampleTheirStabilizerGroup) {
  Rng rng(1);
  const auto z = normalized(MpsState(5, LocalState::Zero));
  const auto x = normalized(MpsState(5, LocalState::Plus));
  for (int k = 0; k < 200; ++k) {
    const auto s = sample_pauli_string(z, rng);
    for (std::size_t q = 0; q < 5; ++q) EXPECT_TRUE(s.sigma[q] == Pauli::I || s.sigma[q] == Pauli::Z);
    EXPECT_NEAR(s.prob, std::pow(2.0, -5), 1e-12);
    const auto t = sample_pauli_string(x, rng);
    for (std::size_t q = 0; q < 5; ++q) EXPECT_TRUE(t.sigma[q] == Pauli::I || t.sigma[q] == Pauli::X);
  }
}

TEST(PauliSampler, RequiresRightNormalizedState) {
  Rng rng(2);
  MpsState s(3, LocalState::Zero);
  s.move_center(2);
  EXPECT_THROW(sample_pauli_string(s, rng), ContractViolation);
  EXPECT_THROW(sample_bitstring(s, rng), ContractViolation);
}

TEST(PauliSampler, ChainRuleMatchesExactProbability) {
  Rng rng(3);
  auto pair = fixture::random_monitored_state(4, 4, 0.6, rng);
  const auto mps = normalized(pair.mps);
  const auto spec = oracle::exact_pauli_spectrum(pair.dense);
  for (int k = 0; k < 500; ++k) {
    const auto s = sample_pauli_string(mps, rng);
    EXPECT_NEAR(s.prob, spec.weights()[oracle::pauli_index(s.sigma)], 1e-8);
  }
}

TEST(PauliSampler, HistogramMatchesSpectrum) {
  Rng rng(4);
  auto pair = fixture::random_monitored_state(3, 3, 0.6, rng);
  const auto mps = normalized(pair.mps);
  const auto spec = oracle::exact_pauli_spectrum(pair.dense);
  std::vector<std::size_t> counts(spec.label_space(), 0);
  for (int k = 0; k < 100000; ++k) ++counts[oracle::pauli_index(sample_pauli_string(mps, rng).sigma)];
  EXPECT_LT(fixture::total_variation(spec.weights(), counts), 0.01);
  EXPECT_GT(fixture::chi_square_p_value(spec.weights(), counts), 1e-3);
}

TEST(BitstringSampler, SimpleStates) {
  Rng rng(5);
  const auto z = normalized(MpsState(4, LocalState::Zero));
  const auto x = normalized(MpsState(4, LocalState::Plus));
  const auto g = normalized(ghz(4));
  std::size_t ones = 0;
  for (int k = 0; k < 400; ++k) {
    const auto a = sample_bitstring(z, rng);
    EXPECT_EQ(a.bits, std::vector<std::uint8_t>(4, 0));
    EXPECT_NEAR(a.prob, 1.0, 1e-12);
    EXPECT_NEAR(sample_bitstring(x, rng).prob, 1.0 / 16, 1e-12);
    const auto b = sample_bitstring(g, rng);
    EXPECT_TRUE(b.bits == std::vector<std::uint8_t>(4, 0) || b.bits == std::vector<std::uint8_t>(4, 1));
    EXPECT_NEAR(b.prob, 0.5, 1e-12);
    ones += b.bits[0];
  }
  EXPECT_NEAR(double(ones) / 400, 0.5, 0.1);
}

TEST(BitstringSampler, HistogramMatchesBornRule) {
  Rng rng(6);
  auto pair = fixture::random_monitored_state(4, 4, 0.6, rng);
  const auto mps = normalized(pair.mps);
  const auto dist = oracle::z_distribution(pair.dense);
  std::vector<std::size_t> counts(16, 0);
  for (int k = 0; k < 100000; ++k) {
    const auto s = sample_bitstring(mps, rng);
    std::size_t idx = 0;
    for (auto b : s.bits) idx = 2 * idx + b;
    if (k < 500) {
      EXPECT_NEAR(s.prob, dist.weights()[idx], 1e-8);
    }
    ++counts[idx];
  }
  EXPECT_GT(fixture::chi_square_p_value(dist.weights(), counts), 1e-3);
}

TEST(RestrictedTrace, Examples) {
  Rng rng(7);
  auto pair = fixture::random_monitored_state(4, 3, 0.5, rng);
  const auto mps = normalized(pair.mps);
  const auto sigma = PauliString::parse("XZYX");
  EXPECT_NEAR(restricted_pauli_trace(mps, sigma, 0, 4), pair.dense.pauli_expectation(sigma).real(), 1e-10);
  EXPECT_NEAR(restricted_pauli_trace(mps, PauliString(4), 0, 2), 1.0, 1e-12);
  EXPECT_NEAR(restricted_pauli_trace(mps, sigma, 0, 2),
              pair.dense.pauli_expectation(PauliString::parse("XZII")).real(), 1e-10);
  EXPECT_NEAR(restricted_pauli_trace(mps, sigma, 2, 4),
              pair.dense.pauli_expectation(PauliString::parse("IIYX")).real(), 1e-10);
  EXPECT_THROW(restricted_pauli_trace(mps, sigma, 1, 3), DomainError);
  const auto bell = normalized(ghz(2));
  EXPECT_NEAR(restricted_pauli_trace(bell, PauliString::parse("ZI"), 0, 1), 0.0, 1e-14);
}

TEST(SreEstimator, StabilizerStatesGiveZero) {
  Rng rng(8);
  MpsState s(6, LocalState::Zero);
  for (int g = 0; g < 40; ++g) {
    const std::size_t i = uniform_index(rng, 5);
    switch (uniform_index(rng, 3)) {
      case 0: s.apply_unitary(gates::hadamard(), i); break;
      case 1: s.apply_unitary(gates::phase_s(), i); break;
      default: s.apply_unitary(gates::cnot(), i); break;
    }
  }
  for (double n : {1.0, 2.0}) expect_within(estimate_sre(s, n, 1000, rng), 0.0);
}

TEST(SreEstimator, MagicProductState) {
  Rng rng(9);
  const auto s = t_states(5);
  expect_within(estimate_sre(s, 2.0, 5000, rng), 5 * std::log(4.0 / 3.0));
  expect_within(estimate_sre(s, 1.0, 5000, rng), 5 * 0.5 * kLog2);
}

TEST(SreEstimator, MatchesOracleAfterWeakMeasurements) {
  Rng rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    auto pair = fixture::random_monitored_state(6, 4, 0.8, rng);
    for (double n : {1.0, 2.0}) {
      expect_within(estimate_sre(pair.mps, n, 5000, rng), oracle::stabilizer_renyi_entropy(pair.dense, n).value);
    }
  }
}

TEST(SreEstimator, RejectsBadArguments) {
  Rng rng(11);
  const MpsState s(3, LocalState::Zero);
  EXPECT_THROW(estimate_sre(s, 2.0, 50, rng), DomainError);
  EXPECT_THROW(estimate_sre(s, 3.0, 500, rng), DomainError);
  EXPECT_THROW(estimate_bsmi(s, 3, 500, rng), DomainError);
}

TEST(BsmiEstimator, FactorizedStateGivesZero) {
  Rng rng(12);
  MpsState s = t_states(4);
  s.apply_pauli_rotation(LocalPauli{0, {Pauli::X, Pauli::Y}}, 0.4);
  s.apply_pauli_rotation(LocalPauli{2, {Pauli::Z, Pauli::X}}, 0.9);
  const auto r = estimate_bsmi(s, 2, 5000, rng);
  expect_within(r, 0.0, 1e-6);
  EXPECT_EQ(r.rejected, 0U);
}

TEST(BsmiEstimator, BellPairMatchesOracle) {
  Rng rng(13);
  const auto r = estimate_bsmi(ghz(2), 1, 1000, rng);
  auto d = DenseState::zeros(2);
  d.apply(gates::hadamard(), {0});
  d.apply(gates::cnot(), {0, 1});
  expect_within(r, oracle::bsmi(d, 1).value);
}

TEST(BsmiEstimator, MatchesOracleOnMonitoredStates) {
  Rng rng(14);
  for (int trial = 0; trial < 3; ++trial) {
    auto pair = fixture::random_monitored_state(6, 4, 0.8, rng);
    const std::vector<std::size_t> cuts{2, 3, 4};
    const auto est = estimate_bsmi(pair.mps, cuts, 5000, rng);
    for (std::size_t c = 0; c < cuts.size(); ++c) expect_within(est[c], oracle::bsmi(pair.dense, cuts[c]).value);
  }
}

TEST(PeEstimator, ProductStates) {
  Rng rng(15);
  const auto z = estimate_pe(MpsState(6, LocalState::Zero), 200, rng);
  EXPECT_EQ(z.value, 0.0);
  const auto x = estimate_pe(MpsState(6, LocalState::Plus), 200, rng);
  EXPECT_NEAR(x.value, 6 * kLog2, 1e-12);
  EXPECT_NEAR(x.stderr_, 0.0, 1e-12);
}

TEST(PeEstimator, MatchesOracle) {
  Rng rng(16);
  auto pair = fixture::random_monitored_state(8, 5, 0.8, rng);
  expect_within(estimate_pe(pair.mps, 5000, rng), oracle::participation_entropy(pair.dense, 1.0).value);
}

TEST(BpmiEstimator, ProductAndGhz) {
  Rng rng(17);
  expect_within(estimate_bpmi(t_states(4), 2, 1000, rng), 0.0);
  expect_within(estimate_bpmi(ghz(6), 3, 1000, rng), kLog2);
}

TEST(BpmiEstimator, MatchesOracle) {
  Rng rng(18);
  auto pair = fixture::random_monitored_state(6, 4, 0.8, rng);
  const std::vector<std::size_t> cuts{1, 3, 5};
  const auto est = estimate_bpmi(pair.mps, cuts, 5000, rng);
  for (std::size_t c = 0; c < cuts.size(); ++c) expect_within(est[c], oracle::bpmi(pair.dense, cuts[c]).value);
}

TEST(PeEstimator, StabilizerStateMatchesRankFormula) {
  Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    MpsState s(6, LocalState::Zero);
    StabilizerTableau tab(6);
    for (int g = 0; g < 30; ++g) {
      const std::size_t i = uniform_index(rng, 5);
      switch (uniform_index(rng, 3)) {
        case 0:
          s.apply_unitary(gates::hadamard(), i);
          tab.apply(CliffordGate::hadamard(i));
          break;
        case 1:
          s.apply_unitary(gates::phase_s(), i);
          tab.apply(CliffordGate::phase(i));
          break;
        default:
          s.apply_unitary(gates::cnot(), i);
          tab.apply(CliffordGate::cx(i, i + 1));
          break;
      }
    }
    const auto r = estimate_pe(s, 500, rng);
    const double exact = tab.participation_entropy().value;
    expect_within(r, exact);
    EXPECT_NEAR(std::fmod(exact / kLog2 + 0.5, 1.0), 0.5, 1e-9);
  }
}
