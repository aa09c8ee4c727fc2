#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "mipt/dense_state.hpp"
#include "mipt/errors.hpp"
#include "mipt/gates.hpp"
#include "mipt/mps.hpp"
#include "support.hpp"

using namespace mipt;

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

MpsState bell_mps() {
  MpsState s(2, LocalState::Zero);
  s.apply_unitary(gates::hadamard(), 0);
  s.apply_unitary(gates::cnot(), 0);
  return s;
}

}  // namespace

TEST(MpsState, ProductStates) {
  const MpsState z(4, LocalState::Zero);
  EXPECT_NEAR(std::abs(z.to_dense().amplitude(0)), 1.0, 1e-15);
  EXPECT_NEAR(z.norm(), 1.0, 1e-15);
  EXPECT_EQ(z.max_bond_dimension(), 1U);
  const MpsState p(4, LocalState::Plus);
  for (std::uint64_t k = 0; k < 16; ++k) EXPECT_NEAR(std::abs(p.to_dense().amplitude(k)), 0.25, 1e-15);
  EXPECT_NEAR(p.norm(), 1.0, 1e-15);
  EXPECT_TRUE(p.is_right_normalized());
  EXPECT_THROW(MpsState(1, LocalState::Zero), DomainError);
}

TEST(MpsState, DiagonalGateOnEigenstateIsPhaseOnly) {
  MpsState s(3, LocalState::Zero);
  s.apply_pauli_rotation(LocalPauli{1, {Pauli::Z}}, kQuarterPi);
  EXPECT_NEAR(s.entanglement_entropy(1).value, 0.0, 1e-14);
  EXPECT_NEAR(s.pauli_expectation(PauliString::parse("IZI")), 1.0, 1e-14);
  EXPECT_NEAR(fidelity(s, DenseState::zeros(3)), 1.0, 1e-14);
}

TEST(MpsState, XxRotationMakesBellPair) {
  MpsState s(2, LocalState::Zero);
  s.apply_pauli_rotation(LocalPauli{0, {Pauli::X, Pauli::X}}, kQuarterPi);
  auto d = DenseState::zeros(2);
  d.apply(gates::pauli_rotation(std::vector<Pauli>{Pauli::X, Pauli::X}, kQuarterPi), {0, 1});
  EXPECT_NEAR(fidelity(s, d), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(d.amplitude(0b11)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(s.entanglement_entropy(1).value, std::log(2.0), 1e-12);
}

TEST(MpsState, InversePairRestoresState) {
  Rng rng(5);
  auto pair = fixture::random_monitored_state(5, 3, 0.4, rng);
  const auto before = pair.mps.to_dense();
  const auto u = fixture::random_unitary(8, rng);
  pair.mps.apply_unitary(u, 1);
  pair.mps.apply_unitary(u.adjoint(), 1);
  EXPECT_NEAR(pair.mps.to_dense().overlap_fidelity(before), 1.0, 1e-10);
}

TEST(MpsState, RejectsBadOperators) {
  MpsState s(3, LocalState::Zero);
  EXPECT_THROW(s.apply_unitary(gates::weak_kraus(std::vector<Pauli>{Pauli::Z}, 0.3, 1), 0), ContractViolation);
  EXPECT_THROW(s.apply_unitary(gates::cnot(), 2), RangeError);
  EXPECT_THROW(s.weak_measure(WeakMeasurementSpec{LocalPauli{0, {Pauli::Z}}, -0.1}, 0.5), DomainError);
  EXPECT_THROW(s.entanglement_entropy(0), DomainError);
  EXPECT_THROW(s.entanglement_entropy(3), DomainError);
}

TEST(MpsState, RandomCircuitsMatchDenseEvolution) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto pair = fixture::random_monitored_state(6, 6, 0.7, rng);
    EXPECT_GT(fidelity(pair.mps, pair.dense), 1.0 - 1e-10);
    EXPECT_NEAR(pair.mps.norm(), 1.0, 1e-10);
    for (std::size_t c = 1; c < 6; ++c) {
      for (double n : {1.0, 2.0}) {
        EXPECT_NEAR(pair.mps.entanglement_entropy(c, n).value, oracle::entanglement_entropy(pair.dense, c, n).value,
                    1e-8);
      }
    }
  }
}

TEST(MpsState, ThreeSiteGatesMatchDense) {
  Rng rng(23);
  MpsState s(5, LocalState::Plus);
  auto d = DenseState::plus(5);
  for (int g = 0; g < 20; ++g) {
    const std::size_t left = uniform_index(rng, 3);
    const std::vector<Pauli> word{fixture::random_letter(rng), Pauli::I, fixture::random_letter(rng)};
    const double theta = uniform01(rng) * 3.0;
    s.apply_pauli_rotation(LocalPauli{left, word}, theta);
    d.apply(gates::pauli_rotation(word, theta), {left, left + 1, left + 2});
    const auto u = fixture::random_unitary(8, rng);
    s.apply_unitary(u, left);
    d.apply(u, {left, left + 1, left + 2});
  }
  EXPECT_GT(fidelity(s, d), 1.0 - 1e-10);
}

TEST(MpsState, PauliExpectationsMatchDense) {
  Rng rng(29);
  auto pair = fixture::random_monitored_state(5, 4, 0.5, rng);
  for (int k = 0; k < 50; ++k) {
    PauliString p(5);
    for (std::size_t q = 0; q < 5; ++q) p[q] = static_cast<Pauli>(uniform_index(rng, 4));
    EXPECT_NEAR(pair.mps.pauli_expectation(p), pair.dense.pauli_expectation(p).real(), 1e-10);
  }
  EXPECT_NEAR(MpsState(3, LocalState::Zero).pauli_expectation(PauliString::parse("ZII")), 1.0, 1e-15);
  EXPECT_NEAR(MpsState(3, LocalState::Zero).pauli_expectation(PauliString::parse("XII")), 0.0, 1e-15);
  EXPECT_NEAR(bell_mps().pauli_expectation(PauliString::parse("XX")), 1.0, 1e-14);
  EXPECT_NEAR(bell_mps().entanglement_entropy(1).value, std::log(2.0), 1e-12);
}

TEST(WeakMeasurement, ProbabilitiesAndPostStateMatchDense) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto pair = fixture::random_monitored_state(4, 2, 0.3, rng);
    const std::size_t left = uniform_index(rng, 3);
    const std::vector<Pauli> word{fixture::random_letter(rng), fixture::random_letter(rng)};
    const double beta = 0.8;
    const double expect = pair.dense.pauli_expectation(PauliString::local(4, {{left, word[0]}, {left + 1, word[1]}})).real();
    const double q_plus = 0.5 * (1.0 + std::tanh(2 * beta) * expect);
    // Independent Born weight of the + branch: |K+ psi|^2 / (|K+ psi|^2 + |K- psi|^2).
    DenseState tmp = pair.dense;
    const auto kp = gates::weak_kraus(word, beta, +1);
    const auto km = gates::weak_kraus(word, beta, -1);
    auto weight = [&](const gates::Matrix& k) {
      double acc = 0;
      const auto& a = tmp.amplitudes();
      for (std::uint64_t base = 0; base < 16; ++base) {
        if ((base >> (3 - left)) & 1U || (base >> (2 - left)) & 1U) continue;
        const std::uint64_t hi = std::uint64_t{1} << (3 - left);
        const std::uint64_t lo = std::uint64_t{1} << (2 - left);
        Eigen::Vector4cd v(a(base), a(base | lo), a(base | hi), a(base | hi | lo));
        acc += (k * v).squaredNorm();
      }
      return acc;
    };
    const double wp = weight(kp);
    const double wm = weight(km);
    EXPECT_NEAR(q_plus, wp / (wp + wm), 1e-10);
    const double u = uniform01(rng);
    const auto r = pair.mps.weak_measure(WeakMeasurementSpec{LocalPauli{left, word}, beta}, u);
    EXPECT_EQ(r.outcome, u < q_plus ? +1 : -1);
    EXPECT_NEAR(r.probability, r.outcome > 0 ? q_plus : 1 - q_plus, 1e-10);
    pair.dense.apply(r.outcome > 0 ? kp : km, {left, left + 1}, true);
    EXPECT_GT(fidelity(pair.mps, pair.dense), 1.0 - 1e-10);
  }
}

TEST(WeakMeasurement, Limits) {
  MpsState s(3, LocalState::Zero);
  // <X> = 0 gives q = 1/2 for every beta.
  auto r = s.weak_measure(WeakMeasurementSpec{LocalPauli{0, {Pauli::X}}, 2.0}, 0.4999);
  EXPECT_NEAR(r.probability, 0.5, 1e-14);
  MpsState t(3, LocalState::Plus);
  r = t.weak_measure(WeakMeasurementSpec{LocalPauli{0, {Pauli::Z}}, 0.0}, 0.7);
  EXPECT_NEAR(r.probability, 0.5, 1e-14);
  EXPECT_NEAR(fidelity(t, DenseState::plus(3)), 1.0, 1e-14);
  MpsState e(3, LocalState::Zero);
  r = e.weak_measure(WeakMeasurementSpec{LocalPauli{1, {Pauli::Z, Pauli::Z}}, 20.0}, 0.999);
  EXPECT_EQ(r.outcome, +1);
  EXPECT_NEAR(r.probability, 1.0, 1e-12);
  EXPECT_NEAR(fidelity(e, DenseState::zeros(3)), 1.0, 1e-14);
}

TEST(ProjectiveMeasurement, Examples) {
  MpsState z(2, LocalState::Zero);
  auto r = z.projective_measure(LocalPauli{0, {Pauli::Z}}, 0.99);
  EXPECT_EQ(r.outcome, +1);
  EXPECT_NEAR(fidelity(z, DenseState::zeros(2)), 1.0, 1e-14);
  for (double u : {0.2, 0.8}) {
    MpsState p(2, LocalState::Plus);
    r = p.projective_measure(LocalPauli{0, {Pauli::Z}}, u);
    EXPECT_NEAR(r.probability, 0.5, 1e-14);
    EXPECT_NEAR(p.pauli_expectation(PauliString::parse("ZI")), r.outcome, 1e-14);
  }
  auto b = bell_mps();
  r = b.projective_measure(LocalPauli{0, {Pauli::X, Pauli::X}}, 0.999999);
  EXPECT_EQ(r.outcome, +1);
  EXPECT_NEAR(r.probability, 1.0, 1e-12);
  EXPECT_THROW(b.projective_measure(LocalPauli{0, {Pauli::X, Pauli::X, Pauli::X}}, 0.5), RangeError);
  MpsState three(3, LocalState::Zero);
  EXPECT_THROW(three.projective_measure(LocalPauli{0, {Pauli::X, Pauli::X, Pauli::X}}, 0.5), DomainError);
}

TEST(Truncation, BondCapAndDiscardedWeight) {
  Rng rng(41);
  MpsState small(8, LocalState::Zero, TruncationPolicy{2, 0.0});
  MpsState big(8, LocalState::Zero, TruncationPolicy{16, 0.0});
  for (int layer = 0; layer < 6; ++layer) {
    for (std::size_t i = layer % 2; i + 1 < 8; i += 2) {
      const auto u = fixture::random_unitary(4, rng);
      small.apply_unitary(u, i);
      big.apply_unitary(u, i);
    }
  }
  EXPECT_LE(small.max_bond_dimension(), 2U);
  EXPECT_GT(small.total_discarded_weight(), 1e-6);
  EXPECT_LE(big.total_discarded_weight(), small.total_discarded_weight());
  EXPECT_NEAR(small.norm(), 1.0, 1e-10);
  EXPECT_FALSE(small.truncation_log().empty());
}

TEST(Truncation, RaisingChiNeverIncreasesDiscardedWeight) {
  double prev = INFINITY;
  for (std::size_t chi : {1U, 2U, 4U, 8U, 16U}) {
    Rng rng(43);
    auto pair = fixture::random_monitored_state(8, 8, 0.5, rng, chi);
    const double w = pair.mps.total_discarded_weight();
    EXPECT_LE(w, prev + 1e-12);
    prev = w;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(MpsState, RightNormalization) {
  Rng rng(47);
  auto pair = fixture::random_monitored_state(6, 4, 0.5, rng);
  pair.mps.right_normalize();
  EXPECT_EQ(pair.mps.center(), 0U);
  EXPECT_TRUE(pair.mps.is_right_normalized());
  EXPECT_GT(fidelity(pair.mps, pair.dense), 1.0 - 1e-10);
}

TEST(MpsState, FromDenseRoundTrip) {
  Rng rng(53);
  auto pair = fixture::random_monitored_state(6, 5, 0.5, rng);
  auto m = MpsState::from_dense(pair.dense);
  EXPECT_GT(fidelity(m, pair.dense), 1.0 - 1e-12);
  EXPECT_NEAR(m.entanglement_entropy(3).value, oracle::entanglement_entropy(pair.dense, 3, 1.0).value, 1e-10);
}
