#pragma once

// Shared fixtures: random states evolved identically on the dense and MPS
// backends.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>
#include <numbers>

#include "mipt/dense_state.hpp"
#include "mipt/gates.hpp"
#include "mipt/mps.hpp"
#include "mipt/rng.hpp"
#include "mipt/tableau.hpp"

namespace mipt::fixture {

inline gates::Matrix random_unitary(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  gates::Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<gates::Matrix> qr(m);
  gates::Matrix q = qr.householderQ();
  const gates::Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
  return q;
}

inline Pauli random_letter(Rng& rng) { return static_cast<Pauli>(1 + uniform_index(rng, 3)); }

struct Pair {
  DenseState dense;
  MpsState mps;
};

// Brickwork of random 2-site unitaries interleaved with weak two-site Pauli
// measurements; both backends see the same uniform draws.
inline Pair random_monitored_state(std::size_t n, std::size_t depth, double beta, Rng& rng, std::size_t chi = 64) {
  Pair s{DenseState::zeros(n), MpsState(n, LocalState::Zero, TruncationPolicy{chi, 0.0})};
  for (std::size_t t = 0; t < depth; ++t) {
    for (std::size_t i = t % 2; i + 1 < n; i += 2) {
      const auto u = random_unitary(4, rng);
      s.dense.apply(u, {i, i + 1});
      s.mps.apply_unitary(u, i);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (uniform01(rng) < 0.5) continue;
      std::vector<Pauli> word{random_letter(rng), random_letter(rng)};
      const double draw = uniform01(rng);
      const auto r = s.mps.weak_measure(WeakMeasurementSpec{LocalPauli{i, word}, beta}, draw);
      s.dense.apply(gates::weak_kraus(word, beta, r.outcome), {i, i + 1}, true);
    }
  }
  return s;
}

// Pearson goodness of fit. Bins with expected count below 5 are pooled; any
// count in a zero-probability bin fails outright (p = 0).
inline double chi_square_p_value(std::span<const double> probs, std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  const double n = static_cast<double>(total);
  double stat = 0.0;
  std::size_t dof = 0;
  double pooled_e = 0.0;
  double pooled_o = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double e = probs[k] * n;
    if (probs[k] <= 1e-14) {
      if (counts[k] > 0) return 0.0;
      continue;
    }
    if (e < 5.0) {
      pooled_e += e;
      pooled_o += static_cast<double>(counts[k]);
      continue;
    }
    stat += (static_cast<double>(counts[k]) - e) * (static_cast<double>(counts[k]) - e) / e;
    ++dof;
  }
  if (pooled_e > 0.0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++dof;
  }
  if (dof < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double total_variation(std::span<const double> probs, std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  double tv = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    tv += std::abs(probs[k] - static_cast<double>(counts[k]) / static_cast<double>(total));
  }
  return 0.5 * tv;
}

// A Clifford step applied identically to a tableau and a dense state.
struct Twin {
  StabilizerTableau tab;
  DenseState dense;
  std::size_t mismatches = 0;

  Twin(std::size_t n, PauliBasis basis)
      : tab(n, basis), dense(basis == PauliBasis::Z ? DenseState::zeros(n) : DenseState::plus(n)) {}

  void random_gate(Rng& rng) {
    const std::size_t n = tab.num_qubits();
    const std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= a) ++b;
    switch (uniform_index(rng, 5)) {
      case 0:
        tab.apply(CliffordGate::hadamard(a));
        dense.apply(gates::hadamard(), {a});
        break;
      case 1:
        tab.apply(CliffordGate::phase(a));
        dense.apply(gates::phase_s(), {a});
        break;
      case 2:
        tab.apply(CliffordGate::cx(a, b));
        dense.apply(gates::cnot(), {a, b});
        break;
      case 3:
        tab.apply(CliffordGate::cz(a, b));
        dense.apply(gates::cz(), {a, b});
        break;
      default: {
        PauliString p(2);
        p[0] = static_cast<Pauli>(uniform_index(rng, 4));
        p[1] = static_cast<Pauli>(1 + uniform_index(rng, 3));
        const int sign = uniform01(rng) < 0.5 ? 1 : -1;
        tab.apply(CliffordGate::pauli_rotation({a, b}, p, sign));
        dense.apply(gates::pauli_rotation(p.letters(), sign * std::numbers::pi / 4), {a, b});
        break;
      }
    }
  }

  void random_measurement(Rng& rng) {
    const std::size_t n = tab.num_qubits();
    PauliString p(n);
    const std::size_t a = uniform_index(rng, n);
    p[a] = static_cast<Pauli>(1 + uniform_index(rng, 3));
    if (uniform01(rng) < 0.5) p[(a + 1) % n] = static_cast<Pauli>(1 + uniform_index(rng, 3));
    const double expect = dense.pauli_expectation(p).real();
    const auto o = tab.measure(p, rng);
    if (std::abs(expect - (o.deterministic ? o.value : 0.0)) > 1e-10) ++mismatches;
    gates::Matrix proj = 0.5 * (gates::Matrix::Identity(1 << n, 1 << n) + double(o.value) * full_matrix(p));
    Eigen::VectorXcd v = proj * dense.amplitudes();
    v /= v.norm();
    dense = DenseState(n, v);
  }

  static gates::Matrix full_matrix(const PauliString& p) { return gates::pauli_word_matrix(p.letters()); }

  // Every signed stabilizer has expectation +1 and no measurement disagreed.
  bool consistent() const {
    if (mismatches != 0 || !tab.is_valid()) return false;
    for (std::size_t i = 0; i < tab.num_qubits(); ++i) {
      const auto s = tab.stabilizer(i);
      PauliString unsigned_s = s;
      unsigned_s.set_phase(0);
      if (std::abs(dense.pauli_expectation(unsigned_s).real() - s.sign()) > 1e-10) return false;
    }
    return true;
  }
};

Twin random_twin(std::size_t n, Rng& rng, bool with_measurements = true) {
  Twin t(n, uniform01(rng) < 0.5 ? PauliBasis::Z : PauliBasis::X);
  const std::size_t steps = 4 * n + uniform_index(rng, 4 * n);
  for (std::size_t k = 0; k < steps; ++k) {
    if (with_measurements && uniform01(rng) < 0.2) {
      t.random_measurement(rng);
    } else {
      t.random_gate(rng);
    }
  }
  return t;
}

}  // namespace mipt::fixture
