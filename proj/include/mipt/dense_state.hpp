#pragma once

// Exact state-vector simulator for small chains. Ground truth for the MPS
// and tableau backends; cost is exponential in L by construction.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mipt/entropy.hpp"
#include "mipt/errors.hpp"
#include "mipt/gates.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"

namespace mipt {

class DenseState {
 public:
  using Complex = std::complex<double>;
  using Vector = Eigen::VectorXcd;

  static constexpr std::size_t kMaxQubits = 12;
  static constexpr std::size_t kMaxPauliScanQubits = 8;

  DenseState() = default;

  explicit DenseState(std::size_t num_qubits) : num_qubits_(num_qubits) {
    check_capacity(num_qubits, kMaxQubits);
    amplitudes_ = Vector::Zero(Eigen::Index{1} << num_qubits);
    amplitudes_(0) = 1.0;
  }

  DenseState(std::size_t num_qubits, Vector amplitudes) : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    check_capacity(num_qubits, kMaxQubits);
    if (amplitudes_.size() != (Eigen::Index{1} << num_qubits)) {
      throw DomainError(fmt::format("amplitude vector of size {} does not match {} qubits", amplitudes_.size(), num_qubits));
    }
    const double n2 = amplitudes_.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-10) {
      throw NormalizationError(fmt::format("state has squared norm {}", n2));
    }
  }

  // Product state from single-qubit amplitudes (a0, a1) per site.
  static DenseState product(std::size_t num_qubits, Complex a0, Complex a1) {
    DenseState s(num_qubits);
    const double norm = std::sqrt(std::norm(a0) + std::norm(a1));
    a0 /= norm;
    a1 /= norm;
    for (Eigen::Index k = 0; k < s.amplitudes_.size(); ++k) {
      Complex amp = 1.0;
      for (std::size_t i = 0; i < num_qubits; ++i) amp *= s.bit(k, i) ? a1 : a0;
      s.amplitudes_(k) = amp;
    }
    return s;
  }

  static DenseState zeros(std::size_t n) { return DenseState(n); }
  static DenseState plus(std::size_t n) { return product(n, 1.0, 1.0); }

  std::size_t num_qubits() const { return num_qubits_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::uint64_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }
  double norm() const { return amplitudes_.norm(); }

  // Bit of site i in basis index k; site 0 is the most significant bit.
  bool bit(std::uint64_t k, std::size_t site) const { return (k >> (num_qubits_ - 1 - site)) & 1U; }

  void apply(const gates::Matrix& gate, std::span<const std::size_t> sites, bool renormalize = false) {
    const std::size_t k = sites.size();
    if (gate.rows() != (Eigen::Index{1} << k) || gate.cols() != gate.rows()) {
      throw DomainError(fmt::format("{}x{} matrix cannot act on {} sites", gate.rows(), gate.cols(), k));
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (sites[a] >= num_qubits_) throw RangeError(fmt::format("site {} out of range", sites[a]));
      for (std::size_t b = a + 1; b < k; ++b) {
        if (sites[a] == sites[b]) throw DomainError("gate sites must be distinct");
      }
    }
    if (!renormalize && !gates::is_unitary(gate)) {
      throw ContractViolation("non-unitary gate applied without renormalization");
    }

    std::uint64_t mask = 0;
    std::vector<std::uint64_t> site_bits(k);
    for (std::size_t a = 0; a < k; ++a) {
      site_bits[a] = std::uint64_t{1} << (num_qubits_ - 1 - sites[a]);
      mask |= site_bits[a];
    }
    const std::uint64_t local_dim = std::uint64_t{1} << k;
    std::vector<std::uint64_t> offsets(local_dim);
    for (std::uint64_t l = 0; l < local_dim; ++l) {
      std::uint64_t off = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if ((l >> (k - 1 - a)) & 1U) off |= site_bits[a];
      }
      offsets[l] = off;
    }

    Vector local(static_cast<Eigen::Index>(local_dim));
    const auto dim = static_cast<std::uint64_t>(amplitudes_.size());
    for (std::uint64_t base = 0; base < dim; ++base) {
      if (base & mask) continue;
      for (std::uint64_t l = 0; l < local_dim; ++l) local(static_cast<Eigen::Index>(l)) = amplitudes_(static_cast<Eigen::Index>(base | offsets[l]));
      const Vector out = gate * local;
      for (std::uint64_t l = 0; l < local_dim; ++l) amplitudes_(static_cast<Eigen::Index>(base | offsets[l])) = out(static_cast<Eigen::Index>(l));
    }
    if (renormalize) {
      const double n = amplitudes_.norm();
      if (!(n > 0.0)) throw NumericalError("state annihilated by operator");
      amplitudes_ /= n;
    }
  }

  void apply(const gates::Matrix& gate, std::initializer_list<std::size_t> sites, bool renormalize = false) {
    std::vector<std::size_t> s(sites);
    apply(gate, std::span<const std::size_t>(s), renormalize);
  }

  // <psi| sigma |psi> for a full-length Pauli word (phase included).
  Complex pauli_expectation(const PauliString& word) const {
    if (word.size() != num_qubits_) throw DomainError("Pauli word length differs from qubit count");
    std::uint64_t xm = 0;
    std::uint64_t zm = 0;
    int ny = 0;
    for (std::size_t i = 0; i < num_qubits_; ++i) {
      const std::uint64_t b = std::uint64_t{1} << (num_qubits_ - 1 - i);
      if (x_bit(word[i])) xm |= b;
      if (z_bit(word[i])) zm |= b;
      ny += word[i] == Pauli::Y;
    }
    return masked_expectation(xm, zm, ny + word.phase());
  }

  double overlap_fidelity(const DenseState& other) const { return std::norm(amplitudes_.dot(other.amplitudes_)); }

  // Pauli-word expectation from bit masks; sigma = i^{phase} X^x Z^z.
  Complex masked_expectation(std::uint64_t xm, std::uint64_t zm, int phase) const {
    Complex acc = 0.0;
    const auto dim = static_cast<std::uint64_t>(amplitudes_.size());
    for (std::uint64_t k = 0; k < dim; ++k) {
      const Complex a = amplitudes_(static_cast<Eigen::Index>(k));
      if (a == 0.0) continue;
      const double sgn = (std::popcount(k & zm) & 1) ? -1.0 : 1.0;
      acc += std::conj(amplitudes_(static_cast<Eigen::Index>(k ^ xm))) * (sgn * a);
    }
    static constexpr std::array<Complex, 4> kI = {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    return kI[static_cast<std::size_t>(phase & 3)] * acc;
  }

  static void check_capacity(std::size_t n, std::size_t cap) {
    if (n > cap) throw CapacityError(fmt::format("{} qubits exceeds the dense-oracle cap of {}", n, cap));
    if (n == 0) throw DomainError("state needs at least one qubit");
  }

 private:
  std::size_t num_qubits_ = 0;
  Vector amplitudes_;
};

// ---------------------------------------------------------------------------
// Oracle quantities.

namespace oracle {

inline constexpr double kSchmidtFloor = 1e-12;

// Pi(sigma) = |<sigma>|^2 / 2^L over all 4^L words; index digit of site i is
// the letter value (I,X,Y,Z = 0..3) with site 0 most significant.
inline ProbDist exact_pauli_spectrum(const DenseState& state) {
  const std::size_t n = state.num_qubits();
  DenseState::check_capacity(n, DenseState::kMaxPauliScanQubits);
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  std::vector<double> w(count);
  const double scale = std::ldexp(1.0, -static_cast<int>(n));
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    std::uint64_t xm = 0;
    std::uint64_t zm = 0;
    int ny = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto letter = static_cast<Pauli>((idx >> (2 * (n - 1 - i))) & 3U);
      const std::uint64_t b = std::uint64_t{1} << (n - 1 - i);
      if (x_bit(letter)) xm |= b;
      if (z_bit(letter)) zm |= b;
      ny += letter == Pauli::Y;
    }
    w[idx] = std::norm(state.masked_expectation(xm, zm, ny)) * scale;
  }
  return ProbDist(std::move(w));
}

inline PauliString pauli_from_index(std::uint64_t idx, std::size_t n) {
  std::vector<Pauli> letters(n);
  for (std::size_t i = 0; i < n; ++i) letters[i] = static_cast<Pauli>((idx >> (2 * (n - 1 - i))) & 3U);
  return PauliString(std::move(letters));
}

inline std::uint64_t pauli_index(const PauliString& s) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) idx = (idx << 2) | static_cast<std::uint64_t>(s[i]);
  return idx;
}

// Squared Schmidt coefficients across the bond after `cut` sites.
inline std::vector<double> schmidt_spectrum(const DenseState& state, std::size_t cut) {
  const std::size_t n = state.num_qubits();
  if (cut < 1 || cut >= n) throw DomainError(fmt::format("cut {} outside [1, {}]", cut, n - 1));
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  // Row-major reshape: left sites are the high bits.
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = state.amplitudes()(r * cols + c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s > kSchmidtFloor) out.push_back(s * s);
  }
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return out;
}

inline EntropyValue entanglement_entropy(const DenseState& state, std::size_t cut, RenyiOrder order) {
  return renyi_entropy(ProbDist(schmidt_spectrum(state, cut)), order);
}

inline ProbDist z_distribution(const DenseState& state) {
  std::vector<double> w(static_cast<std::size_t>(state.amplitudes().size()));
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::norm(state.amplitude(k));
  return ProbDist(std::move(w));
}

inline DenseState hadamard_all(DenseState state) {
  const auto h = gates::hadamard();
  for (std::size_t i = 0; i < state.num_qubits(); ++i) state.apply(h, {i});
  return state;
}

inline ProbDist x_distribution(const DenseState& state) { return z_distribution(hadamard_all(state)); }

// Marginal of a full-chain distribution on the contiguous sites [begin, end).
inline ProbDist marginal(const ProbDist& dist, std::size_t num_qubits, std::size_t begin, std::size_t end) {
  const std::size_t width = end - begin;
  std::vector<double> w(std::size_t{1} << width, 0.0);
  const auto full = dist.weights();
  for (std::size_t k = 0; k < full.size(); ++k) {
    const std::size_t sub = (k >> (num_qubits - end)) & ((std::size_t{1} << width) - 1);
    w[sub] += full[k];
  }
  return ProbDist(std::move(w));
}

inline EntropyValue stabilizer_renyi_entropy(const DenseState& state, RenyiOrder order) {
  const double n = static_cast<double>(state.num_qubits());
  return EntropyValue(-n * kLn2 + renyi_entropy(exact_pauli_spectrum(state), order).value);
}

enum class Basis { Z, X };

inline EntropyValue participation_entropy(const DenseState& state, RenyiOrder order, Basis basis = Basis::Z) {
  return renyi_entropy(basis == Basis::Z ? z_distribution(state) : x_distribution(state), order);
}

// Shannon PE of the reduced state on [begin, end).
inline EntropyValue participation_entropy_subsystem(const DenseState& state, std::size_t begin, std::size_t end,
                                                    Basis basis = Basis::Z) {
  const ProbDist full = basis == Basis::Z ? z_distribution(state) : x_distribution(state);
  return renyi_entropy(marginal(full, state.num_qubits(), begin, end), 1.0);
}

inline EntropyValue bpmi(const DenseState& state, std::size_t cut, Basis basis = Basis::Z) {
  const std::size_t n = state.num_qubits();
  if (cut < 1 || cut >= n) throw DomainError(fmt::format("cut {} outside [1, {}]", cut, n - 1));
  const ProbDist full = basis == Basis::Z ? z_distribution(state) : x_distribution(state);
  return mutual_information(renyi_entropy(marginal(full, n, 0, cut), 1.0),
                            renyi_entropy(marginal(full, n, cut, n), 1.0), renyi_entropy(full, 1.0));
}

// Sum over sigma_R of <sigma_R (x) I>^k for the region R = [begin, end).
inline double restricted_moment(const DenseState& state, std::size_t begin, std::size_t end, int power) {
  const std::size_t n = state.num_qubits();
  const std::size_t width = end - begin;
  const std::uint64_t count = std::uint64_t{1} << (2 * width);
  double acc = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    std::uint64_t xm = 0;
    std::uint64_t zm = 0;
    int ny = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const auto letter = static_cast<Pauli>((idx >> (2 * (width - 1 - j))) & 3U);
      const std::uint64_t b = std::uint64_t{1} << (n - 1 - (begin + j));
      if (x_bit(letter)) xm |= b;
      if (z_bit(letter)) zm |= b;
      ny += letter == Pauli::Y;
    }
    const double t = std::abs(state.masked_expectation(xm, zm, ny));
    acc += std::pow(t, power);
  }
  return acc;
}

// Purity-corrected stabilizer mutual information across the cut,
// M(A) + M(B) - M(AB) with M(rho) = -log(sum Tr^4(rho s) / sum Tr^2(rho s)).
inline EntropyValue bsmi(const DenseState& state, std::size_t cut) {
  const std::size_t n = state.num_qubits();
  if (cut < 1 || cut >= n) throw DomainError(fmt::format("cut {} outside [1, {}]", cut, n - 1));
  DenseState::check_capacity(n, DenseState::kMaxPauliScanQubits);
  auto magic = [&](std::size_t b, std::size_t e) {
    return -std::log(restricted_moment(state, b, e, 4) / restricted_moment(state, b, e, 2));
  };
  return EntropyValue(magic(0, cut) + magic(cut, n) - magic(0, n));
}

struct Entropies {
  EntropyValue ee;
  std::optional<EntropyValue> sre;
  EntropyValue pe_z;
  EntropyValue pe_x;
};

inline Entropies exact_entropies(const DenseState& state, std::size_t cut, RenyiOrder order) {
  Entropies e;
  e.ee = entanglement_entropy(state, cut, order);
  if (state.num_qubits() <= DenseState::kMaxPauliScanQubits) e.sre = stabilizer_renyi_entropy(state, order);
  e.pe_z = participation_entropy(state, order, Basis::Z);
  e.pe_x = participation_entropy(state, order, Basis::X);
  return e;
}

// Number of basis states with non-zero probability.
inline std::size_t support_size(const ProbDist& dist, double floor = 1e-12) {
  std::size_t c = 0;
  for (double w : dist.weights()) c += w > floor;
  return c;
}

}  // namespace oracle
}  // namespace mipt
