#pragma once

// Stabilizer tableau (destabilizers + stabilizers) over GF(2), bit-packed.
//
// Row i < n is destabilizer i, row n + i is stabilizer i. A row holds x and z
// bit vectors and a sign bit r; it stands for (-1)^r prod_q i^{x_q z_q} X^x Z^z
// (so x = z = 1 is Y). Only the stabilizer half defines the state; the
// destabilizers make measurement O(n^2 / 64).

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "mipt/entropy.hpp"
#include "mipt/errors.hpp"
#include "mipt/gf2.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"

namespace mipt {

enum class PauliBasis { Z, X };

// Clifford action on one or two sites stored as the image of every local
// Pauli: entry q (bits x_a | z_a << 1 | x_b << 2 | z_b << 3) maps to local
// Pauli `bits` with sign `negate`.
class CliffordGate {
 public:
  enum class Kind { H, S, Sdg, CX, CZ, PauliRotation, Random2Q, Custom };

  struct Image {
    std::uint8_t bits = 0;
    bool negate = false;
  };

  CliffordGate() = default;

  Kind kind() const { return kind_; }
  const std::vector<std::size_t>& sites() const { return sites_; }
  std::size_t arity() const { return sites_.size(); }
  const Image& image(std::uint8_t local) const { return table_[local]; }
  const std::string& label() const { return label_; }

  // Images of X_a, Z_a (, X_b, Z_b) as signed local Pauli words.
  static CliffordGate from_generator_images(Kind kind, std::vector<std::size_t> sites,
                                            const std::vector<PauliString>& images, std::string label) {
    const std::size_t k = sites.size();
    if (k < 1 || k > 2) throw DomainError("table gates act on one or two sites");
    if (images.size() != 2 * k) throw DomainError("need the image of every X and Z generator");
    CliffordGate g;
    g.kind_ = kind;
    g.sites_ = std::move(sites);
    g.label_ = std::move(label);
    const std::size_t entries = std::size_t{1} << (2 * k);
    for (std::size_t q = 0; q < entries; ++q) {
      PauliString acc(k);
      int phase = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const bool x = (q >> (2 * j)) & 1U;
        const bool z = (q >> (2 * j + 1)) & 1U;
        phase += static_cast<int>(x && z);
        if (x) acc = acc * images[2 * j];
        if (z) acc = acc * images[2 * j + 1];
      }
      acc.set_phase(acc.phase() + phase);
      if (!acc.is_hermitian()) throw ContractViolation("generator images do not define a Clifford map");
      g.table_[q] = {encode(acc), acc.phase() == 2};
    }
    return g;
  }

  static CliffordGate hadamard(std::size_t q) {
    return from_generator_images(Kind::H, {q}, {PauliString::parse("Z"), PauliString::parse("X")}, "H");
  }
  static CliffordGate phase(std::size_t q) {
    return from_generator_images(Kind::S, {q}, {PauliString::parse("Y"), PauliString::parse("Z")}, "S");
  }
  static CliffordGate phase_dag(std::size_t q) {
    return from_generator_images(Kind::Sdg, {q}, {PauliString::parse("-Y"), PauliString::parse("Z")}, "Sdg");
  }
  static CliffordGate cx(std::size_t control, std::size_t target) {
    return from_generator_images(Kind::CX, {control, target},
                                 {PauliString::parse("XX"), PauliString::parse("ZI"), PauliString::parse("IX"),
                                  PauliString::parse("ZZ")},
                                 "CX");
  }
  static CliffordGate cz(std::size_t a, std::size_t b) {
    return from_generator_images(Kind::CZ, {a, b},
                                 {PauliString::parse("XZ"), PauliString::parse("ZI"), PauliString::parse("ZX"),
                                  PauliString::parse("IZ")},
                                 "CZ");
  }

  static CliffordGate named(std::string_view name, std::vector<std::size_t> sites) {
    auto need = [&](std::size_t k) {
      if (sites.size() != k) throw DomainError(fmt::format("gate {} acts on {} sites, got {}", name, k, sites.size()));
    };
    if (name == "H") return need(1), hadamard(sites[0]);
    if (name == "S") return need(1), phase(sites[0]);
    if (name == "Sdg") return need(1), phase_dag(sites[0]);
    if (name == "CX") return need(2), cx(sites[0], sites[1]);
    if (name == "CZ") return need(2), cz(sites[0], sites[1]);
    throw DomainError(fmt::format("unknown Clifford gate '{}'", name));
  }

  // U Q U^dag = +-Q' implies U^dag Q' U = +-Q.
  CliffordGate inverse() const {
    CliffordGate g = *this;
    g.kind_ = Kind::Custom;
    g.label_ = label_ + "^dag";
    const std::size_t entries = std::size_t{1} << (2 * arity());
    for (std::size_t q = 0; q < entries; ++q) g.table_[table_[q].bits] = {static_cast<std::uint8_t>(q), table_[q].negate};
    return g;
  }

  // Conjugation must preserve the symplectic form on local Paulis.
  bool preserves_commutation() const {
    const std::size_t entries = std::size_t{1} << (2 * arity());
    for (std::size_t a = 0; a < entries; ++a) {
      for (std::size_t b = 0; b < entries; ++b) {
        const bool before = symplectic_product(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
        const bool after = symplectic_product(table_[a].bits, table_[b].bits);
        if (before != after) return false;
      }
    }
    return true;
  }

  // exp(i sign pi/4 P) for a Pauli supported on one or two of `sites`.
  // Q -> Q if [P, Q] = 0, else Q -> sign * i P Q.
  static CliffordGate pauli_rotation(std::vector<std::size_t> sites, const PauliString& p, int sign) {
    if (p.size() != sites.size()) throw DomainError("rotation word length differs from site count");
    const std::size_t k = sites.size();
    std::vector<PauliString> images;
    for (std::size_t j = 0; j < k; ++j) {
      for (Pauli gen : {Pauli::X, Pauli::Z}) {
        PauliString q(k);
        q[j] = gen;
        if (q.commutes_with(p)) {
          images.push_back(q);
        } else {
          PauliString img = p * q;
          img.set_phase(img.phase() + (sign > 0 ? 1 : 3));
          images.push_back(img);
        }
      }
    }
    return from_generator_images(Kind::PauliRotation, std::move(sites), images,
                                 fmt::format("exp({}i pi/4 {})", sign > 0 ? "+" : "-", p.letters_str()));
  }

  // Uniform over the 11520 two-qubit Cliffords modulo global phase:
  // one of the 720 symplectic matrices times one of 16 sign patterns.
  static constexpr std::uint64_t kTwoQubitCliffords = 720 * 16;

  static CliffordGate random_two_qubit(std::size_t a, std::size_t b, Rng& rng) {
    return two_qubit(a, b, uniform_index(rng, kTwoQubitCliffords));
  }

  // Element `index` of the enumeration: symplectic matrix index / 16, sign
  // pattern index % 16.
  static CliffordGate two_qubit(std::size_t a, std::size_t b, std::uint64_t index) {
    const auto& sp = symplectic_group_4();
    if (index >= kTwoQubitCliffords) throw RangeError(fmt::format("two-qubit Clifford index {} out of range", index));
    const auto& m = sp[index / 16];
    const std::uint64_t signs = index % 16;
    std::vector<PauliString> images;
    for (std::size_t j = 0; j < 4; ++j) {
      PauliString img = decode(m[j], 2);
      if ((signs >> j) & 1U) img.set_phase(img.phase() + 2);
      images.push_back(img);
    }
    return from_generator_images(Kind::Random2Q, {a, b}, images, fmt::format("C2[{}]", index));
  }

  // All 4x4 symplectic matrices over GF(2): each entry holds the images of
  // X_a, Z_a, X_b, Z_b as 4-bit local words.
  static const std::vector<std::array<std::uint8_t, 4>>& symplectic_group_4() {
    static const std::vector<std::array<std::uint8_t, 4>> group = [] {
      std::vector<std::array<std::uint8_t, 4>> out;
      for (std::uint8_t v0 = 1; v0 < 16; ++v0) {
        for (std::uint8_t v1 = 1; v1 < 16; ++v1) {
          if (!symplectic_product(v0, v1)) continue;
          for (std::uint8_t v2 = 1; v2 < 16; ++v2) {
            if (symplectic_product(v0, v2) || symplectic_product(v1, v2)) continue;
            for (std::uint8_t v3 = 1; v3 < 16; ++v3) {
              if (symplectic_product(v0, v3) || symplectic_product(v1, v3) || !symplectic_product(v2, v3)) continue;
              out.push_back({v0, v1, v2, v3});
            }
          }
        }
      }
      return out;
    }();
    return group;
  }

  static bool symplectic_product(std::uint8_t u, std::uint8_t v) {
    const int a = ((u & 1) & ((v >> 1) & 1)) ^ (((u >> 1) & 1) & (v & 1));
    const int b = (((u >> 2) & 1) & ((v >> 3) & 1)) ^ (((u >> 3) & 1) & ((v >> 2) & 1));
    return (a ^ b) != 0;
  }

  static std::uint8_t encode(const PauliString& p) {
    std::uint8_t bits = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      bits |= static_cast<std::uint8_t>(x_bit(p[j]) << (2 * j));
      bits |= static_cast<std::uint8_t>(z_bit(p[j]) << (2 * j + 1));
    }
    return bits;
  }

  static PauliString decode(std::uint8_t bits, std::size_t k) {
    PauliString p(k);
    for (std::size_t j = 0; j < k; ++j) p[j] = from_bits((bits >> (2 * j)) & 1U, (bits >> (2 * j + 1)) & 1U);
    return p;
  }

 private:
  Kind kind_ = Kind::Custom;
  std::vector<std::size_t> sites_;
  std::array<Image, 16> table_{};
  std::string label_;
};

class StabilizerTableau {
 public:
  using Word = gf2::Word;

  StabilizerTableau() = default;

  StabilizerTableau(std::size_t n, PauliBasis basis = PauliBasis::Z)
      : n_(n), stride_(gf2::words_for(n)), x_(2 * n * stride_, 0), z_(2 * n * stride_, 0), r_(2 * n, 0) {
    if (n < 1) throw DomainError("tableau needs at least one qubit");
    for (std::size_t i = 0; i < n; ++i) {
      // |0>: destab X_i, stab Z_i. |+>: destab Z_i, stab X_i.
      if (basis == PauliBasis::Z) {
        set_x(i, i, true);
        set_z(n + i, i, true);
      } else {
        set_z(i, i, true);
        set_x(n + i, i, true);
      }
    }
  }

  std::size_t num_qubits() const { return n_; }

  bool x(std::size_t row, std::size_t q) const { return (x_[row * stride_ + q / 64] >> (q % 64)) & 1U; }
  bool z(std::size_t row, std::size_t q) const { return (z_[row * stride_ + q / 64] >> (q % 64)) & 1U; }
  bool sign(std::size_t row) const { return r_[row] != 0; }

  // Stabilizer generator i as a signed Pauli word.
  PauliString stabilizer(std::size_t i) const { return row_string(n_ + i); }
  PauliString destabilizer(std::size_t i) const { return row_string(i); }

  gf2::BitMatrix x_block() const { return block(true, false, 0, 0); }
  gf2::BitMatrix z_block() const { return block(false, true, 0, 0); }

  // -------------------------------------------------------------------
  // Gates.

  void apply(const CliffordGate& g) {
    apply_unchecked(g);
    debug_check();
  }

  void apply_unchecked(const CliffordGate& g) {
    for (std::size_t s : g.sites()) {
      if (s >= n_) throw RangeError(fmt::format("gate site {} outside {} qubits", s, n_));
    }
    if (g.arity() == 1) {
      const std::size_t q = g.sites()[0];
      for (std::size_t row = 0; row < 2 * n_; ++row) {
        const auto local = static_cast<std::uint8_t>(x(row, q) | (z(row, q) << 1));
        const auto& img = g.image(local);
        set_x(row, q, img.bits & 1U);
        set_z(row, q, (img.bits >> 1) & 1U);
        r_[row] ^= static_cast<std::uint8_t>(img.negate);
      }
      return;
    }
    const std::size_t a = g.sites()[0];
    const std::size_t b = g.sites()[1];
    if (a == b) throw DomainError("two-qubit gate on a single site");
    for (std::size_t row = 0; row < 2 * n_; ++row) {
      const auto local =
          static_cast<std::uint8_t>(x(row, a) | (z(row, a) << 1) | (x(row, b) << 2) | (z(row, b) << 3));
      if (local == 0) continue;
      const auto& img = g.image(local);
      set_x(row, a, img.bits & 1U);
      set_z(row, a, (img.bits >> 1) & 1U);
      set_x(row, b, (img.bits >> 2) & 1U);
      set_z(row, b, (img.bits >> 3) & 1U);
      r_[row] ^= static_cast<std::uint8_t>(img.negate);
    }
  }

  void h(std::size_t q) {
    for (std::size_t row = 0; row < 2 * n_; ++row) {
      const bool xb = x(row, q);
      const bool zb = z(row, q);
      r_[row] ^= static_cast<std::uint8_t>(xb && zb);
      set_x(row, q, zb);
      set_z(row, q, xb);
    }
  }

  void cx(std::size_t c, std::size_t t) { apply(CliffordGate::cx(c, t)); }
  void cz(std::size_t a, std::size_t b) { apply(CliffordGate::cz(a, b)); }

  // -------------------------------------------------------------------
  // Measurement of a Hermitian Pauli word (phase +1 or -1).

  struct Outcome {
    int value = +1;
    bool deterministic = true;
  };

  Outcome measure(const PauliString& p, bool random_bit) {
    const Outcome o = measure_unchecked(p, random_bit);
    debug_check();
    return o;
  }

  Outcome measure_unchecked(const PauliString& p, bool random_bit) {
    if (p.size() != n_) throw DomainError("measured Pauli length differs from qubit count");
    if (!p.is_hermitian()) throw DomainError("measured operator must be Hermitian");
    std::vector<Word> px(stride_, 0);
    std::vector<Word> pz(stride_, 0);
    for (std::size_t q = 0; q < n_; ++q) {
      if (x_bit(p[q])) px[q / 64] |= Word{1} << (q % 64);
      if (z_bit(p[q])) pz[q / 64] |= Word{1} << (q % 64);
    }
    const bool p_neg = p.phase() == 2;

    std::size_t pivot = 2 * n_;
    for (std::size_t i = n_; i < 2 * n_; ++i) {
      if (anticommutes(i, px.data(), pz.data())) {
        pivot = i;
        break;
      }
    }

    if (pivot < 2 * n_) {
      for (std::size_t i = 0; i < 2 * n_; ++i) {
        if (i != pivot && anticommutes(i, px.data(), pz.data())) rowsum(i, pivot);
      }
      copy_row(pivot, pivot - n_);
      for (std::size_t w = 0; w < stride_; ++w) {
        x_[pivot * stride_ + w] = px[w];
        z_[pivot * stride_ + w] = pz[w];
      }
      const bool outcome_neg = random_bit;
      // Row sign stores the sign of the stabilized operator: +P or -P.
      r_[pivot] = static_cast<std::uint8_t>(outcome_neg ^ p_neg);
      return {outcome_neg ? -1 : +1, false};
    }

    // Deterministic: accumulate the stabilizers flagged by the destabilizers.
    std::vector<Word> sx(stride_, 0);
    std::vector<Word> sz(stride_, 0);
    int phase = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (anticommutes(i, px.data(), pz.data())) {
        phase = multiply_into(sx.data(), sz.data(), phase, n_ + i);
      }
    }
    // sx/sz now equal P's bits; phase is 0 (=+P) or 2 (=-P).
    const bool stabilized_neg = (phase & 3) == 2;
    const bool outcome_neg = stabilized_neg ^ p_neg;
    return {outcome_neg ? -1 : +1, true};
  }

  Outcome measure(const PauliString& p, Rng& rng) { return measure(p, (rng() >> 63) != 0); }

  // Outcome of measuring p if deterministic, nullopt otherwise (no state change).
  std::optional<int> peek(const PauliString& p) const {
    StabilizerTableau copy = *this;
    for (std::size_t i = n_; i < 2 * n_; ++i) {
      if (!copy.stabilizer(i - n_).commutes_with(p)) return std::nullopt;
    }
    return copy.measure(p, false).value;
  }

  bool stabilizes(const PauliString& p) const {
    const auto v = peek(p);
    return v && *v == +1;
  }

  // Same stabilizer group, signs included.
  bool same_state(const StabilizerTableau& other) const {
    if (other.n_ != n_) return false;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!stabilizes(other.stabilizer(i))) return false;
    }
    return true;
  }

  // -------------------------------------------------------------------
  // Entropies (nats). All Renyi orders coincide for stabilizer states.

  // rank of the X block (Z basis) or Z block (X basis) of the stabilizers.
  EntropyValue participation_entropy(PauliBasis basis = PauliBasis::Z) const {
    const auto m = basis == PauliBasis::Z ? block(true, false, 0, 0) : block(false, true, 0, 0);
    return EntropyValue(static_cast<double>(gf2::rank(m)) * kLn2);
  }

  // PE of the reduced state on [begin, end): (|A| - k_Z(A)) log 2 where k_Z(A)
  // counts independent Z-type stabilizers supported inside A, i.e.
  // k_Z(A) = n - rank[ X (all sites) | Z (outside A) ].
  EntropyValue participation_entropy_subsystem(std::size_t begin, std::size_t end,
                                               PauliBasis basis = PauliBasis::Z) const {
    check_region(begin, end);
    const bool zb = basis == PauliBasis::Z;
    gf2::BitMatrix m(n_, n_ + (n_ - (end - begin)));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t row = n_ + i;
      std::size_t col = 0;
      for (std::size_t q = 0; q < n_; ++q) m.set(i, col++, zb ? x(row, q) : z(row, q));
      for (std::size_t q = 0; q < n_; ++q) {
        if (q >= begin && q < end) continue;
        m.set(i, col++, zb ? z(row, q) : x(row, q));
      }
    }
    const std::size_t k_local = n_ - gf2::rank(std::move(m));
    return EntropyValue(static_cast<double>((end - begin) - k_local) * kLn2);
  }

  // (rank of stabilizers restricted to A) - |A|, in units of log 2.
  EntropyValue entanglement_entropy(std::size_t begin, std::size_t end) const {
    check_region(begin, end);
    const std::size_t w = end - begin;
    gf2::BitMatrix m(n_, 2 * w);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t q = begin; q < end; ++q) {
        m.set(i, q - begin, x(n_ + i, q));
        m.set(i, w + q - begin, z(n_ + i, q));
      }
    }
    const std::size_t r = gf2::rank(std::move(m));
    return EntropyValue(static_cast<double>(r - w) * kLn2);
  }

  EntropyValue entanglement_entropy(std::size_t cut) const {
    check_cut(cut);
    return entanglement_entropy(0, cut);
  }

  EntropyValue bpmi(std::size_t cut, PauliBasis basis = PauliBasis::Z) const {
    check_cut(cut);
    return mutual_information(participation_entropy_subsystem(0, cut, basis),
                              participation_entropy_subsystem(cut, n_, basis), participation_entropy(basis));
  }

  // Stabilizers commute pairwise, are independent, and each destabilizer
  // anticommutes with exactly its partner.
  bool is_valid() const {
    for (std::size_t i = 0; i < 2 * n_; ++i) {
      for (std::size_t j = i + 1; j < 2 * n_; ++j) {
        const bool anti = rows_anticommute(i, j);
        const bool expected = (j == i + n_);
        if (anti != expected) return false;
      }
    }
    gf2::BitMatrix m(n_, 2 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t q = 0; q < n_; ++q) {
        m.set(i, q, x(n_ + i, q));
        m.set(i, n_ + q, z(n_ + i, q));
      }
    }
    return gf2::rank(std::move(m)) == n_;
  }

 private:
  void debug_check() const {
#ifndef NDEBUG
    if (!is_valid()) throw ContractViolation("tableau lost commutation or independence");
#endif
  }

  void set_x(std::size_t row, std::size_t q, bool v) { set_bit(x_, row, q, v); }
  void set_z(std::size_t row, std::size_t q, bool v) { set_bit(z_, row, q, v); }

  void set_bit(std::vector<Word>& v, std::size_t row, std::size_t q, bool b) {
    Word& w = v[row * stride_ + q / 64];
    const Word bit = Word{1} << (q % 64);
    w = b ? (w | bit) : (w & ~bit);
  }

  void check_region(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > n_) throw DomainError(fmt::format("region [{}, {}) invalid for {} qubits", begin, end, n_));
  }

  void check_cut(std::size_t cut) const {
    if (cut < 1 || cut >= n_) throw DomainError(fmt::format("cut {} outside [1, {}]", cut, n_ - 1));
  }

  gf2::BitMatrix block(bool take_x, bool take_z, std::size_t, std::size_t) const {
    gf2::BitMatrix m(n_, (take_x ? n_ : 0) + (take_z ? n_ : 0));
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t col = 0;
      if (take_x) {
        for (std::size_t q = 0; q < n_; ++q) m.set(i, col++, x(n_ + i, q));
      }
      if (take_z) {
        for (std::size_t q = 0; q < n_; ++q) m.set(i, col++, z(n_ + i, q));
      }
    }
    return m;
  }

  PauliString row_string(std::size_t row) const {
    PauliString p(n_);
    for (std::size_t q = 0; q < n_; ++q) p[q] = from_bits(x(row, q), z(row, q));
    p.set_phase(r_[row] ? 2 : 0);
    return p;
  }

  bool anticommutes(std::size_t row, const Word* px, const Word* pz) const {
    int parity = 0;
    const Word* rx = &x_[row * stride_];
    const Word* rz = &z_[row * stride_];
    for (std::size_t w = 0; w < stride_; ++w) parity ^= std::popcount((rx[w] & pz[w]) ^ (rz[w] & px[w])) & 1;
    return parity != 0;
  }

  bool rows_anticommute(std::size_t a, std::size_t b) const { return anticommutes(a, &x_[b * stride_], &z_[b * stride_]); }

  // Exponent k with P1 P2 = i^k P3 for unsigned Hermitian-convention words.
  static int product_exponent(const Word* x1, const Word* z1, const Word* x2, const Word* z2, std::size_t stride) {
    int k = 0;
    for (std::size_t w = 0; w < stride; ++w) {
      const Word X1 = x1[w] & ~z1[w];
      const Word Y1 = x1[w] & z1[w];
      const Word Z1 = ~x1[w] & z1[w];
      const Word X2 = x2[w] & ~z2[w];
      const Word Y2 = x2[w] & z2[w];
      const Word Z2 = ~x2[w] & z2[w];
      const Word plus = (X1 & Y2) | (Y1 & Z2) | (Z1 & X2);
      const Word minus = (Y1 & X2) | (Z1 & Y2) | (X1 & Z2);
      k += std::popcount(plus) - std::popcount(minus);
    }
    return k;
  }

  // row h <- row i * row h.
  void rowsum(std::size_t h, std::size_t i) {
    int k = 2 * r_[h] + 2 * r_[i] +
            product_exponent(&x_[i * stride_], &z_[i * stride_], &x_[h * stride_], &z_[h * stride_], stride_);
    k = ((k % 4) + 4) % 4;
    // Destabilizer products may pick up an imaginary phase; their signs are
    // never read, so only the real part is kept.
    r_[h] = static_cast<std::uint8_t>(k >= 2);
    for (std::size_t w = 0; w < stride_; ++w) {
      x_[h * stride_ + w] ^= x_[i * stride_ + w];
      z_[h * stride_ + w] ^= z_[i * stride_ + w];
    }
  }

  // (sx, sz, phase) <- (sx, sz, phase) * row i, returns the new phase exponent.
  int multiply_into(Word* sx, Word* sz, int phase, std::size_t i) const {
    int k = phase + 2 * r_[i] + product_exponent(sx, sz, &x_[i * stride_], &z_[i * stride_], stride_);
    for (std::size_t w = 0; w < stride_; ++w) {
      sx[w] ^= x_[i * stride_ + w];
      sz[w] ^= z_[i * stride_ + w];
    }
    return ((k % 4) + 4) % 4;
  }

  void copy_row(std::size_t src, std::size_t dst) {
    for (std::size_t w = 0; w < stride_; ++w) {
      x_[dst * stride_ + w] = x_[src * stride_ + w];
      z_[dst * stride_ + w] = z_[src * stride_ + w];
    }
    r_[dst] = r_[src];
  }

  std::size_t n_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> x_;
  std::vector<Word> z_;
  std::vector<std::uint8_t> r_;
};

inline std::size_t gf2_rank(const gf2::BitMatrix& m) { return gf2::rank(m); }

}  // namespace mipt
