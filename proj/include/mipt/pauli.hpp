#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mipt/errors.hpp"

namespace mipt {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline constexpr std::array<Pauli, 4> kPaulis = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};

constexpr bool x_bit(Pauli p) { return p == Pauli::X || p == Pauli::Y; }
constexpr bool z_bit(Pauli p) { return p == Pauli::Z || p == Pauli::Y; }
constexpr Pauli from_bits(bool x, bool z) {
  return x ? (z ? Pauli::Y : Pauli::X) : (z ? Pauli::Z : Pauli::I);
}

constexpr char to_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I':
    case '_':
      return Pauli::I;
    case 'X':
      return Pauli::X;
    case 'Y':
      return Pauli::Y;
    case 'Z':
      return Pauli::Z;
    default:
      throw DomainError(fmt::format("'{}' is not a Pauli letter", c));
  }
}

inline Eigen::Matrix2cd pauli_matrix(Pauli p) {
  using C = std::complex<double>;
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I:
      m << 1, 0, 0, 1;
      break;
    case Pauli::X:
      m << 0, 1, 1, 0;
      break;
    case Pauli::Y:
      m << 0, C(0, -1), C(0, 1), 0;
      break;
    case Pauli::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

// Exponent k in a*b = i^k * c for single-qubit Paulis (c = a xor b in bits).
constexpr int product_phase(Pauli a, Pauli b) {
  if (a == Pauli::I || b == Pauli::I || a == b) return 0;
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  // Cyclic X -> Y -> Z gives +i, anti-cyclic gives -i.
  return ((ib - ia + 3) % 3 == 1) ? 1 : 3;
}

// Word over {I,X,Y,Z} with an overall phase i^phase.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n) : letters_(n, Pauli::I) {}
  PauliString(std::vector<Pauli> letters, int phase = 0) : letters_(std::move(letters)), phase_(phase & 3) {}

  static PauliString parse(std::string_view text) {
    int phase = 0;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
      if (text.front() == '-') phase = 2;
      text.remove_prefix(1);
    }
    std::vector<Pauli> letters;
    letters.reserve(text.size());
    for (char c : text) letters.push_back(pauli_from_char(c));
    return PauliString(std::move(letters), phase);
  }

  // Single- or two-letter operator embedded in an n-site identity.
  static PauliString local(std::size_t n, std::initializer_list<std::pair<std::size_t, Pauli>> entries) {
    PauliString s(n);
    for (auto [site, p] : entries) {
      if (site >= n) throw RangeError(fmt::format("site {} outside chain of length {}", site, n));
      s.letters_[site] = p;
    }
    return s;
  }

  std::size_t size() const { return letters_.size(); }
  Pauli operator[](std::size_t i) const { return letters_[i]; }
  Pauli& operator[](std::size_t i) { return letters_[i]; }
  const std::vector<Pauli>& letters() const { return letters_; }

  int phase() const { return phase_; }
  void set_phase(int k) { phase_ = k & 3; }
  bool is_hermitian() const { return phase_ % 2 == 0; }
  int sign() const { return phase_ == 2 ? -1 : 1; }

  std::size_t weight() const {
    std::size_t w = 0;
    for (Pauli p : letters_) w += p != Pauli::I;
    return w;
  }

  bool commutes_with(const PauliString& other) const {
    check_size(other);
    int anti = 0;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      const Pauli a = letters_[i];
      const Pauli b = other.letters_[i];
      anti ^= (a != Pauli::I && b != Pauli::I && a != b);
    }
    return anti == 0;
  }

  PauliString operator*(const PauliString& other) const {
    check_size(other);
    PauliString out(letters_.size());
    int k = phase_ + other.phase_;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      const Pauli a = letters_[i];
      const Pauli b = other.letters_[i];
      k += product_phase(a, b);
      out.letters_[i] = from_bits(x_bit(a) != x_bit(b), z_bit(a) != z_bit(b));
    }
    out.phase_ = k & 3;
    return out;
  }

  PauliString substring(std::size_t begin, std::size_t end) const {
    return PauliString(std::vector<Pauli>(letters_.begin() + begin, letters_.begin() + end));
  }

  std::string str() const {
    static constexpr std::array<const char*, 4> kPrefix = {"+", "+i", "-", "-i"};
    std::string s = kPrefix[phase_];
    for (Pauli p : letters_) s.push_back(to_char(p));
    return s;
  }

  std::string letters_str() const {
    std::string s;
    for (Pauli p : letters_) s.push_back(to_char(p));
    return s;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  void check_size(const PauliString& other) const {
    if (other.size() != size()) {
      throw DomainError(fmt::format("Pauli strings of length {} and {} cannot be combined", size(), other.size()));
    }
  }

  std::vector<Pauli> letters_;
  int phase_ = 0;
};

}  // namespace mipt
