#pragma once

// Dense matrices for the gate ensembles and measurement operators.
// Convention: for a k-site operator on sites (s_0, ..., s_{k-1}) the basis
// index is sum_j b_j 2^{k-1-j}, i.e. the first site is the most significant bit.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "mipt/pauli.hpp"

namespace mipt::gates {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

inline Matrix pauli_word_matrix(std::span<const Pauli> word) {
  Matrix m = Matrix::Identity(1, 1);
  for (Pauli p : word) m = kron(m, pauli_matrix(p));
  return m;
}

inline Matrix pauli_word_matrix(std::initializer_list<Pauli> word) {
  std::vector<Pauli> w(word);
  return pauli_word_matrix(std::span<const Pauli>(w));
}

// exp(i theta P) = cos(theta) I + i sin(theta) P for a Pauli word P.
inline Matrix pauli_rotation(std::span<const Pauli> word, double theta) {
  const Matrix p = pauli_word_matrix(word);
  return std::cos(theta) * Matrix::Identity(p.rows(), p.cols()) + Complex(0.0, std::sin(theta)) * p;
}

// exp(+-beta P) = cosh(beta) I +- sinh(beta) P, not normalized.
inline Matrix weak_kraus(std::span<const Pauli> word, double beta, int outcome) {
  const Matrix p = pauli_word_matrix(word);
  return std::cosh(beta) * Matrix::Identity(p.rows(), p.cols()) +
         static_cast<double>(outcome) * std::sinh(beta) * p;
}

// (I +- P)/2.
inline Matrix pauli_projector(std::span<const Pauli> word, int outcome) {
  const Matrix p = pauli_word_matrix(word);
  return 0.5 * (Matrix::Identity(p.rows(), p.cols()) + static_cast<double>(outcome) * p);
}

inline Matrix hadamard() {
  Matrix h(2, 2);
  const double r = 1.0 / std::numbers::sqrt2;
  h << r, r, r, -r;
  return h;
}

inline Matrix phase_s() {
  Matrix s(2, 2);
  s << 1, 0, 0, Complex(0, 1);
  return s;
}

// Control on the first site.
inline Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

// Control on the second site.
inline Matrix cnot_reversed() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(3, 1) = m(2, 2) = m(1, 3) = 1.0;
  return m;
}

inline Matrix cz() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return m;
}

inline bool is_unitary(const Matrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace mipt::gates
