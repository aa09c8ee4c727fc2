#pragma once

// Open-boundary matrix product state with a bond-dimension cap.
//
// Gauge: a single orthogonality center. Sites left of the center are
// left-normalized, sites right of it right-normalized, and the state norm
// lives in the center tensor. Methods that need a particular gauge move the
// center; this changes tensors but never the represented state.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "mipt/dense_state.hpp"
#include "mipt/entropy.hpp"
#include "mipt/errors.hpp"
#include "mipt/gates.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"

namespace mipt {

enum class LocalState { Zero, One, Plus, Minus };

// Pauli operator on a few contiguous sites starting at `left_site`.
struct LocalPauli {
  std::size_t left_site = 0;
  std::vector<Pauli> letters;

  std::size_t width() const { return letters.size(); }
  friend bool operator==(const LocalPauli&, const LocalPauli&) = default;
};

struct WeakMeasurementSpec {
  LocalPauli pauli;
  double beta = 0.0;
};

struct MeasurementResult {
  int outcome = +1;
  double probability = 1.0;
};

struct TruncationPolicy {
  std::size_t chi_max = 64;
  // Relative singular-value cutoff (s_i / s_max); zero keeps the full
  // numerical rank up to chi_max.
  double relative_cutoff = 0.0;
};

class MpsState {
 public:
  using Complex = std::complex<double>;
  using Matrix = Eigen::MatrixXcd;
  using SiteTensor = std::array<Matrix, 2>;

  static constexpr double kUnitaryTolerance = 1e-10;

  MpsState() = default;

  MpsState(std::size_t num_sites, LocalState local, TruncationPolicy policy = {}) : policy_(policy) {
    if (num_sites < 2) throw DomainError(fmt::format("an MPS needs at least 2 sites, got {}", num_sites));
    if (policy_.chi_max < 1) throw DomainError("chi_max must be positive");
    Complex a0 = 1.0;
    Complex a1 = 0.0;
    const double r = 1.0 / std::sqrt(2.0);
    switch (local) {
      case LocalState::Zero:
        break;
      case LocalState::One:
        a0 = 0.0;
        a1 = 1.0;
        break;
      case LocalState::Plus:
        a0 = r;
        a1 = r;
        break;
      case LocalState::Minus:
        a0 = r;
        a1 = -r;
        break;
    }
    sites_.resize(num_sites);
    for (auto& t : sites_) {
      t[0] = Matrix::Constant(1, 1, a0);
      t[1] = Matrix::Constant(1, 1, a1);
    }
    center_ = 0;
  }

  // Exact MPS of a dense state (successive SVDs, truncated by policy).
  static MpsState from_dense(const DenseState& dense, TruncationPolicy policy = {}) {
    const std::size_t n = dense.num_qubits();
    MpsState mps(n, LocalState::Zero, policy);
    // Remainder matrix: rows = left bond, cols = remaining physical index.
    Matrix rest = Matrix::Zero(1, dense.amplitudes().size());
    for (Eigen::Index k = 0; k < dense.amplitudes().size(); ++k) rest(0, k) = dense.amplitudes()(k);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Eigen::Index dl = rest.rows();
      const Eigen::Index tail = rest.cols() / 2;
      // Reshape to (s, a) x tail; s is the most significant remaining bit.
      Matrix m(2 * dl, tail);
      for (Eigen::Index a = 0; a < dl; ++a) {
        for (int s = 0; s < 2; ++s) m.row(s * dl + a) = rest.block(a, s * tail, 1, tail);
      }
      Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto sv = svd.singularValues();
      const std::size_t keep = mps.kept_rank(sv);
      const Matrix u = svd.matrixU().leftCols(static_cast<Eigen::Index>(keep));
      mps.sites_[i][0] = u.topRows(dl);
      mps.sites_[i][1] = u.bottomRows(dl);
      rest = sv.head(static_cast<Eigen::Index>(keep)).asDiagonal() *
             svd.matrixV().leftCols(static_cast<Eigen::Index>(keep)).adjoint();
    }
    mps.sites_[n - 1][0] = rest.col(0);
    mps.sites_[n - 1][1] = rest.col(1);
    mps.center_ = n - 1;
    mps.normalize_center();
    return mps;
  }

  std::size_t num_sites() const { return sites_.size(); }
  std::size_t center() const { return center_; }
  const TruncationPolicy& policy() const { return policy_; }
  std::size_t chi_max() const { return policy_.chi_max; }
  const SiteTensor& site(std::size_t i) const { return sites_[i]; }
  const std::vector<double>& truncation_log() const { return truncation_log_; }
  double total_discarded_weight() const {
    return std::accumulate(truncation_log_.begin(), truncation_log_.end(), 0.0);
  }

  std::size_t bond_dimension(std::size_t bond) const { return static_cast<std::size_t>(sites_[bond][0].cols()); }
  std::size_t max_bond_dimension() const {
    std::size_t m = 1;
    for (std::size_t i = 0; i + 1 < sites_.size(); ++i) m = std::max(m, bond_dimension(i));
    return m;
  }

  double norm() const {
    const auto& c = sites_[center_];
    return std::sqrt(c[0].squaredNorm() + c[1].squaredNorm());
  }

  // ---------------------------------------------------------------------
  // Gauge.

  void move_center(std::size_t target) {
    if (target >= sites_.size()) throw RangeError(fmt::format("site {} out of range", target));
    while (center_ < target) shift_center_right();
    while (center_ > target) shift_center_left();
  }

  // Center at site 0 with unit norm: every site then satisfies
  // sum_s A^s A^s^dagger = 1.
  void right_normalize() {
    move_center(0);
    normalize_center();
  }

  bool is_right_normalized(double tol = 1e-8) const {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto& t = sites_[i];
      const Matrix g = t[0] * t[0].adjoint() + t[1] * t[1].adjoint();
      if ((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

  // ---------------------------------------------------------------------
  // Evolution.

  // Unitary on `width` contiguous sites starting at left_site, width in {1,2,3}.
  void apply_unitary(const gates::Matrix& gate, std::size_t left_site) {
    if (!gates::is_unitary(gate, kUnitaryTolerance)) throw ContractViolation("gate is not unitary");
    apply_operator(gate, left_site);
  }

  // Any operator on contiguous sites followed by renormalization.
  void apply_operator(const gates::Matrix& op, std::size_t left_site) {
    const std::size_t width = local_width(op);
    if (width < 1 || width > 3) throw DomainError(fmt::format("operators on {} sites are not supported", width));
    if (left_site + width > sites_.size()) {
      throw RangeError(fmt::format("{}-site operator at {} overruns chain of {}", width, left_site, sites_.size()));
    }
    move_center(left_site);
    std::vector<Matrix> block = contract_block(left_site, width);
    block = apply_local(op, block);
    split_block(std::move(block), left_site, width);
    normalize_center();
  }

  // Pauli rotation exp(i theta P) with identity letters stripped from the ends.
  void apply_pauli_rotation(const LocalPauli& p, double theta) {
    const auto [begin, end] = support(p);
    if (begin == end) return;
    std::span<const Pauli> core(p.letters.data() + begin, end - begin);
    apply_operator(gates::pauli_rotation(core, theta), p.left_site + begin);
  }

  double local_expectation(const LocalPauli& p) {
    const auto [begin, end] = support(p);
    if (begin == end) return 1.0;
    std::span<const Pauli> core(p.letters.data() + begin, end - begin);
    return local_expectation(gates::pauli_word_matrix(core), p.left_site + begin).real();
  }

  Complex local_expectation(const gates::Matrix& op, std::size_t left_site) {
    const std::size_t width = local_width(op);
    if (left_site + width > sites_.size()) throw RangeError("operator overruns chain");
    move_center(left_site);
    const std::vector<Matrix> block = contract_block(left_site, width);
    const std::vector<Matrix> applied = apply_local(op, block);
    Complex num = 0.0;
    double den = 0.0;
    for (std::size_t l = 0; l < block.size(); ++l) {
      num += block[l].cwiseProduct(applied[l].conjugate()).sum();
      den += block[l].squaredNorm();
    }
    return std::conj(num) / den;
  }

  // Weak measurement with Kraus operators exp(+-beta P)/sqrt(2 cosh 2beta).
  // `u` is the uniform draw deciding the outcome.
  MeasurementResult weak_measure(const WeakMeasurementSpec& spec, double u) {
    if (!(spec.beta >= 0.0)) throw DomainError(fmt::format("measurement strength must be >= 0, got {}", spec.beta));
    check_local(spec.pauli);
    const double expect = local_expectation(spec.pauli);
    const double q_plus = 0.5 * (1.0 + std::tanh(2.0 * spec.beta) * expect);
    MeasurementResult r;
    r.outcome = u < q_plus ? +1 : -1;
    r.probability = r.outcome > 0 ? q_plus : 1.0 - q_plus;
    if (spec.beta == 0.0) return r;
    const auto [begin, end] = support(spec.pauli);
    if (begin == end) return r;
    std::span<const Pauli> core(spec.pauli.letters.data() + begin, end - begin);
    apply_operator(gates::weak_kraus(core, spec.beta, r.outcome), spec.pauli.left_site + begin);
    return r;
  }

  MeasurementResult weak_measure(const WeakMeasurementSpec& spec, Rng& rng) { return weak_measure(spec, uniform01(rng)); }

  MeasurementResult projective_measure(const LocalPauli& p, double u) {
    check_local(p);
    if (p.width() > 2) throw DomainError("projective measurements act on at most 2 sites");
    const double expect = local_expectation(p);
    const double q_plus = std::clamp(0.5 * (1.0 + expect), 0.0, 1.0);
    MeasurementResult r;
    r.outcome = u < q_plus ? +1 : -1;
    r.probability = r.outcome > 0 ? q_plus : 1.0 - q_plus;
    if (r.probability <= 1e-14) throw NumericalError("projective measurement selected a zero-probability branch");
    const auto [begin, end] = support(p);
    if (begin == end) return r;
    std::span<const Pauli> core(p.letters.data() + begin, end - begin);
    apply_operator(gates::pauli_projector(core, r.outcome), p.left_site + begin);
    return r;
  }

  MeasurementResult projective_measure(const LocalPauli& p, Rng& rng) { return projective_measure(p, uniform01(rng)); }

  // ---------------------------------------------------------------------
  // Observables.

  // Squared Schmidt coefficients across the bond after `cut` sites.
  std::vector<double> schmidt_spectrum(std::size_t cut) {
    if (cut < 1 || cut >= sites_.size()) {
      throw DomainError(fmt::format("cut {} outside [1, {}]", cut, sites_.size() - 1));
    }
    move_center(cut - 1);
    const auto& t = sites_[cut - 1];
    Matrix m(2 * t[0].rows(), t[0].cols());
    m << t[0], t[1];
    Eigen::BDCSVD<Matrix> svd(m);
    const auto sv = svd.singularValues();
    std::vector<double> out;
    double total = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 0.0) {
        out.push_back(sv(i) * sv(i));
        total += out.back();
      }
    }
    for (double& v : out) v /= total;
    return out;
  }

  EntropyValue entanglement_entropy(std::size_t cut, RenyiOrder order = 1.0) {
    return renyi_entropy(ProbDist(schmidt_spectrum(cut)), order);
  }

  // <psi|P|psi> for a full-length word, by transfer-matrix contraction.
  double pauli_expectation(const PauliString& word) const {
    if (word.size() != sites_.size()) throw DomainError("Pauli word length differs from chain length");
    Matrix env = Matrix::Identity(1, 1);
    Matrix norm_env = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto& t = sites_[i];
      const gates::Matrix p = pauli_matrix(word[i]);
      Matrix next = Matrix::Zero(t[0].cols(), t[0].cols());
      for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
          if (p(s, sp) == 0.0) continue;
          next += p(s, sp) * (t[s].adjoint() * env * t[sp]);
        }
      }
      env = std::move(next);
      norm_env = t[0].adjoint() * norm_env * t[0] + t[1].adjoint() * norm_env * t[1];
    }
    static constexpr std::array<Complex, 4> kI = {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    const Complex v = kI[static_cast<std::size_t>(word.phase())] * env(0, 0) / norm_env(0, 0).real();
    return v.real();
  }

  DenseState to_dense() const {
    const std::size_t n = sites_.size();
    DenseState::check_capacity(n, DenseState::kMaxQubits);
    // rows: basis prefix; cols: right bond.
    Matrix acc = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = sites_[i];
      Matrix next(acc.rows() * 2, t[0].cols());
      for (Eigen::Index r = 0; r < acc.rows(); ++r) {
        next.row(2 * r) = acc.row(r) * t[0];
        next.row(2 * r + 1) = acc.row(r) * t[1];
      }
      acc = std::move(next);
    }
    Eigen::VectorXcd v = acc.col(0);
    v /= v.norm();
    return DenseState(n, std::move(v));
  }

 private:
  static std::size_t local_width(const gates::Matrix& op) {
    const auto dim = static_cast<std::size_t>(op.rows());
    if (op.rows() != op.cols() || dim < 2 || (dim & (dim - 1)) != 0) {
      throw DomainError(fmt::format("{}x{} is not a qubit operator", op.rows(), op.cols()));
    }
    return static_cast<std::size_t>(std::countr_zero(dim));
  }

  static std::pair<std::size_t, std::size_t> support(const LocalPauli& p) {
    std::size_t begin = 0;
    std::size_t end = p.letters.size();
    while (begin < end && p.letters[begin] == Pauli::I) ++begin;
    while (end > begin && p.letters[end - 1] == Pauli::I) --end;
    return {begin, end};
  }

  void check_local(const LocalPauli& p) const {
    if (p.letters.empty()) throw DomainError("empty Pauli operator");
    if (p.left_site + p.width() > sites_.size()) {
      throw RangeError(fmt::format("Pauli at {} of width {} overruns chain of {}", p.left_site, p.width(), sites_.size()));
    }
  }

  std::size_t kept_rank(const Eigen::VectorXd& sv) const {
    if (sv.size() == 0 || sv(0) <= 0.0) return 1;
    // Numerical rank: values at round-off level relative to the largest one.
    const double noise = std::numeric_limits<double>::epsilon() * static_cast<double>(sv.size()) * sv(0);
    const double floor = std::max(noise, policy_.relative_cutoff * sv(0));
    std::size_t rank = 0;
    while (rank < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(rank)) > floor) ++rank;
    return std::clamp<std::size_t>(rank, 1, policy_.chi_max);
  }

  void normalize_center() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("state norm vanished");
    sites_[center_][0] /= n;
    sites_[center_][1] /= n;
  }

  void shift_center_right() {
    auto& t = sites_[center_];
    const Eigen::Index dl = t[0].rows();
    Matrix m(2 * dl, t[0].cols());
    m << t[0], t[1];
    Eigen::HouseholderQR<Matrix> qr(m);
    const Eigen::Index r = std::min(m.rows(), m.cols());
    const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), r);
    const Matrix rr = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    t[0] = q.topRows(dl);
    t[1] = q.bottomRows(dl);
    auto& nx = sites_[center_ + 1];
    nx[0] = rr * nx[0];
    nx[1] = rr * nx[1];
    ++center_;
  }

  void shift_center_left() {
    auto& t = sites_[center_];
    const Eigen::Index dr = t[0].cols();
    Matrix m(t[0].rows(), 2 * dr);
    m << t[0], t[1];
    const Matrix md = m.adjoint();
    Eigen::HouseholderQR<Matrix> qr(md);
    const Eigen::Index r = std::min(md.rows(), md.cols());
    const Matrix q = qr.householderQ() * Matrix::Identity(md.rows(), r);
    const Matrix rr = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
    const Matrix qd = q.adjoint();  // r x 2dr, orthonormal rows
    t[0] = qd.leftCols(dr);
    t[1] = qd.rightCols(dr);
    auto& pv = sites_[center_ - 1];
    const Matrix l = rr.adjoint();
    pv[0] = pv[0] * l;
    pv[1] = pv[1] * l;
    --center_;
  }

  // T[l] = A_i^{l_0} A_{i+1}^{l_1} ... with the first site as the high bit.
  std::vector<Matrix> contract_block(std::size_t left, std::size_t width) const {
    std::vector<Matrix> block = {sites_[left][0], sites_[left][1]};
    for (std::size_t j = 1; j < width; ++j) {
      const auto& t = sites_[left + j];
      std::vector<Matrix> next(block.size() * 2);
      for (std::size_t l = 0; l < block.size(); ++l) {
        next[2 * l] = block[l] * t[0];
        next[2 * l + 1] = block[l] * t[1];
      }
      block = std::move(next);
    }
    return block;
  }

  static std::vector<Matrix> apply_local(const gates::Matrix& op, const std::vector<Matrix>& block) {
    std::vector<Matrix> out(block.size());
    for (std::size_t lo = 0; lo < block.size(); ++lo) {
      out[lo] = Matrix::Zero(block[0].rows(), block[0].cols());
      for (std::size_t li = 0; li < block.size(); ++li) {
        const Complex g = op(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(li));
        if (g != 0.0) out[lo] += g * block[li];
      }
    }
    return out;
  }

  // Splits a width-site block back into sites; the center ends on the last one.
  void split_block(std::vector<Matrix> block, std::size_t left, std::size_t width) {
    double discarded = 0.0;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      const std::size_t rest_dim = block.size() / 2;
      const Eigen::Index dl = block[0].rows();
      const Eigen::Index dr = block[0].cols();
      // rows (s, a); cols (r, b).
      Matrix m(2 * dl, static_cast<Eigen::Index>(rest_dim) * dr);
      for (int s = 0; s < 2; ++s) {
        for (std::size_t r = 0; r < rest_dim; ++r) {
          m.block(s * dl, static_cast<Eigen::Index>(r) * dr, dl, dr) = block[static_cast<std::size_t>(s) * rest_dim + r];
        }
      }
      Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd sv = svd.singularValues();
      const std::size_t keep = kept_rank(sv);
      const auto k = static_cast<Eigen::Index>(keep);
      const double total = sv.squaredNorm();
      if (total > 0.0) discarded += sv.tail(sv.size() - k).squaredNorm() / total;
      const Matrix u = svd.matrixU().leftCols(k);
      sites_[left + j][0] = u.topRows(dl);
      sites_[left + j][1] = u.bottomRows(dl);
      const Matrix rest = sv.head(k).asDiagonal() * svd.matrixV().leftCols(k).adjoint();
      std::vector<Matrix> next(rest_dim);
      for (std::size_t r = 0; r < rest_dim; ++r) next[r] = rest.middleCols(static_cast<Eigen::Index>(r) * dr, dr);
      block = std::move(next);
    }
    sites_[left + width - 1][0] = std::move(block[0]);
    sites_[left + width - 1][1] = std::move(block[1]);
    center_ = left + width - 1;
    if (width > 1) truncation_log_.push_back(discarded);
  }

  std::vector<SiteTensor> sites_;
  std::size_t center_ = 0;
  TruncationPolicy policy_;
  std::vector<double> truncation_log_;
};

inline double fidelity(const MpsState& a, const DenseState& b) { return a.to_dense().overlap_fidelity(b); }

}  // namespace mipt
