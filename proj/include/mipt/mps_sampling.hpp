#pragma once

// Perfect sampling on a right-normalized MPS.
//
// Pauli strings are drawn from Pi(sigma) = <sigma>^2 / 2^L site by site. With
// a right-normalized chain the marginal of a prefix is ||E||_F^2 / 2^k, where
// E is the transfer environment of the prefix, so each conditional needs only
// the current environment and the next tensor. Bitstrings are drawn the same
// way from p(z) = |<z|psi>|^2 using projector environments.
//
// Estimators return values in nats.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mipt/entropy.hpp"
#include "mipt/errors.hpp"
#include "mipt/mps.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"
#include "mipt/stats.hpp"

namespace mipt {

struct PauliSample {
  PauliString sigma;
  double prob = 0.0;      // Pi(sigma)
  double log_prob = 0.0;  // log Pi(sigma)
  // log |<sigma_A (x) I>| for each requested prefix cut.
  std::vector<double> log_prefix_trace;
};

struct BitstringSample {
  std::vector<std::uint8_t> bits;
  double prob = 0.0;
  double log_prob = 0.0;
  // log p(z_A) for each requested prefix cut.
  std::vector<double> log_prefix_marginal;
};

struct EstimatorResult {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
  std::size_t rejected = 0;
  bool warning = false;
};

namespace sampling {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kConditionalTolerance = 1e-6;
inline constexpr std::size_t kMinSamples = 100;

inline void require_right_normalized(const MpsState& state) {
  if (state.center() != 0 || std::abs(state.norm() - 1.0) > 1e-8) {
    throw ContractViolation("sampling requires a right-normalized MPS; call right_normalize() first");
  }
}

inline MpsState right_normalized_copy(const MpsState& state) {
  MpsState copy = state;
  copy.right_normalize();
  return copy;
}

inline void check_cut(const MpsState& state, std::size_t cut) {
  if (cut < 1 || cut >= state.num_sites()) {
    throw DomainError(fmt::format("cut {} outside [1, {}]", cut, state.num_sites() - 1));
  }
}

// sum_{s,s'} sigma_{s s'} A^{s dagger} E A^{s'} for each of I, X, Y, Z.
inline std::array<Matrix, 4> pauli_transfer(const MpsState::SiteTensor& a, const Matrix& env) {
  const Matrix ea0 = env * a[0];
  const Matrix ea1 = env * a[1];
  const Matrix m00 = a[0].adjoint() * ea0;
  const Matrix m01 = a[0].adjoint() * ea1;
  const Matrix m10 = a[1].adjoint() * ea0;
  const Matrix m11 = a[1].adjoint() * ea1;
  const Complex i(0.0, 1.0);
  return {m00 + m11, m01 + m10, -i * m01 + i * m10, m00 - m11};
}

inline Matrix pauli_transfer(const MpsState::SiteTensor& a, const Matrix& env, Pauli p) {
  const Complex i(0.0, 1.0);
  switch (p) {
    case Pauli::I:
      return a[0].adjoint() * env * a[0] + a[1].adjoint() * env * a[1];
    case Pauli::X:
      return a[0].adjoint() * env * a[1] + a[1].adjoint() * env * a[0];
    case Pauli::Y:
      return -i * (a[0].adjoint() * env * a[1]) + i * (a[1].adjoint() * env * a[0]);
    case Pauli::Z:
      return a[0].adjoint() * env * a[0] - a[1].adjoint() * env * a[1];
  }
  return env;
}

// Same contraction growing from the right: sum sigma_{ss'} A^{s'} R A^{s dagger}.
inline Matrix pauli_transfer_right(const MpsState::SiteTensor& a, const Matrix& r, Pauli p) {
  const Complex i(0.0, 1.0);
  switch (p) {
    case Pauli::I:
      return a[0] * r * a[0].adjoint() + a[1] * r * a[1].adjoint();
    case Pauli::X:
      return a[1] * r * a[0].adjoint() + a[0] * r * a[1].adjoint();
    case Pauli::Y:
      // sigma_{01} = -i pairs ket s'=1 with bra s=0.
      return -i * (a[1] * r * a[0].adjoint()) + i * (a[0] * r * a[1].adjoint());
    case Pauli::Z:
      return a[0] * r * a[0].adjoint() - a[1] * r * a[1].adjoint();
  }
  return r;
}

// Left identity environments G_l (bra x ket) for l = 0..L; G_l is the
// reduced density matrix of the first l sites in the bond basis.
inline std::vector<Matrix> left_identity_environments(const MpsState& state) {
  std::vector<Matrix> g(state.num_sites() + 1);
  g[0] = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < state.num_sites(); ++i) g[i + 1] = pauli_transfer(state.site(i), g[i], Pauli::I);
  return g;
}

}  // namespace sampling

// Draws sigma ~ Pi_rho. `prefix_cuts` requests log|<sigma_A (x) I>| for
// A = first l sites, which falls out of the sampling environments for free.
inline PauliSample sample_pauli_string(const MpsState& state, Rng& rng, std::span<const std::size_t> prefix_cuts = {}) {
  using sampling::Matrix;
  sampling::require_right_normalized(state);
  const std::size_t n = state.num_sites();
  PauliSample out;
  out.sigma = PauliString(n);
  out.log_prefix_trace.assign(prefix_cuts.size(), 0.0);
  Matrix env = Matrix::Identity(1, 1);
  double log_pi = 0.0;
  std::array<double, 4> probs{};
  for (std::size_t i = 0; i < n; ++i) {
    auto cand = sampling::pauli_transfer(state.site(i), env);
    double total = 0.0;
    for (int a = 0; a < 4; ++a) {
      probs[static_cast<std::size_t>(a)] = 0.5 * cand[static_cast<std::size_t>(a)].squaredNorm();
      total += probs[static_cast<std::size_t>(a)];
    }
    if (std::abs(total - 1.0) > sampling::kConditionalTolerance) {
      throw NumericalError(fmt::format("Pauli conditionals at site {} sum to {}", i, total));
    }
    const std::size_t pick = sample_discrete(rng, probs);
    const double pc = probs[pick] / total;
    out.sigma[i] = static_cast<Pauli>(pick);
    log_pi += std::log(pc);
    env = cand[pick] / std::sqrt(2.0 * probs[pick]);
    for (std::size_t c = 0; c < prefix_cuts.size(); ++c) {
      if (prefix_cuts[c] == i + 1) {
        // Raw environment = env * sqrt(2^l * Pi(prefix)).
        const double tr = std::abs(env.trace());
        out.log_prefix_trace[c] = std::log(tr) + 0.5 * (static_cast<double>(i + 1) * kLn2 + log_pi);
      }
    }
  }
  out.log_prob = log_pi;
  out.prob = std::exp(log_pi);
  return out;
}

inline BitstringSample sample_bitstring(const MpsState& state, Rng& rng, std::span<const std::size_t> prefix_cuts = {}) {
  using sampling::Matrix;
  sampling::require_right_normalized(state);
  const std::size_t n = state.num_sites();
  BitstringSample out;
  out.bits.assign(n, 0);
  out.log_prefix_marginal.assign(prefix_cuts.size(), 0.0);
  Matrix env = Matrix::Identity(1, 1);
  double log_p = 0.0;
  std::array<double, 2> probs{};
  std::array<Matrix, 2> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = state.site(i);
    for (int s = 0; s < 2; ++s) {
      cand[static_cast<std::size_t>(s)] = a[static_cast<std::size_t>(s)].adjoint() * env * a[static_cast<std::size_t>(s)];
      probs[static_cast<std::size_t>(s)] = std::max(0.0, cand[static_cast<std::size_t>(s)].trace().real());
    }
    const double total = probs[0] + probs[1];
    if (std::abs(total - 1.0) > sampling::kConditionalTolerance) {
      throw NumericalError(fmt::format("bit conditionals at site {} sum to {}", i, total));
    }
    const std::size_t pick = sample_discrete(rng, probs);
    out.bits[i] = static_cast<std::uint8_t>(pick);
    log_p += std::log(probs[pick] / total);
    env = cand[pick] / probs[pick];
    for (std::size_t c = 0; c < prefix_cuts.size(); ++c) {
      if (prefix_cuts[c] == i + 1) out.log_prefix_marginal[c] = log_p;
    }
  }
  out.log_prob = log_p;
  out.prob = std::exp(log_p);
  return out;
}

// <sigma_R (x) I> for a contiguous prefix or suffix region [begin, end).
// `sigma` is a full-length word; letters outside the region are ignored.
inline double restricted_pauli_trace(const MpsState& state, const PauliString& sigma, std::size_t begin,
                                     std::size_t end) {
  using sampling::Matrix;
  const std::size_t n = state.num_sites();
  if (sigma.size() != n) throw DomainError("Pauli word length differs from chain length");
  if (begin >= end || end > n) throw DomainError(fmt::format("empty or out-of-range region [{}, {})", begin, end));
  if (begin != 0 && end != n) {
    throw DomainError(fmt::format("region [{}, {}) is neither a prefix nor a suffix", begin, end));
  }
  Matrix env = Matrix::Identity(1, 1);
  Matrix norm_env = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Pauli p = (i >= begin && i < end) ? sigma[i] : Pauli::I;
    env = sampling::pauli_transfer(state.site(i), env, p);
    norm_env = sampling::pauli_transfer(state.site(i), norm_env, Pauli::I);
  }
  return (env(0, 0) / norm_env(0, 0).real()).real();
}

namespace sampling {

// log|<I_{<l} (x) sigma_{>=l}>| for every cut l in `cuts`, from one right sweep.
inline std::vector<double> log_suffix_traces(const MpsState& state, const std::vector<Matrix>& left_id,
                                             const PauliString& sigma, std::span<const std::size_t> cuts) {
  const std::size_t n = state.num_sites();
  std::vector<double> out(cuts.size(), -std::numeric_limits<double>::infinity());
  Matrix r = Matrix::Identity(1, 1);
  double log_scale = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    r = pauli_transfer_right(state.site(i), r, sigma[i]);
    const double nr = r.norm();
    if (nr == 0.0) return out;  // every remaining cut contains this suffix
    r /= nr;
    log_scale += std::log(nr);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (cuts[c] == i) {
        const double t = std::abs((left_id[i] * r).trace());
        out[c] = t > 0.0 ? std::log(t) + log_scale : -std::numeric_limits<double>::infinity();
      }
    }
  }
  return out;
}

// log p(z_{>=l}) for every cut l in `cuts`.
inline std::vector<double> log_suffix_marginals(const MpsState& state, const std::vector<Matrix>& left_id,
                                                std::span<const std::uint8_t> bits,
                                                std::span<const std::size_t> cuts) {
  const std::size_t n = state.num_sites();
  std::vector<double> out(cuts.size(), -std::numeric_limits<double>::infinity());
  Matrix r = Matrix::Identity(1, 1);
  double log_scale = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const auto& a = state.site(i)[bits[i]];
    r = a * r * a.adjoint();
    const double nr = r.norm();
    if (nr == 0.0) return out;
    r /= nr;
    log_scale += std::log(nr);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (cuts[c] == i) {
        const double t = (left_id[i] * r).trace().real();
        out[c] = t > 0.0 ? std::log(t) + log_scale : -std::numeric_limits<double>::infinity();
      }
    }
  }
  return out;
}

inline void check_samples(std::size_t n_samples) {
  if (n_samples < kMinSamples) {
    throw DomainError(fmt::format("estimators need at least {} samples, got {}", kMinSamples, n_samples));
  }
}

inline double max_of(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  return m;
}

}  // namespace sampling

// SRE from a batch of Pauli samples (order 1 or 2).
inline EstimatorResult sre_from_samples(std::span<const PauliSample> samples, std::size_t num_sites, RenyiOrder order) {
  const double offset = -static_cast<double>(num_sites) * kLn2;
  EstimatorResult r;
  r.n_samples = samples.size();
  if (order.n == 1.0) {
    std::vector<double> neg_log(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) neg_log[i] = -samples[i].log_prob;
    r.value = offset + stats::mean(neg_log);
    r.stderr_ = stats::sem(neg_log);
    return r;
  }
  if (order.n == 2.0) {
    // -log <Pi>; series scaled by exp(-shift) to avoid underflow.
    std::vector<double> logs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) logs[i] = samples[i].log_prob;
    const double shift = sampling::max_of(logs);
    std::vector<std::vector<double>> series(1, std::vector<double>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) series[0][i] = std::exp(logs[i] - shift);
    const auto jk = stats::jackknife(series, [&](std::span<const double> m) { return offset - shift - std::log(m[0]); });
    r.value = jk.value;
    r.stderr_ = jk.stderr_;
    return r;
  }
  throw DomainError(fmt::format("SRE estimator supports orders 1 and 2, got {}", order.n));
}

inline std::vector<PauliSample> sample_pauli_strings(const MpsState& state, std::size_t n_samples, Rng& rng,
                                                     std::span<const std::size_t> prefix_cuts = {}) {
  std::vector<PauliSample> out;
  out.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) out.push_back(sample_pauli_string(state, rng, prefix_cuts));
  return out;
}

inline EstimatorResult estimate_sre(const MpsState& state, RenyiOrder order, std::size_t n_samples, Rng& rng) {
  sampling::check_samples(n_samples);
  if (order.n != 1.0 && order.n != 2.0) throw DomainError("SRE estimator supports orders 1 and 2");
  const MpsState rn = sampling::right_normalized_copy(state);
  const auto samples = sample_pauli_strings(rn, n_samples, rng);
  return sre_from_samples(samples, rn.num_sites(), order);
}

// BSMI for each cut, reusing one batch of samples drawn with the prefix
// traces requested for those cuts.
//
// With a = <sigma_A>, b = <sigma_B>, c = <sigma>, averages over Pi give
//   I  = -log < a^2 b^2 / c^2 >,   W~ = -log < a^4 b^4 / c^2 >,
//   S2 = -log < c^2 >,
// and the estimate is W~ - I - S2 = M(A) + M(B) - M(AB) for the
// purity-corrected SRE M(rho) = -log(sum Tr^4(rho s) / sum Tr^2(rho s)).
inline std::vector<EstimatorResult> bsmi_from_samples(const MpsState& state, std::span<const PauliSample> samples,
                                                      std::span<const std::size_t> cuts) {
  sampling::require_right_normalized(state);
  const std::size_t n = state.num_sites();
  const auto left_id = sampling::left_identity_environments(state);
  const std::size_t ns = samples.size();
  // log a, log b, log c per sample per cut.
  std::vector<std::vector<double>> la(cuts.size(), std::vector<double>(ns));
  std::vector<std::vector<double>> lb(cuts.size(), std::vector<double>(ns));
  std::vector<double> lc(ns);
  std::vector<bool> rejected(ns, false);
  for (std::size_t k = 0; k < ns; ++k) {
    const auto& s = samples[k];
    if (s.log_prefix_trace.size() != cuts.size()) throw ContractViolation("samples lack prefix traces for the cuts");
    lc[k] = 0.5 * (static_cast<double>(n) * kLn2 + s.log_prob);
    if (!std::isfinite(lc[k])) rejected[k] = true;
    const auto suffix = sampling::log_suffix_traces(state, left_id, s.sigma, cuts);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      la[c][k] = s.log_prefix_trace[c];
      lb[c][k] = suffix[c];
    }
  }
  std::size_t n_rej = 0;
  for (bool b : rejected) n_rej += b;

  std::vector<EstimatorResult> out;
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    std::vector<double> l1;
    std::vector<double> l2;
    std::vector<double> l3;
    for (std::size_t k = 0; k < ns; ++k) {
      if (rejected[k]) continue;
      l1.push_back(2.0 * la[c][k] + 2.0 * lb[c][k] - 2.0 * lc[k]);
      l2.push_back(4.0 * la[c][k] + 4.0 * lb[c][k] - 2.0 * lc[k]);
      l3.push_back(2.0 * lc[k]);
    }
    const double s1 = sampling::max_of(l1);
    const double s2 = sampling::max_of(l2);
    const double s3 = sampling::max_of(l3);
    std::vector<std::vector<double>> series(3, std::vector<double>(l1.size()));
    for (std::size_t k = 0; k < l1.size(); ++k) {
      series[0][k] = std::isfinite(s1) ? std::exp(l1[k] - s1) : 0.0;
      series[1][k] = std::isfinite(s2) ? std::exp(l2[k] - s2) : 0.0;
      series[2][k] = std::exp(l3[k] - s3);
    }
    auto combine = [&](std::span<const double> m) {
      const double info = -(s1 + std::log(m[0]));
      const double w = -(s2 + std::log(m[1]));
      const double s2ab = -(s3 + std::log(m[2]));
      return w - info - s2ab;
    };
    const auto jk = stats::jackknife(series, combine);
    EstimatorResult r;
    r.value = jk.value;
    r.stderr_ = jk.stderr_;
    r.n_samples = ns - n_rej;
    r.rejected = n_rej;
    r.warning = static_cast<double>(n_rej) > 0.01 * static_cast<double>(ns);
    out.push_back(r);
  }
  return out;
}

inline std::vector<EstimatorResult> estimate_bsmi(const MpsState& state, std::span<const std::size_t> cuts,
                                                  std::size_t n_samples, Rng& rng) {
  sampling::check_samples(n_samples);
  for (std::size_t c : cuts) sampling::check_cut(state, c);
  const MpsState rn = sampling::right_normalized_copy(state);
  const auto samples = sample_pauli_strings(rn, n_samples, rng, cuts);
  return bsmi_from_samples(rn, samples, cuts);
}

inline EstimatorResult estimate_bsmi(const MpsState& state, std::size_t cut, std::size_t n_samples, Rng& rng) {
  const std::array<std::size_t, 1> cuts{cut};
  return estimate_bsmi(state, cuts, n_samples, rng).front();
}

inline std::vector<BitstringSample> sample_bitstrings(const MpsState& state, std::size_t n_samples, Rng& rng,
                                                      std::span<const std::size_t> prefix_cuts = {}) {
  std::vector<BitstringSample> out;
  out.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) out.push_back(sample_bitstring(state, rng, prefix_cuts));
  return out;
}

// Shannon PE: sample mean of -log p(z).
inline EstimatorResult pe_from_samples(std::span<const BitstringSample> samples) {
  std::vector<double> neg_log(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) neg_log[i] = -samples[i].log_prob;
  EstimatorResult r;
  r.value = stats::mean(neg_log);
  r.stderr_ = stats::sem(neg_log);
  r.n_samples = samples.size();
  return r;
}

inline EstimatorResult estimate_pe(const MpsState& state, std::size_t n_samples, Rng& rng) {
  sampling::check_samples(n_samples);
  const MpsState rn = sampling::right_normalized_copy(state);
  const auto samples = sample_bitstrings(rn, n_samples, rng);
  return pe_from_samples(samples);
}

// BPMI: mean over z ~ p of log[p(z) / (p(z_A) p(z_B))] with both marginals
// contracted exactly.
inline std::vector<EstimatorResult> bpmi_from_samples(const MpsState& state, std::span<const BitstringSample> samples,
                                                      std::span<const std::size_t> cuts) {
  sampling::require_right_normalized(state);
  const auto left_id = sampling::left_identity_environments(state);
  std::vector<std::vector<double>> terms(cuts.size(), std::vector<double>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.log_prefix_marginal.size() != cuts.size()) throw ContractViolation("samples lack prefix marginals for the cuts");
    const auto suffix = sampling::log_suffix_marginals(state, left_id, s.bits, cuts);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (!std::isfinite(suffix[c]) || !std::isfinite(s.log_prefix_marginal[c])) {
        throw NumericalError("sampled bitstring has a vanishing marginal");
      }
      terms[c][k] = s.log_prob - s.log_prefix_marginal[c] - suffix[c];
    }
  }
  std::vector<EstimatorResult> out;
  for (const auto& t : terms) {
    EstimatorResult r;
    r.value = stats::mean(t);
    r.stderr_ = stats::sem(t);
    r.n_samples = t.size();
    out.push_back(r);
  }
  return out;
}

inline std::vector<EstimatorResult> estimate_bpmi(const MpsState& state, std::span<const std::size_t> cuts,
                                                  std::size_t n_samples, Rng& rng) {
  sampling::check_samples(n_samples);
  for (std::size_t c : cuts) sampling::check_cut(state, c);
  const MpsState rn = sampling::right_normalized_copy(state);
  const auto samples = sample_bitstrings(rn, n_samples, rng, cuts);
  return bpmi_from_samples(rn, samples, cuts);
}

inline EstimatorResult estimate_bpmi(const MpsState& state, std::size_t cut, std::size_t n_samples, Rng& rng) {
  const std::array<std::size_t, 1> cuts{cut};
  return estimate_bpmi(state, cuts, n_samples, rng).front();
}

}  // namespace mipt
