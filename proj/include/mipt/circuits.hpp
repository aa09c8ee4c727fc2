#pragma once

// Circuit ensembles as backend-agnostic layer plans, the Z_i <-> X_i X_{i+1}
// duality map, and plan execution on the MPS, dense and tableau backends.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "mipt/dense_state.hpp"
#include "mipt/errors.hpp"
#include "mipt/gates.hpp"
#include "mipt/mps.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"
#include "mipt/tableau.hpp"

namespace mipt {

enum class Model { SelfDualHybrid, CliffordDual, RandomClifford, QuantumAutomaton };

inline std::string model_name(Model m) {
  switch (m) {
    case Model::SelfDualHybrid:
      return "selfdual";
    case Model::CliffordDual:
      return "clifford-dual";
    case Model::RandomClifford:
      return "random-clifford";
    case Model::QuantumAutomaton:
      return "qa";
  }
  return "?";
}

inline Model parse_model(std::string_view s) {
  if (s == "selfdual" || s == "SelfDualHybrid") return Model::SelfDualHybrid;
  if (s == "clifford-dual" || s == "CliffordDual") return Model::CliffordDual;
  if (s == "random-clifford" || s == "RandomClifford") return Model::RandomClifford;
  if (s == "qa" || s == "QuantumAutomaton") return Model::QuantumAutomaton;
  throw ConfigError(fmt::format("unknown model '{}'", s));
}

enum class QaOrder { CxThenCz, CzThenCx };

struct CircuitSpec {
  Model model = Model::SelfDualHybrid;
  std::size_t L = 6;
  double p = 0.5;
  std::optional<double> beta;   // SelfDualHybrid
  std::optional<double> gamma;  // CliffordDual
  std::string boundary = "open";
  std::uint64_t seed = 0;
  // Self-dual rounds: independent uniform positions (true) or distinct ones.
  bool positions_with_replacement = true;
  QaOrder qa_order = QaOrder::CxThenCz;

  bool uses_mps() const { return model == Model::SelfDualHybrid; }

  // Initial product state of each ensemble.
  PauliBasis initial_basis() const { return model == Model::QuantumAutomaton ? PauliBasis::X : PauliBasis::Z; }

  // Basis of the participation entropy.
  PauliBasis pe_basis() const { return model == Model::QuantumAutomaton ? PauliBasis::X : PauliBasis::Z; }

  void validate() const {
    if (boundary != "open") throw ConfigError(fmt::format("boundary '{}' unsupported; only open", boundary));
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("p = {} outside [0, 1]", p));
    switch (model) {
      case Model::SelfDualHybrid:
        if (L < 6 || L % 6 != 0) throw ConfigError(fmt::format("selfdual model needs L divisible by 6, got {}", L));
        break;
      case Model::CliffordDual:
        // floor(L/3) gates per round.
        if (L < 4 || L % 2 != 0) throw ConfigError(fmt::format("clifford-dual model needs even L >= 4, got {}", L));
        break;
      case Model::RandomClifford:
      case Model::QuantumAutomaton:
        if (L < 2 || L % 2 != 0) throw ConfigError(fmt::format("brickwork models need even L, got {}", L));
        break;
    }
    if (model == Model::SelfDualHybrid) {
      if (!beta) throw ConfigError("selfdual model needs beta");
      if (!(*beta >= 0.0)) throw ConfigError(fmt::format("beta = {} must be >= 0", *beta));
    } else if (beta) {
      throw ConfigError(fmt::format("beta is not a parameter of model {}", model_name(model)));
    }
    if (model == Model::CliffordDual) {
      if (!gamma) throw ConfigError("clifford-dual model needs gamma");
      if (!(*gamma >= 0.0 && *gamma <= 1.0)) throw ConfigError(fmt::format("gamma = {} outside [0, 1]", *gamma));
    } else if (gamma) {
      throw ConfigError(fmt::format("gamma is not a parameter of model {}", model_name(model)));
    }
  }
};

inline void to_json(nlohmann::json& j, const CircuitSpec& s) {
  j = nlohmann::json{{"model", model_name(s.model)}, {"L", s.L},         {"p", s.p},
                     {"boundary", s.boundary},       {"seed", s.seed},
                     {"positions_with_replacement", s.positions_with_replacement},
                     {"qa_order", s.qa_order == QaOrder::CxThenCz ? "cx_cz" : "cz_cx"}};
  if (s.beta) j["beta"] = *s.beta;
  if (s.gamma) j["gamma"] = *s.gamma;
}

inline void from_json(const nlohmann::json& j, CircuitSpec& s) {
  try {
    s = CircuitSpec{};
    s.model = parse_model(j.at("model").get<std::string>());
    s.L = j.at("L").get<std::size_t>();
    s.p = j.at("p").get<double>();
    if (j.contains("beta") && !j["beta"].is_null()) s.beta = j["beta"].get<double>();
    if (j.contains("gamma") && !j["gamma"].is_null()) s.gamma = j["gamma"].get<double>();
    s.boundary = j.value("boundary", std::string("open"));
    s.seed = j.value("seed", std::uint64_t{0});
    s.positions_with_replacement = j.value("positions_with_replacement", true);
    const std::string order = j.value("qa_order", std::string("cx_cz"));
    if (order == "cx_cz") {
      s.qa_order = QaOrder::CxThenCz;
    } else if (order == "cz_cx") {
      s.qa_order = QaOrder::CzThenCx;
    } else {
      throw ConfigError(fmt::format("qa_order must be cx_cz or cz_cx, got '{}'", order));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("bad circuit spec: {}", e.what()));
  }
}

// ---------------------------------------------------------------------------
// Layer plans.

struct Instruction {
  enum class Kind { Rotation, WeakMeasure, ProjectiveMeasure, Clifford2, CX, CZ, H };

  Kind kind = Kind::Rotation;
  // Rotation / measurements: Pauli on contiguous sites from left_site.
  LocalPauli pauli;
  int sign = +1;      // rotation exp(i sign pi/4 P)
  double beta = 0.0;  // weak measurement strength
  // Two-qubit gates: sites a, b (CX: a = control).
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t clifford_index = 0;

  bool is_measurement() const { return kind == Kind::WeakMeasure || kind == Kind::ProjectiveMeasure; }

  std::string str() const {
    std::string word;
    for (Pauli p : pauli.letters) word.push_back(to_char(p));
    switch (kind) {
      case Kind::Rotation:
        return fmt::format("R{}{}@{}", sign > 0 ? '+' : '-', word, pauli.left_site);
      case Kind::WeakMeasure:
        return fmt::format("W{}@{}", word, pauli.left_site);
      case Kind::ProjectiveMeasure:
        return fmt::format("M{}@{}", word, pauli.left_site);
      case Kind::Clifford2:
        return fmt::format("C2[{}]@{},{}", clifford_index, a, b);
      case Kind::CX:
        return fmt::format("CX@{},{}", a, b);
      case Kind::CZ:
        return fmt::format("CZ@{},{}", a, b);
      case Kind::H:
        return fmt::format("H@{}", a);
    }
    return "?";
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct LayerPlan {
  std::vector<Instruction> instructions;

  std::size_t count(Instruction::Kind k) const {
    return static_cast<std::size_t>(
        std::count_if(instructions.begin(), instructions.end(), [k](const Instruction& i) { return i.kind == k; }));
  }

  friend bool operator==(const LayerPlan&, const LayerPlan&) = default;
};

namespace circuits {

// The four generator shapes of the self-dual gate set, anchored at the left
// site of a three-site window: Z_i, X_i X_{i+1}, Z_i Z_{i+1}, X_i X_{i+2}.
inline const std::array<std::vector<Pauli>, 4>& self_dual_shapes() {
  static const std::array<std::vector<Pauli>, 4> shapes = {
      std::vector<Pauli>{Pauli::Z}, std::vector<Pauli>{Pauli::X, Pauli::X}, std::vector<Pauli>{Pauli::Z, Pauli::Z},
      std::vector<Pauli>{Pauli::X, Pauli::I, Pauli::X}};
  return shapes;
}

// `count` positions from [0, range): independent draws or distinct ones.
inline std::vector<std::size_t> draw_positions(std::size_t count, std::size_t range, bool with_replacement, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(count);
  if (with_replacement) {
    for (std::size_t k = 0; k < count; ++k) out.push_back(uniform_index(rng, range));
    return out;
  }
  if (count > range) throw ConfigError(fmt::format("cannot draw {} distinct positions out of {}", count, range));
  std::vector<std::size_t> pool(range);
  for (std::size_t k = 0; k < range; ++k) pool[k] = k;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + uniform_index(rng, range - k);
    std::swap(pool[k], pool[j]);
    out.push_back(pool[k]);
  }
  return out;
}

inline void unitary_round(const CircuitSpec& spec, Rng& rng, LayerPlan& plan) {
  const std::size_t n_gates = spec.L / 3;
  const auto pos = draw_positions(n_gates, spec.L - 2, spec.positions_with_replacement, rng);
  for (std::size_t k = 0; k < n_gates; ++k) {
    // One of 8 gates: shape index and sign.
    const std::uint64_t g = uniform_index(rng, 8);
    Instruction ins;
    ins.kind = Instruction::Kind::Rotation;
    ins.pauli = LocalPauli{pos[k], self_dual_shapes()[g / 2]};
    ins.sign = (g % 2 == 0) ? +1 : -1;
    plan.instructions.push_back(std::move(ins));
  }
}

inline std::pair<std::size_t, std::size_t> footprint(const Instruction& ins) {
  if (ins.kind == Instruction::Kind::Rotation || ins.is_measurement()) {
    return {ins.pauli.left_site, ins.pauli.left_site + ins.pauli.width()};
  }
  return {std::min(ins.a, ins.b), std::max(ins.a, ins.b) + 1};
}

// Reorders instructions [begin, end) of a round into an equivalent sequence
// that walks the chain: an instruction may only pass earlier ones with
// disjoint support. Greedy nearest-to-cursor; returns the final cursor.
inline std::size_t sweep_order(std::vector<Instruction>& ins, std::size_t begin, std::size_t end, std::size_t cursor) {
  const std::size_t n = end - begin;
  std::vector<Instruction> out;
  out.reserve(n);
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    std::size_t best_dist = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k]) continue;
      const auto [lo, hi] = footprint(ins[begin + k]);
      bool ready = true;
      for (std::size_t j = 0; j < k && ready; ++j) {
        if (done[j]) continue;
        const auto [lo2, hi2] = footprint(ins[begin + j]);
        ready = hi2 <= lo || hi <= lo2;
      }
      if (!ready) continue;
      const std::size_t dist = lo > cursor ? lo - cursor : cursor - lo;
      if (best == n || dist < best_dist) {
        best = k;
        best_dist = dist;
      }
    }
    done[best] = true;
    out.push_back(ins[begin + best]);
    cursor = footprint(ins[begin + best]).second - 1;
  }
  std::move(out.begin(), out.end(), ins.begin() + static_cast<std::ptrdiff_t>(begin));
  return cursor;
}

// Measurement Pauli on neighbor pair (i, i+1): Z_i w.p. p, else X_i X_{i+1}.
inline LocalPauli measurement_pauli(std::size_t left, double p, Rng& rng) {
  if (uniform01(rng) < p) return LocalPauli{left, {Pauli::Z}};
  return LocalPauli{left, {Pauli::X, Pauli::X}};
}

}  // namespace circuits

inline LayerPlan self_dual_hybrid_layer(const CircuitSpec& spec, Rng& rng) {
  if (spec.model != Model::SelfDualHybrid) throw ConfigError("self_dual_hybrid_layer needs the selfdual model");
  spec.validate();
  LayerPlan plan;
  circuits::unitary_round(spec, rng, plan);
  const std::size_t n_gates = plan.instructions.size();
  const std::size_t n_meas = spec.L / 2;
  const auto pos = circuits::draw_positions(n_meas, spec.L - 1, spec.positions_with_replacement, rng);
  for (std::size_t k = 0; k < n_meas; ++k) {
    Instruction ins;
    ins.kind = Instruction::Kind::WeakMeasure;
    ins.pauli = circuits::measurement_pauli(pos[k], spec.p, rng);
    ins.beta = *spec.beta;
    plan.instructions.push_back(std::move(ins));
  }
  const std::size_t cursor = circuits::sweep_order(plan.instructions, 0, n_gates, 0);
  circuits::sweep_order(plan.instructions, n_gates, plan.instructions.size(), cursor);
  return plan;
}

inline LayerPlan clifford_dual_layer(const CircuitSpec& spec, Rng& rng) {
  if (spec.model != Model::CliffordDual) throw ConfigError("clifford_dual_layer needs the clifford-dual model");
  spec.validate();
  LayerPlan plan;
  circuits::unitary_round(spec, rng, plan);
  const std::size_t n_gates = plan.instructions.size();
  const auto n_meas = static_cast<std::size_t>(std::floor(static_cast<double>(spec.L) * *spec.gamma / 2.0 + 1e-12));
  const auto pos = circuits::draw_positions(n_meas, spec.L - 1, false, rng);
  for (std::size_t k = 0; k < n_meas; ++k) {
    Instruction ins;
    ins.kind = Instruction::Kind::ProjectiveMeasure;
    ins.pauli = circuits::measurement_pauli(pos[k], spec.p, rng);
    plan.instructions.push_back(std::move(ins));
  }
  const std::size_t cursor = circuits::sweep_order(plan.instructions, 0, n_gates, 0);
  circuits::sweep_order(plan.instructions, n_gates, plan.instructions.size(), cursor);
  return plan;
}

// Brickwork pairs (0,1),(2,3),... on even t and (1,2),(3,4),... on odd t.
inline std::vector<std::size_t> brickwork_lefts(std::size_t L, std::size_t t) {
  std::vector<std::size_t> out;
  for (std::size_t i = t % 2; i + 1 < L; i += 2) out.push_back(i);
  return out;
}

inline LayerPlan random_clifford_layer(const CircuitSpec& spec, std::size_t t, Rng& rng) {
  if (spec.model != Model::RandomClifford) throw ConfigError("random_clifford_layer needs the random-clifford model");
  spec.validate();
  LayerPlan plan;
  for (std::size_t i : brickwork_lefts(spec.L, t)) {
    Instruction ins;
    ins.kind = Instruction::Kind::Clifford2;
    ins.a = i;
    ins.b = i + 1;
    ins.clifford_index = uniform_index(rng, CliffordGate::kTwoQubitCliffords);
    plan.instructions.push_back(ins);
  }
  for (std::size_t q = 0; q < spec.L; ++q) {
    if (uniform01(rng) < spec.p) {
      Instruction ins;
      ins.kind = Instruction::Kind::ProjectiveMeasure;
      ins.pauli = LocalPauli{q, {Pauli::Z}};
      plan.instructions.push_back(std::move(ins));
    }
  }
  return plan;
}

// One automaton brickwork layer; after odd t (every second layer) each qubit
// w.p. p is measured in Z and then hit by a Hadamard.
inline LayerPlan qa_layer(const CircuitSpec& spec, std::size_t t, Rng& rng) {
  if (spec.model != Model::QuantumAutomaton) throw ConfigError("qa_layer needs the qa model");
  spec.validate();
  LayerPlan plan;
  for (std::size_t i : brickwork_lefts(spec.L, t)) {
    const bool left_control = uniform01(rng) < 0.5;
    Instruction cx;
    cx.kind = Instruction::Kind::CX;
    cx.a = left_control ? i : i + 1;
    cx.b = left_control ? i + 1 : i;
    Instruction cz;
    cz.kind = Instruction::Kind::CZ;
    cz.a = i;
    cz.b = i + 1;
    if (spec.qa_order == QaOrder::CxThenCz) {
      plan.instructions.push_back(cx);
      plan.instructions.push_back(cz);
    } else {
      plan.instructions.push_back(cz);
      plan.instructions.push_back(cx);
    }
  }
  if (t % 2 == 1) {
    for (std::size_t q = 0; q < spec.L; ++q) {
      if (uniform01(rng) < spec.p) {
        Instruction m;
        m.kind = Instruction::Kind::ProjectiveMeasure;
        m.pauli = LocalPauli{q, {Pauli::Z}};
        plan.instructions.push_back(std::move(m));
        Instruction h;
        h.kind = Instruction::Kind::H;
        h.a = q;
        plan.instructions.push_back(h);
      }
    }
  }
  return plan;
}

inline LayerPlan make_layer(const CircuitSpec& spec, std::size_t t, Rng& rng) {
  switch (spec.model) {
    case Model::SelfDualHybrid:
      return self_dual_hybrid_layer(spec, rng);
    case Model::CliffordDual:
      return clifford_dual_layer(spec, rng);
    case Model::RandomClifford:
      return random_clifford_layer(spec, t, rng);
    case Model::QuantumAutomaton:
      return qa_layer(spec, t, rng);
  }
  throw ConfigError("unknown model");
}

// ---------------------------------------------------------------------------
// Duality: one-site translation of the Majorana chain,
// Z_i -> X_i X_{i+1}, X_i X_{i+1} -> Z_{i+1}, extended multiplicatively.

inline PauliString duality_map(const PauliString& word) {
  const std::size_t n = word.size();
  // word = i^k prod_i Z_i^{z_i} prod_i (X_i X_{i+1})^{c_i}, c_i = prefix parity of x.
  std::vector<bool> c(n, false);
  bool parity = false;
  for (std::size_t i = 0; i < n; ++i) {
    parity ^= x_bit(word[i]);
    c[i] = parity;
  }
  if (parity) throw DomainError(fmt::format("{} has odd X parity and is not generated by Z_i, X_i X_(i+1)", word.str()));
  PauliString rebuilt(n);
  PauliString image(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!z_bit(word[i])) continue;
    if (i + 1 >= n) throw RangeError(fmt::format("image of Z_{} leaves the chain of {} sites", i, n));
    rebuilt = rebuilt * PauliString::local(n, {{i, Pauli::Z}});
    image = image * PauliString::local(n, {{i, Pauli::X}, {i + 1, Pauli::X}});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!c[i]) continue;
    rebuilt = rebuilt * PauliString::local(n, {{i, Pauli::X}, {i + 1, Pauli::X}});
    image = image * PauliString::local(n, {{i + 1, Pauli::Z}});
  }
  // word = i^k rebuilt.
  const int k = (word.phase() - rebuilt.phase() + 4) % 4;
  PauliString letters_only = rebuilt;
  letters_only.set_phase(word.phase());
  if (letters_only.letters() != word.letters()) throw ContractViolation("duality decomposition failed");
  image.set_phase(image.phase() + k);
  return image;
}

// Translation-invariant shape of a word: letters from the first to the last
// non-identity site, plus the phase.
inline std::string pauli_shape(const PauliString& p) {
  std::size_t b = 0;
  while (b < p.size() && p[b] == Pauli::I) ++b;
  std::size_t e = p.size();
  while (e > b && p[e - 1] == Pauli::I) --e;
  static constexpr std::array<const char*, 4> kPrefix = {"+", "+i", "-", "-i"};
  return kPrefix[static_cast<std::size_t>(p.phase())] + p.substring(b, e).letters_str();
}

struct DualityReport {
  bool ok = false;
  std::map<std::string, double> before;
  std::map<std::string, double> after;
  std::string message;
};

// Weighted multiset of (shape, sign) before and after duality, compared up to
// translation. Words are embedded at an interior position of a probe chain.
inline DualityReport duality_check(const std::vector<std::pair<PauliString, double>>& ensemble, double tol = 1e-12) {
  DualityReport r;
  for (const auto& [w, weight] : ensemble) {
    r.before[pauli_shape(w)] += weight;
    r.after[pauli_shape(duality_map(w))] += weight;
  }
  r.ok = true;
  std::vector<std::string> keys;
  for (const auto& [k, v] : r.before) keys.push_back(k);
  for (const auto& [k, v] : r.after) keys.push_back(k);
  for (const auto& k : keys) {
    const double a = r.before.count(k) ? r.before.at(k) : 0.0;
    const double b = r.after.count(k) ? r.after.at(k) : 0.0;
    if (std::abs(a - b) > tol) {
      r.ok = false;
      r.message += fmt::format("{}: {} -> {}; ", k, a, b);
    }
  }
  if (r.ok) r.message = "ensemble maps onto itself";
  return r;
}

// Generators of the self-dual gate set (each rotation sign counts once), on
// a probe chain of `probe` sites with the window at site 2.
inline std::vector<std::pair<PauliString, double>> self_dual_gate_ensemble(std::size_t probe = 8) {
  std::vector<std::pair<PauliString, double>> out;
  for (const auto& shape : circuits::self_dual_shapes()) {
    for (int sign : {+1, -1}) {
      PauliString w(probe);
      for (std::size_t j = 0; j < shape.size(); ++j) w[2 + j] = shape[j];
      w.set_phase(sign > 0 ? 0 : 2);
      out.emplace_back(w, 1.0 / 8.0);
    }
  }
  return out;
}

inline std::vector<std::pair<PauliString, double>> measurement_ensemble(double p, std::size_t probe = 8) {
  return {{PauliString::local(probe, {{2, Pauli::Z}}), p},
          {PauliString::local(probe, {{2, Pauli::X}, {3, Pauli::X}}), 1.0 - p}};
}

// ---------------------------------------------------------------------------
// Execution.

struct MeasurementRecord {
  std::size_t count = 0;
  std::size_t plus = 0;
};

// Every measurement consumes exactly one uniform draw from `outcomes`, on
// every backend, so identical seeds inject identical decisions.
inline MeasurementRecord apply_plan(MpsState& state, const LayerPlan& plan, Rng& outcomes) {
  MeasurementRecord rec;
  for (const auto& ins : plan.instructions) {
    switch (ins.kind) {
      case Instruction::Kind::Rotation:
        state.apply_pauli_rotation(ins.pauli, ins.sign * std::numbers::pi / 4);
        break;
      case Instruction::Kind::WeakMeasure: {
        const auto r = state.weak_measure(WeakMeasurementSpec{ins.pauli, ins.beta}, uniform01(outcomes));
        ++rec.count;
        rec.plus += r.outcome > 0;
        break;
      }
      case Instruction::Kind::ProjectiveMeasure: {
        const auto r = state.projective_measure(ins.pauli, uniform01(outcomes));
        ++rec.count;
        rec.plus += r.outcome > 0;
        break;
      }
      case Instruction::Kind::CX:
        if (ins.a + 1 == ins.b) {
          state.apply_unitary(gates::cnot(), ins.a);
        } else if (ins.b + 1 == ins.a) {
          state.apply_unitary(gates::cnot_reversed(), ins.b);
        } else {
          throw DomainError("MPS backend applies CX on neighbors only");
        }
        break;
      case Instruction::Kind::CZ:
        if (std::max(ins.a, ins.b) != std::min(ins.a, ins.b) + 1) throw DomainError("MPS backend applies CZ on neighbors only");
        state.apply_unitary(gates::cz(), std::min(ins.a, ins.b));
        break;
      case Instruction::Kind::H:
        state.apply_unitary(gates::hadamard(), ins.a);
        break;
      case Instruction::Kind::Clifford2:
        throw DomainError("random two-qubit Cliffords run on the tableau backend");
    }
  }
  return rec;
}

inline std::vector<std::size_t> window(std::size_t left, std::size_t width) {
  std::vector<std::size_t> s(width);
  for (std::size_t j = 0; j < width; ++j) s[j] = left + j;
  return s;
}

inline MeasurementRecord apply_plan(DenseState& state, const LayerPlan& plan, Rng& outcomes) {
  MeasurementRecord rec;
  const std::size_t n = state.num_qubits();
  auto full_word = [&](const LocalPauli& lp) {
    PauliString w(n);
    for (std::size_t j = 0; j < lp.width(); ++j) w[lp.left_site + j] = lp.letters[j];
    return w;
  };
  for (const auto& ins : plan.instructions) {
    const auto sites = window(ins.pauli.left_site, ins.pauli.width());
    switch (ins.kind) {
      case Instruction::Kind::Rotation:
        state.apply(gates::pauli_rotation(ins.pauli.letters, ins.sign * std::numbers::pi / 4), sites);
        break;
      case Instruction::Kind::WeakMeasure: {
        const double e = state.pauli_expectation(full_word(ins.pauli)).real();
        const double q = 0.5 * (1.0 + std::tanh(2.0 * ins.beta) * e);
        const int outcome = uniform01(outcomes) < q ? +1 : -1;
        state.apply(gates::weak_kraus(ins.pauli.letters, ins.beta, outcome), sites, true);
        ++rec.count;
        rec.plus += outcome > 0;
        break;
      }
      case Instruction::Kind::ProjectiveMeasure: {
        const double e = state.pauli_expectation(full_word(ins.pauli)).real();
        const double q = std::clamp(0.5 * (1.0 + e), 0.0, 1.0);
        const int outcome = uniform01(outcomes) < q ? +1 : -1;
        state.apply(gates::pauli_projector(ins.pauli.letters, outcome), sites, true);
        ++rec.count;
        rec.plus += outcome > 0;
        break;
      }
      case Instruction::Kind::CX:
        state.apply(gates::cnot(), {ins.a, ins.b});
        break;
      case Instruction::Kind::CZ:
        state.apply(gates::cz(), {ins.a, ins.b});
        break;
      case Instruction::Kind::H:
        state.apply(gates::hadamard(), {ins.a});
        break;
      case Instruction::Kind::Clifford2:
        throw DomainError("random two-qubit Cliffords run on the tableau backend");
    }
  }
  return rec;
}

inline CliffordGate clifford_of(const Instruction& ins) {
  switch (ins.kind) {
    case Instruction::Kind::Rotation: {
      // Strip identity letters from the ends; the middle of X I X is kept out
      // of the table by acting on the two outer sites only.
      std::vector<std::size_t> sites;
      std::vector<Pauli> letters;
      for (std::size_t j = 0; j < ins.pauli.width(); ++j) {
        if (ins.pauli.letters[j] == Pauli::I) continue;
        sites.push_back(ins.pauli.left_site + j);
        letters.push_back(ins.pauli.letters[j]);
      }
      if (sites.empty() || sites.size() > 2) throw DomainError("tableau rotations act on one or two non-identity sites");
      return CliffordGate::pauli_rotation(sites, PauliString(letters), ins.sign);
    }
    case Instruction::Kind::Clifford2:
      return CliffordGate::two_qubit(ins.a, ins.b, ins.clifford_index);
    case Instruction::Kind::CX:
      return CliffordGate::cx(ins.a, ins.b);
    case Instruction::Kind::CZ:
      return CliffordGate::cz(ins.a, ins.b);
    case Instruction::Kind::H:
      return CliffordGate::hadamard(ins.a);
    default:
      throw DomainError("instruction is not a Clifford gate");
  }
}

inline MeasurementRecord apply_plan(StabilizerTableau& state, const LayerPlan& plan, Rng& outcomes) {
  MeasurementRecord rec;
  const std::size_t n = state.num_qubits();
  for (const auto& ins : plan.instructions) {
    if (ins.kind == Instruction::Kind::WeakMeasure) throw DomainError("weak measurements are not Clifford operations");
    if (ins.kind == Instruction::Kind::ProjectiveMeasure) {
      PauliString w(n);
      for (std::size_t j = 0; j < ins.pauli.width(); ++j) w[ins.pauli.left_site + j] = ins.pauli.letters[j];
      // Outcome bit from the same uniform the other backends use.
      const double u = uniform01(outcomes);
      const auto o = state.measure(w, u >= 0.5);
      ++rec.count;
      rec.plus += o.value > 0;
      continue;
    }
    state.apply(clifford_of(ins));
  }
  return rec;
}

}  // namespace mipt
