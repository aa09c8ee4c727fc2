#pragma once

// Trajectory runner and ensemble averaging.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "mipt/circuits.hpp"
#include "mipt/errors.hpp"
#include "mipt/mps.hpp"
#include "mipt/mps_sampling.hpp"
#include "mipt/rng.hpp"
#include "mipt/stats.hpp"
#include "mipt/tableau.hpp"

namespace mipt {

enum class Observable { EE, SRE, PE, BSMI, BPMI };

inline constexpr std::array<Observable, 5> kAllObservables = {Observable::EE, Observable::SRE, Observable::PE,
                                                              Observable::BSMI, Observable::BPMI};

inline std::string observable_name(Observable o) {
  switch (o) {
    case Observable::EE:
      return "ee";
    case Observable::SRE:
      return "sre";
    case Observable::PE:
      return "pe";
    case Observable::BSMI:
      return "bsmi";
    case Observable::BPMI:
      return "bpmi";
  }
  return "?";
}

inline Observable parse_observable(std::string_view s) {
  for (Observable o : kAllObservables) {
    if (observable_name(o) == s) return o;
  }
  throw ConfigError(fmt::format("unknown observable '{}'", s));
}

// Whole-chain observables carry cut 0.
inline bool is_bipartite(Observable o) { return o == Observable::EE || o == Observable::BSMI || o == Observable::BPMI; }

enum class RunMode { Growth, Steady };
enum class Backend { Auto, Mps, Tableau };

struct ObservableSchedule {
  RunMode mode = RunMode::Growth;
  // Growth: record at t = 0, stride, 2 stride, ... up to t_max.
  std::size_t t_max = 0;
  std::size_t stride = 1;
  // Steady: t_eq equilibration steps, then every t_m steps over a window of t_s.
  std::size_t t_eq = 0;
  std::size_t t_m = 1;
  std::size_t t_s = 0;
  // Overrides both rules when non-empty.
  std::vector<std::size_t> record_at;

  std::vector<Observable> observables = {Observable::EE};
  std::vector<std::size_t> cuts;
  // Extra cuts recorded only at the last record time (spatial profiles).
  std::vector<std::size_t> profile_cuts;
  std::size_t samples = 5000;

  bool wants(Observable o) const { return std::find(observables.begin(), observables.end(), o) != observables.end(); }

  std::vector<std::size_t> record_times() const {
    if (!record_at.empty()) return record_at;
    std::vector<std::size_t> out;
    if (mode == RunMode::Growth) {
      for (std::size_t t = 0; t <= t_max; t += stride) out.push_back(t);
    } else {
      for (std::size_t k = 0; k <= t_s; k += t_m) out.push_back(t_eq + k);
    }
    return out;
  }

  void validate(std::size_t L) const {
    if (stride == 0 || t_m == 0) throw ConfigError("record intervals must be positive");
    if (observables.empty()) throw ConfigError("no observables requested");
    for (std::size_t k = 1; k < record_at.size(); ++k) {
      if (record_at[k] <= record_at[k - 1]) throw ConfigError("record times must be strictly increasing");
    }
    for (const auto* list : {&cuts, &profile_cuts}) {
      for (std::size_t c : *list) {
        if (c < 1 || c >= L) throw ConfigError(fmt::format("cut {} outside [1, {}]", c, L - 1));
      }
    }
    const bool bipartite =
        std::any_of(observables.begin(), observables.end(), [](Observable o) { return is_bipartite(o); });
    if (bipartite && cuts.empty() && profile_cuts.empty()) throw ConfigError("bipartite observables need cuts");
  }
};

// "half", "all" or a comma-separated list.
inline std::vector<std::size_t> parse_cuts(std::string_view text, std::size_t L) {
  std::vector<std::size_t> out;
  if (text == "half") {
    out.push_back(L / 2);
  } else if (text == "all") {
    for (std::size_t c = 1; c < L; ++c) out.push_back(c);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      const std::string item(text.substr(pos, comma - pos));
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("bad cut '{}'", item));
      }
      pos = comma + 1;
    }
  }
  for (std::size_t c : out) {
    if (c < 1 || c >= L) throw ConfigError(fmt::format("cut {} outside [1, {}]", c, L - 1));
  }
  return out;
}

struct RecordRow {
  std::size_t t = 0;
  Observable observable = Observable::EE;
  std::size_t cut = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
};

struct RunConfig {
  CircuitSpec spec;
  ObservableSchedule sched;
  std::size_t chi = 128;
  Backend backend = Backend::Auto;

  Backend resolved_backend() const {
    const Backend natural = spec.uses_mps() ? Backend::Mps : Backend::Tableau;
    if (backend != Backend::Auto && backend != natural) {
      throw ConfigError(fmt::format("model {} runs on the {} backend", model_name(spec.model),
                                    natural == Backend::Mps ? "mps" : "tableau"));
    }
    return natural;
  }

  void validate() const {
    spec.validate();
    sched.validate(spec.L);
    resolved_backend();
    if (chi < 1) throw ConfigError("chi must be positive");
  }
};

struct TrajectoryRecord {
  CircuitSpec spec;
  std::uint64_t seed = 0;
  std::vector<RecordRow> rows;
};

namespace harness {

inline void record_mps(MpsState& state, const ObservableSchedule& sched, std::size_t t, bool last, std::uint64_t seed,
                       std::vector<RecordRow>& rows) {
  std::vector<std::size_t> cuts = sched.cuts;
  if (last) {
    for (std::size_t c : sched.profile_cuts) {
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
  }
  // Pauli samples feed SRE and BSMI; bitstring samples feed PE and BPMI. Each
  // family has its own stream per record time.
  auto stream = [&](std::uint64_t family) { return make_stream(seed, Stream::kEstimator, (static_cast<std::uint64_t>(t) << 1) | family); };
  const bool want_pauli = sched.wants(Observable::SRE) || (sched.wants(Observable::BSMI) && !cuts.empty());
  const bool want_bits = sched.wants(Observable::PE) || (sched.wants(Observable::BPMI) && !cuts.empty());
  std::optional<MpsState> frozen;
  if (want_pauli || want_bits) {
    if (sched.samples < 100) throw ConfigError(fmt::format("estimators need at least 100 samples, got {}", sched.samples));
    frozen = sampling::right_normalized_copy(state);
  }
  const std::span<const std::size_t> bsmi_cuts =
      sched.wants(Observable::BSMI) ? std::span<const std::size_t>(cuts) : std::span<const std::size_t>();
  const std::span<const std::size_t> bpmi_cuts =
      sched.wants(Observable::BPMI) ? std::span<const std::size_t>(cuts) : std::span<const std::size_t>();
  std::vector<PauliSample> paulis;
  std::vector<BitstringSample> bits;
  if (want_pauli) {
    Rng rng = stream(0);
    paulis = sample_pauli_strings(*frozen, sched.samples, rng, bsmi_cuts);
  }
  if (want_bits) {
    Rng rng = stream(1);
    bits = sample_bitstrings(*frozen, sched.samples, rng, bpmi_cuts);
  }
  for (Observable o : sched.observables) {
    switch (o) {
      case Observable::EE:
        for (std::size_t c : cuts) rows.push_back({t, o, c, state.entanglement_entropy(c).value, 0.0, 0});
        break;
      case Observable::SRE: {
        const auto r = sre_from_samples(paulis, frozen->num_sites(), 1.0);
        rows.push_back({t, o, 0, r.value, r.stderr_, r.n_samples});
        break;
      }
      case Observable::PE: {
        const auto r = pe_from_samples(bits);
        rows.push_back({t, o, 0, r.value, r.stderr_, r.n_samples});
        break;
      }
      case Observable::BSMI: {
        if (cuts.empty()) break;
        const auto rs = bsmi_from_samples(*frozen, paulis, bsmi_cuts);
        for (std::size_t k = 0; k < cuts.size(); ++k) rows.push_back({t, o, cuts[k], rs[k].value, rs[k].stderr_, rs[k].n_samples});
        break;
      }
      case Observable::BPMI: {
        if (cuts.empty()) break;
        const auto rs = bpmi_from_samples(*frozen, bits, bpmi_cuts);
        for (std::size_t k = 0; k < cuts.size(); ++k) rows.push_back({t, o, cuts[k], rs[k].value, rs[k].stderr_, rs[k].n_samples});
        break;
      }
    }
  }
}

// Exact values; stabilizer states carry no magic, so SRE and BSMI are 0.
inline void record_tableau(const StabilizerTableau& state, const CircuitSpec& spec, const ObservableSchedule& sched,
                           std::size_t t, bool last, std::vector<RecordRow>& rows) {
  std::vector<std::size_t> cuts = sched.cuts;
  if (last) {
    for (std::size_t c : sched.profile_cuts) {
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
  }
  const PauliBasis basis = spec.pe_basis();
  for (Observable o : sched.observables) {
    switch (o) {
      case Observable::EE:
        for (std::size_t c : cuts) rows.push_back({t, o, c, state.entanglement_entropy(c).value, 0.0, 0});
        break;
      case Observable::SRE:
        rows.push_back({t, o, 0, 0.0, 0.0, 0});
        break;
      case Observable::PE:
        rows.push_back({t, o, 0, state.participation_entropy(basis).value, 0.0, 0});
        break;
      case Observable::BSMI:
        for (std::size_t c : cuts) rows.push_back({t, o, c, 0.0, 0.0, 0});
        break;
      case Observable::BPMI:
        for (std::size_t c : cuts) rows.push_back({t, o, c, state.bpmi(c, basis).value, 0.0, 0});
        break;
    }
  }
}

template <class State, class Record>
void evolve(State& state, const RunConfig& cfg, std::uint64_t seed, Record&& record) {
  Rng plan_rng = make_stream(seed, Stream::kLayerPlan);
  Rng outcomes = make_stream(seed, Stream::kOutcomes);
  const auto times = cfg.sched.record_times();
  std::size_t t = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (t < times[k]) {
      apply_plan(state, make_layer(cfg.spec, t, plan_rng), outcomes);
      ++t;
    }
    record(t, k + 1 == times.size());
  }
}

}  // namespace harness

inline TrajectoryRecord run_trajectory(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TrajectoryRecord rec{cfg.spec, seed, {}};
  if (cfg.resolved_backend() == Backend::Mps) {
    MpsState state(cfg.spec.L, LocalState::Zero, TruncationPolicy{cfg.chi, 0.0});
    harness::evolve(state, cfg, seed,
                    [&](std::size_t t, bool last) { harness::record_mps(state, cfg.sched, t, last, seed, rec.rows); });
  } else {
    StabilizerTableau state(cfg.spec.L, cfg.spec.initial_basis());
    harness::evolve(state, cfg, seed, [&](std::size_t t, bool last) {
      harness::record_tableau(state, cfg.spec, cfg.sched, t, last, rec.rows);
    });
  }
  for (const auto& r : rec.rows) {
    if (!std::isfinite(r.value)) {
      throw ContractViolation(fmt::format("non-finite {} at t = {} (seed {})", observable_name(r.observable), r.t, seed));
    }
  }
  return rec;
}

// Per (t, observable, cut): trajectory mean and its standard error.
struct EnsembleRow {
  std::size_t t = 0;
  Observable observable = Observable::EE;
  std::size_t cut = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t n_samples = 0;
};

struct EnsembleTable {
  CircuitSpec spec;
  std::size_t chi = 0;  // 0 on the tableau backend
  std::uint64_t seed_base = 0;
  std::size_t n_traj = 0;
  std::vector<EnsembleRow> rows;
};

inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MIPT_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(fmt::format("MIPT_THREADS='{}' is not a positive integer", env));
    n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Reduces records in index order so the result does not depend on scheduling.
inline EnsembleTable aggregate(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw ConfigError("cannot aggregate zero trajectories");
  EnsembleTable table;
  table.spec = records.front().spec;
  table.n_traj = records.size();
  const auto& ref = records.front().rows;
  for (const auto& rec : records) {
    if (rec.rows.size() != ref.size()) throw ContractViolation("trajectories recorded different row sets");
  }
  std::vector<double> values(records.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t k = 0; k < records.size(); ++k) {
      const auto& r = records[k].rows[i];
      if (r.t != ref[i].t || r.observable != ref[i].observable || r.cut != ref[i].cut) {
        throw ContractViolation("trajectories recorded rows in different orders");
      }
      values[k] = r.value;
    }
    EnsembleRow row{ref[i].t, ref[i].observable, ref[i].cut, stats::mean(values), 0.0, ref[i].n_samples};
    row.stderr_ = values.size() > 1 ? stats::sem(values) : 0.0;
    table.rows.push_back(row);
  }
  return table;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

inline EnsembleTable run_ensemble(const RunConfig& cfg, std::size_t n_traj, std::uint64_t seed_base,
                                  const ProgressFn& progress = {}) {
  if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
  cfg.validate();
  std::vector<TrajectoryRecord> records(n_traj);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_traj) return;
      try {
        records[i] = run_trajectory(cfg, seed_base + i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(n_traj);
        return;
      }
      std::lock_guard lock(mu);
      ++done;
      if (progress) progress(done, n_traj);
    }
  };
  const std::size_t n_workers = worker_count(n_traj);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  EnsembleTable table = aggregate(records);
  table.chi = cfg.resolved_backend() == Backend::Mps ? cfg.chi : 0;
  table.seed_base = seed_base;
  return table;
}

// Rows of one observable at one cut, time-ordered.
inline std::vector<EnsembleRow> select(const EnsembleTable& table, Observable o, std::size_t cut = 0) {
  std::vector<EnsembleRow> out;
  for (const auto& r : table.rows) {
    if (r.observable == o && r.cut == cut) out.push_back(r);
  }
  return out;
}

}  // namespace mipt
