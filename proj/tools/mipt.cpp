// mipt: simulate monitored circuits, fit the resulting tables, and print exact
// small-system entropies.

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mipt/circuits.hpp"
#include "mipt/dense_state.hpp"
#include "mipt/errors.hpp"
#include "mipt/fitting.hpp"
#include "mipt/harness.hpp"
#include "mipt/results_io.hpp"

using json = nlohmann::json;
using namespace mipt;

namespace {

// JSON object -> CLI11 config items for the active subcommand. Keys are long
// option names; '_' and '-' are interchangeable, arrays become repeated inputs.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    const auto subs = root_->get_subcommands();
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!subs.empty()) item.parents = {subs.front()->get_name()};
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError(fmt::format("unsupported config value {}", v.dump()));
  }
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? "," : "") + parts[k];
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model;
  std::size_t L = 0;
  double p = 0.0;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::size_t chi = 128;
  std::size_t t_max = 0;
  std::size_t stride = 1;
  std::size_t t_eq = 0;
  std::size_t t_m = 1;
  std::size_t t_s = 0;
  std::size_t traj = 1;
  std::size_t samples = 5000;
  std::uint64_t seed = 0;
  std::vector<std::string> observables = {"ee"};
  std::vector<std::string> cuts = {"half"};
  std::vector<std::string> profile_cuts;
  std::string mode = "growth";
  std::string out;
  std::string format = "csv";
  std::string qa_order = "cx-cz";
  bool distinct_positions = false;
  bool quiet = false;
};

RunConfig build_config(const SimulateArgs& a) {
  RunConfig cfg;
  cfg.spec.model = parse_model(a.model);
  cfg.spec.L = a.L;
  cfg.spec.p = a.p;
  cfg.spec.beta = a.beta;
  cfg.spec.gamma = a.gamma;
  cfg.spec.seed = a.seed;
  cfg.spec.positions_with_replacement = !a.distinct_positions;
  if (a.qa_order == "cx-cz") {
    cfg.spec.qa_order = QaOrder::CxThenCz;
  } else if (a.qa_order == "cz-cx") {
    cfg.spec.qa_order = QaOrder::CzThenCx;
  } else {
    throw ConfigError(fmt::format("qa-order must be cx-cz or cz-cx, got '{}'", a.qa_order));
  }
  cfg.chi = a.chi;
  auto& s = cfg.sched;
  if (a.mode == "growth") {
    s.mode = RunMode::Growth;
  } else if (a.mode == "steady") {
    s.mode = RunMode::Steady;
  } else {
    throw ConfigError(fmt::format("mode must be growth or steady, got '{}'", a.mode));
  }
  s.t_max = a.t_max;
  s.stride = a.stride;
  s.t_eq = a.t_eq;
  s.t_m = a.t_m;
  s.t_s = a.t_s;
  s.samples = a.samples;
  s.observables.clear();
  for (const auto& o : a.observables) s.observables.push_back(parse_observable(o));
  s.cuts = parse_cuts(join(a.cuts), a.L);
  if (!a.profile_cuts.empty()) s.profile_cuts = parse_cuts(join(a.profile_cuts), a.L);
  return cfg;
}

int run_simulate(const SimulateArgs& a) {
  const RunConfig cfg = build_config(a);
  const OutputFormat format = parse_format(a.format);
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::size_t done, std::size_t total) { fmt::print(stderr, "\rtrajectories {}/{}", done, total); };
  }
  const EnsembleTable table = run_ensemble(cfg, a.traj, a.seed, progress);
  if (!a.quiet) fmt::print(stderr, "\n");
  emit_results(table, a.out, format);
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string in;
  std::string kind = "logslope";
  std::string observable = "ee";
  std::optional<std::size_t> cut;
  std::optional<std::size_t> L;
  std::string axis = "time";
  double z = 1.0;
  std::string z_grid = "0.5:2.5:0.01";
  std::string s_inf = "auto";
  std::vector<double> window;
};

json fit_json(const FitResult& r) {
  return {{"slope", r.slope},
          {"intercept", r.intercept},
          {"residual", r.residual},
          {"window", {r.window_lo, r.window_hi}},
          {"n_points", r.n_points}};
}

std::optional<Window> parse_window(const std::vector<double>& w) {
  if (w.empty()) return std::nullopt;
  if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError("window needs two increasing values lo,hi");
  return Window{w[0], w[1]};
}

std::optional<double> parse_s_inf(const std::string& s) {
  if (s == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("s-inf must be 'auto' or a number, got '{}'", s));
}

// Time series of one observable per system size.
std::map<std::size_t, std::vector<Point>> series_by_L(const std::vector<ResultRow>& rows, const FitArgs& a) {
  std::map<std::size_t, std::vector<Point>> out;
  for (const auto& r : rows) {
    if (r.observable != a.observable) continue;
    if (a.L && r.L != *a.L) continue;
    const std::size_t want = a.cut.value_or(is_bipartite(parse_observable(a.observable)) ? r.L / 2 : 0);
    if (r.cut != want) continue;
    out[r.L].push_back({static_cast<double>(r.t), r.value});
  }
  if (out.empty()) throw FitError(fmt::format("no rows for observable '{}' at the requested cut", a.observable));
  for (auto& [L, pts] : out) {
    std::sort(pts.begin(), pts.end(), [](const Point& x, const Point& y) { return x.x < y.x; });
  }
  return out;
}

const std::vector<Point>& single(const std::map<std::size_t, std::vector<Point>>& m, std::size_t& L) {
  if (m.size() != 1) throw FitError(fmt::format("table holds {} system sizes; select one with --L", m.size()));
  L = m.begin()->first;
  return m.begin()->second;
}

int run_fit(const FitArgs& a) {
  const auto rows = read_csv(a.in);
  const auto window = parse_window(a.window);
  json out{{"kind", a.kind}, {"observable", a.observable}};
  if (a.kind == "logslope" && a.axis == "space") {
    std::map<std::size_t, std::size_t> last_t;
    for (const auto& r : rows) {
      if (r.observable == a.observable && (!a.L || r.L == *a.L)) last_t[r.L] = std::max(last_t[r.L], r.t);
    }
    if (last_t.size() != 1) throw FitError(fmt::format("table holds {} system sizes; select one with --L", last_t.size()));
    const auto [L, t] = *last_t.begin();
    std::vector<SpatialPoint> profile;
    for (const auto& r : rows) {
      if (r.observable == a.observable && r.L == L && r.t == t && r.cut > 0) profile.push_back({r.cut, r.value});
    }
    out["L"] = L;
    out["t"] = t;
    out["fit"] = fit_json(fit_spatial_log_slope(L, profile, window));
  } else if (a.kind == "logslope") {
    if (a.axis != "time") throw ConfigError(fmt::format("axis must be time or space, got '{}'", a.axis));
    std::size_t L = 0;
    const auto by_L = series_by_L(rows, a);
    const auto& s = single(by_L, L);
    out["L"] = L;
    out["fit"] = fit_json(fit_log_slope(s, window.value_or(temporal_window(s))));
  } else if (a.kind == "exptail" || a.kind == "powerlaw") {
    std::size_t L = 0;
    const auto by_L = series_by_L(rows, a);
    const auto& s = single(by_L, L);
    const auto curve = relaxation_curve(s, static_cast<double>(L), a.z, parse_s_inf(a.s_inf));
    const FitResult r = a.kind == "exptail" ? fit_exponential_tail(curve.points, window.value_or(Window{}))
                                            : fit_power_law(curve.points, window.value_or(Window{}));
    out["L"] = L;
    out["z"] = a.z;
    out["s_inf"] = curve.s_inf;
    out["warning"] = curve.warning;
    if (curve.warning) out["note"] = curve.note;
    out["fit"] = fit_json(r);
  } else if (a.kind == "collapse") {
    const auto s_inf = parse_s_inf(a.s_inf);
    std::map<double, std::vector<Point>> curves;
    json asymptotes = json::object();
    for (const auto& [L, s] : series_by_L(rows, a)) {
      const auto curve = relaxation_curve(s, static_cast<double>(L), 1.0, s_inf);
      std::vector<Point> raw;
      for (const auto& p : curve.points) raw.push_back({p.x * static_cast<double>(L), p.y});
      curves[static_cast<double>(L)] = raw;
      asymptotes[std::to_string(L)] = curve.s_inf;
    }
    const auto scan = scan_collapse_z(curves, parse_grid(a.z_grid), window.value_or(Window{}));
    out["best_z"] = scan.best_z;
    out["best_quality"] = scan.best_quality;
    out["s_inf"] = asymptotes;
    json q = json::array();
    for (const auto& p : scan.quality) q.push_back({p.x, std::isfinite(p.y) ? json(p.y) : json(nullptr)});
    out["quality"] = q;
  } else {
    throw ConfigError(fmt::format("unknown fit kind '{}'", a.kind));
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  std::string state = "zero";
  std::size_t L = 2;
  std::optional<std::size_t> cut;
  double order = 1.0;
  std::string model;
  double p = 0.5;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

DenseState named_state(const std::string& name, std::size_t L) {
  if (name == "zero") return DenseState::zeros(L);
  if (name == "plus") return DenseState::plus(L);
  if (name == "tstates") return DenseState::product(L, 1.0, std::polar(1.0, std::numbers::pi / 4));
  if (name == "ghz") {
    DenseState::Vector v = DenseState::Vector::Zero(Eigen::Index{1} << L);
    v(0) = v(v.size() - 1) = 1.0 / std::sqrt(2.0);
    return DenseState(L, v);
  }
  throw ConfigError(fmt::format("unknown state '{}' (zero, plus, tstates, ghz)", name));
}

int run_oracle(const OracleArgs& a) {
  json spec;
  DenseState state;
  if (!a.model.empty()) {
    CircuitSpec cs;
    cs.model = parse_model(a.model);
    cs.L = a.L;
    cs.p = a.p;
    cs.beta = a.beta;
    cs.gamma = a.gamma;
    cs.seed = a.seed;
    cs.validate();
    if (cs.model == Model::RandomClifford) throw ConfigError("random-clifford gates have no dense form here");
    state = cs.initial_basis() == PauliBasis::X ? DenseState::plus(a.L) : DenseState::zeros(a.L);
    // Same streams as the trajectory runner, so the state matches seed `seed`.
    Rng plan = make_stream(a.seed, Stream::kLayerPlan);
    Rng outcomes = make_stream(a.seed, Stream::kOutcomes);
    for (std::size_t t = 0; t < a.steps; ++t) apply_plan(state, make_layer(cs, t, plan), outcomes);
    spec = cs;
    spec["steps"] = a.steps;
  } else {
    state = named_state(a.state, a.L);
    spec = {{"state", a.state}, {"L", a.L}};
  }
  const std::size_t cut = a.cut.value_or(a.L / 2);
  if (cut < 1 || cut >= a.L) throw ConfigError(fmt::format("cut {} outside [1, {}]", cut, a.L - 1));
  const auto e = oracle::exact_entropies(state, cut, a.order);
  json ent{{"ee", e.ee.value}, {"pe_z", e.pe_z.value}, {"pe_x", e.pe_x.value},
           {"bpmi_z", oracle::bpmi(state, cut, oracle::Basis::Z).value}};
  ent["sre"] = e.sre ? json(e.sre->value) : json(nullptr);
  if (state.num_qubits() <= DenseState::kMaxPauliScanQubits) ent["bsmi"] = oracle::bsmi(state, cut).value;
  std::cout << json{{"spec", spec}, {"cut", cut}, {"order", a.order}, {"entropies", ent}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monitored quantum circuit simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file with option values for the subcommand; command-line flags win");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a trajectory ensemble and write the averaged table");
  sim->add_option("--model", sa.model, "selfdual | clifford-dual | random-clifford | qa")->required();
  sim->add_option("--L", sa.L, "Number of qubits")->required();
  sim->add_option("--p", sa.p, "Measurement probability")->required();
  sim->add_option("--beta", sa.beta, "Weak-measurement strength (selfdual)");
  sim->add_option("--gamma", sa.gamma, "Measured fraction (clifford-dual)");
  sim->add_option("--chi", sa.chi, "MPS bond dimension cap")->capture_default_str();
  sim->add_option("--t-max", sa.t_max, "Last step recorded in growth mode");
  sim->add_option("--stride", sa.stride, "Growth-mode recording interval")->capture_default_str();
  sim->add_option("--t-eq", sa.t_eq, "Steady mode: equilibration steps");
  sim->add_option("--t-m", sa.t_m, "Steady mode: recording interval")->capture_default_str();
  sim->add_option("--t-s", sa.t_s, "Steady mode: sampling window");
  sim->add_option("--traj", sa.traj, "Number of trajectories")->capture_default_str();
  sim->add_option("--samples", sa.samples, "Samples per estimator call")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Seed of trajectory 0; trajectory i uses seed + i")->capture_default_str();
  sim->add_option("--observables", sa.observables, "ee,sre,pe,bsmi,bpmi")->delimiter(',');
  sim->add_option("--cuts", sa.cuts, "half | all | comma list")->delimiter(',');
  sim->add_option("--profile-cuts", sa.profile_cuts, "Cuts recorded only at the final time")->delimiter(',');
  sim->add_option("--mode", sa.mode, "growth | steady")->capture_default_str();
  sim->add_option("--out", sa.out, "Output path")->required();
  sim->add_option("--format", sa.format, "csv | json")->capture_default_str();
  sim->add_option("--qa-order", sa.qa_order, "Automaton gate order: cx-cz | cz-cx")->capture_default_str();
  sim->add_flag("--distinct-positions", sa.distinct_positions, "Draw gate positions without replacement");
  sim->add_flag("--quiet", sa.quiet, "No progress output");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit slopes, tails or the collapse exponent from a results CSV");
  fit->add_option("--in", fa.in, "Results CSV")->required();
  fit->add_option("--kind", fa.kind, "logslope | exptail | powerlaw | collapse")->capture_default_str();
  fit->add_option("--observable", fa.observable, "Observable column value")->capture_default_str();
  fit->add_option("--cut", fa.cut, "Cut (default: L/2 for bipartite observables, else 0)");
  fit->add_option("--L", fa.L, "Restrict to one system size");
  fit->add_option("--axis", fa.axis, "logslope axis: time | space")->capture_default_str();
  fit->add_option("--z", fa.z, "Dynamical exponent for tau = t / L^z")->capture_default_str();
  fit->add_option("--z-grid", fa.z_grid, "Collapse scan grid a:b:step")->capture_default_str();
  fit->add_option("--s-inf", fa.s_inf, "Asymptote: auto or a number")->capture_default_str();
  fit->add_option("--window", fa.window, "Fit window lo,hi")->delimiter(',');

  OracleArgs oa;
  auto* orc = app.add_subcommand("oracle", "Exact entropies of a small state as JSON");
  orc->add_option("--state", oa.state, "zero | plus | tstates | ghz")->capture_default_str();
  orc->add_option("--L", oa.L, "Number of qubits (at most 12)")->capture_default_str();
  orc->add_option("--cut", oa.cut, "Bipartition cut (default L/2)");
  orc->add_option("--order", oa.order, "Renyi order")->capture_default_str();
  orc->add_option("--model", oa.model, "Evolve a seeded trajectory of this model instead of --state");
  orc->add_option("--p", oa.p, "Measurement probability")->capture_default_str();
  orc->add_option("--beta", oa.beta, "Weak-measurement strength");
  orc->add_option("--gamma", oa.gamma, "Measured fraction");
  orc->add_option("--steps", oa.steps, "Number of circuit steps")->capture_default_str();
  orc->add_option("--seed", oa.seed, "Trajectory seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*sim) return run_simulate(sa);
    if (*fit) return run_fit(fa);
    return run_oracle(oa);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
