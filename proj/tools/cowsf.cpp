// cowsf: key-rate curves, Monte Carlo runs, self-checks and attack
// optimization for the soft-filtering attack on COW QKD.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cowsf/analytic.hpp"
#include "cowsf/curves.hpp"
#include "cowsf/errors.hpp"
#include "cowsf/optimizer.hpp"
#include "cowsf/simulator.hpp"
#include "cowsf/strategies.hpp"
#include "cowsf/validation.hpp"

using nlohmann::ordered_json;
using namespace cowsf;

namespace {

enum Exit { kOk = 0, kValidationFailed = 1, kInfeasible = 2, kConfigError = 3 };

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double eta = 0.1;
  double delta_db_per_km = 0.25;
  double f = 0.1;
  std::string mode = "strict";
  std::uint64_t seed = 1;
  std::size_t budget = 20000;
  std::string mu_a = "optimize";  // curve: number or "optimize"; other commands need a number
  double length_km = 100.0;
  std::vector<double> lengths{10, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250};
  std::vector<std::string> attacks{"sf", "bs", "usd"};
  int t_sf1_max = 4;
  double mu_b_max = 1.0;
  std::size_t signals = 1000000;
  int t_sf1 = 0;
  int t_sf2 = 1;
  std::string mu_b = "0.1";
  std::string mu_e1 = "inf";
  std::string mu_e2 = "inf";
};

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["eta"] = c.eta;
  j["delta_db_per_km"] = c.delta_db_per_km;
  j["f"] = c.f;
  j["mode"] = c.mode;
  j["seed"] = c.seed;
  j["budget"] = c.budget;
  j["mu_a"] = c.mu_a;
  j["length_km"] = c.length_km;
  j["lengths"] = c.lengths;
  j["attacks"] = c.attacks;
  j["t_sf1_max"] = c.t_sf1_max;
  j["mu_b_max"] = c.mu_b_max;
  j["signals"] = c.signals;
  j["attack"] = {{"t_sf1", c.t_sf1}, {"t_sf2", c.t_sf2}, {"mu_b", c.mu_b}, {"mu_e1", c.mu_e1}, {"mu_e2", c.mu_e2}};
  return j;
}

std::string number_or_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_number(v.get<double>());
  throw argument_error("expected a number or string, got " + v.dump());
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  static const std::vector<std::string> known{"eta",     "delta_db_per_km", "f",         "mode",     "seed",
                                              "budget",  "mu_a",            "length_km", "lengths",  "attacks",
                                              "t_sf1_max", "mu_b_max",      "signals",   "attack"};
  if (!j.is_object()) throw argument_error("config file must hold a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw argument_error("unknown config key '" + key + "'");
    }
  }
  if (j.contains("eta")) c.eta = j["eta"].get<double>();
  if (j.contains("delta_db_per_km")) c.delta_db_per_km = j["delta_db_per_km"].get<double>();
  if (j.contains("f")) c.f = j["f"].get<double>();
  if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("budget")) c.budget = j["budget"].get<std::size_t>();
  if (j.contains("mu_a")) c.mu_a = number_or_string(j["mu_a"]);
  if (j.contains("length_km")) c.length_km = j["length_km"].get<double>();
  if (j.contains("lengths")) c.lengths = j["lengths"].get<std::vector<double>>();
  if (j.contains("attacks")) c.attacks = j["attacks"].get<std::vector<std::string>>();
  if (j.contains("t_sf1_max")) c.t_sf1_max = j["t_sf1_max"].get<int>();
  if (j.contains("mu_b_max")) c.mu_b_max = j["mu_b_max"].get<double>();
  if (j.contains("signals")) c.signals = j["signals"].get<std::size_t>();
  if (j.contains("attack")) {
    const auto& a = j["attack"];
    if (a.contains("t_sf1")) c.t_sf1 = a["t_sf1"].get<int>();
    if (a.contains("t_sf2")) c.t_sf2 = a["t_sf2"].get<int>();
    if (a.contains("mu_b")) c.mu_b = number_or_string(a["mu_b"]);
    if (a.contains("mu_e1")) c.mu_e1 = number_or_string(a["mu_e1"]);
    if (a.contains("mu_e2")) c.mu_e2 = number_or_string(a["mu_e2"]);
  }
}

StatisticsMode parse_mode(const std::string& s) {
  if (s == "strict") return StatisticsMode::StrictStatistics;
  if (s == "free") return StatisticsMode::FreeStatistics;
  throw argument_error("mode must be 'strict' or 'free', got '" + s + "'");
}

double parse_mu_a(const std::string& s) {
  const auto mu = MeanPhotonNumber::parse(s);
  if (mu.is_infinite() || !(mu.value() > 0.0)) throw argument_error("mu_a must be a positive number");
  return mu.value();
}

ChannelParams channel_of(const RunConfig& c) { return ChannelParams{c.eta, c.delta_db_per_km, c.f}; }

ProtocolParams protocol_of(const RunConfig& c) {
  auto p = channel_of(c).with(MeanPhotonNumber(parse_mu_a(c.mu_a)), c.length_km);
  p.validate();
  return p;
}

AttackParams attack_of(const RunConfig& c) {
  AttackParams a;
  a.t_sf1 = c.t_sf1;
  a.t_sf2 = c.t_sf2;
  a.mu_b = MeanPhotonNumber::parse(c.mu_b);
  a.mu_e1 = MeanPhotonNumber::parse(c.mu_e1);
  a.mu_e2 = MeanPhotonNumber::parse(c.mu_e2);
  return a;
}

OptimizerSettings optimizer_of(const RunConfig& c, unsigned workers) {
  OptimizerSettings s;
  if (c.budget < 1) throw argument_error("budget must be at least 1");
  s.budget = c.budget;
  s.seed = c.seed;
  s.t_sf1_max = c.t_sf1_max;
  s.mu_b_max = c.mu_b_max;
  s.workers = workers;
  return s;
}

// Writes to `path` or stdout; the file is replaced only after a full render.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw io_error("failed writing '" + path + "'");
}

ordered_json point_json(const StrategyPoint& p) {
  return {{"emit_fraction", p.emit_fraction},
          {"control_fraction", p.control_fraction},
          {"eve_info_per_emitted_bit", p.eve_info_per_emitted_bit},
          {"mu_delivered", p.mu_delivered.is_infinite() ? ordered_json("inf") : ordered_json(p.mu_delivered.value())}};
}

ordered_json attack_json(const AttackParams& a) {
  return {{"t_sf1", a.t_sf1}, {"t_sf2", a.t_sf2}, {"mu_b", a.mu_b.to_string()}, {"mu_e1", a.mu_e1.to_string()},
          {"mu_e2", a.mu_e2.to_string()}};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// --- commands -------------------------------------------------------------

struct CurveFlags {
  std::optional<double> lmin, lmax, lstep;
  std::string overlay;
  std::string svg;
};

int cmd_curve(const RunConfig& c, const CurveFlags& flags, const std::string& out, unsigned workers) {
  CurveSettings s;
  s.channel = channel_of(c);
  s.mode = parse_mode(c.mode);
  if (c.mu_a != "optimize") s.fixed_mu_a = parse_mu_a(c.mu_a);
  s.lengths = c.lengths;
  s.attacks.clear();
  for (const auto& a : c.attacks) s.attacks.push_back(parse_curve_attack(a));
  if (s.attacks.empty()) throw argument_error("no attacks selected");
  s.optimizer = optimizer_of(c, 1);
  s.usd.mu_b_max = c.mu_b_max;
  s.usd.t_sf1_max = c.t_sf1_max;
  s.workers = workers;

  std::vector<OverlayPoint> overlay;
  if (!flags.overlay.empty()) {
    std::ifstream in(flags.overlay);
    if (!in) throw io_error("cannot read overlay '" + flags.overlay + "'");
    overlay = read_overlay_csv(in);
  }

  const auto rows = compute_curves(s);
  std::ostringstream csv;
  write_curve_csv(csv, rows, "config " + to_json(c).dump());
  emit(out, csv.str());
  if (!flags.svg.empty()) {
    std::ostringstream svg;
    write_curve_svg(svg, rows, overlay);
    emit(flags.svg, svg.str());
  }
  return kOk;
}

int cmd_simulate(const RunConfig& c, bool compare, const std::string& trace_path, const std::string& out) {
  const auto protocol = protocol_of(c);
  const auto attack = attack_of(c);
  attack.validate_for(protocol);  // infeasible parameters fail before any work
  if (c.signals < 1) throw argument_error("signals must be at least 1");

  const auto kinds = generate_sequence(c.signals, c.f, c.seed);
  const auto run = run_attack(kinds, protocol, attack, c.seed + 1);
  const auto est = estimate_point(run, attack.mu_b);

  ordered_json j;
  j["config"] = to_json(c);
  j["stats"] = {{"signals_consumed", run.stats.signals_consumed},
                {"signals_emitted", run.stats.signals_emitted},
                {"controls_emitted", run.stats.controls_emitted},
                {"bits_emitted", run.stats.bits_emitted},
                {"eve_info_total", run.stats.eve_info_total},
                {"tuples_completed", run.stats.tuples_completed},
                {"tuples_aborted", run.stats.tuples_aborted},
                {"cycles", est.cycles}};
  j["estimate"] = point_json(est.point);
  j["standard_error"] = {{"emit_fraction", est.standard_error.emit_fraction},
                         {"control_fraction", est.standard_error.control_fraction},
                         {"eve_info_per_emitted_bit", est.standard_error.eve_info_per_emitted_bit}};
  j["structural_visibility"] = structural_visibility_check(kinds, run.fates, attack.t_sf1);
  if (compare) {
    const auto exact = expected_statistics(protocol, attack);
    ordered_json cmp;
    const auto field = [&](const char* name, double mc, double se, double ex) {
      const double z = se > 0.0 ? (mc - ex) / se : (mc == ex ? 0.0 : INFINITY);
      const double rel = ex != 0.0 ? std::abs(mc - ex) / std::abs(ex) : std::abs(mc);
      cmp[name] = {{"analytic", ex}, {"monte_carlo", mc}, {"z", std::isfinite(z) ? ordered_json(z) : ordered_json("inf")},
                   {"relative_error", rel}, {"within_3_se", std::abs(z) <= 3.0}};
    };
    field("emit_fraction", est.point.emit_fraction, est.standard_error.emit_fraction, exact.emit_fraction);
    field("control_fraction", est.point.control_fraction, est.standard_error.control_fraction,
          exact.control_fraction);
    field("eve_info_per_emitted_bit", est.point.eve_info_per_emitted_bit,
          est.standard_error.eve_info_per_emitted_bit, exact.eve_info_per_emitted_bit);
    j["analytic_comparison"] = cmp;
  }
  if (!trace_path.empty()) {
    std::ostringstream t;
    write_trace(t, kinds, run.fates);
    emit(trace_path, t.str());
  }
  emit(out, dump(j));
  return kOk;
}

int cmd_validate(std::size_t samples, const std::string& fault, std::uint64_t seed, const std::string& out) {
  ValidationOptions o;
  o.seed = seed;
  o.unitarity_samples = samples;
  if (fault == "wrong-q2") {
    o.inject_wrong_q2 = true;
  } else if (!fault.empty()) {
    throw argument_error("unknown fault '" + fault + "'");
  }
  const auto checks = run_validation(o);
  bool all = true;
  ordered_json list = ordered_json::array();
  for (const auto& ch : checks) {
    all = all && ch.passed;
    list.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    std::cerr << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
  }
  emit(out, dump({{"passed", all}, {"checks", list}}));
  return all ? kOk : kValidationFailed;
}

int cmd_optimize(const RunConfig& c, const std::string& out, unsigned workers) {
  const auto protocol = protocol_of(c);
  const auto mode = parse_mode(c.mode);
  const auto res = optimize_attack(protocol, mode, optimizer_of(c, workers));
  const auto bs = bs_point(protocol);

  ordered_json comps = ordered_json::array();
  for (const auto& m : res.best.components) {
    ordered_json e{{"weight", m.weight}, {"kind", std::string(to_string(m.kind))}};
    if (m.kind == ComponentKind::Attack) e["attack"] = attack_json(m.attack);
    e["point"] = point_json(m.point);
    comps.push_back(e);
  }
  ordered_json j;
  j["config"] = to_json(c);
  j["feasible"] = res.feasible;
  j["evaluations"] = res.evaluations;
  j["key_rate_bound"] = res.key_rate_bound;
  j["eve_info"] = res.eve_info;
  j["residuals"] = {{"click", res.residuals.click_residual}, {"control", res.residuals.control_residual}};
  j["achieved_point"] = point_json(res.achieved_point);
  j["components"] = comps;
  j["beam_splitter"] = {{"eve_info", bs.eve_info_per_emitted_bit}, {"key_rate", key_rate(protocol, bs)}};
  emit(out, dump(j));
  return res.feasible ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-filtering attack on COW QKD: curves, simulation, validation, optimization"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig flags_cfg;
  std::string config_path;
  std::string out;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string lengths_csv;
  std::string attacks_csv;

  app.add_option("--config", config_path, "JSON config file (flags override it)");
  auto* o_eta = app.add_option("--eta", flags_cfg.eta, "detector efficiency");
  auto* o_delta = app.add_option("--delta", flags_cfg.delta_db_per_km, "fiber attenuation, dB/km");
  auto* o_f = app.add_option("--f", flags_cfg.f, "control-state probability");
  auto* o_mode = app.add_option("--mode", flags_cfg.mode, "statistics to preserve: strict or free");
  auto* o_seed = app.add_option("--seed", flags_cfg.seed, "random seed");
  auto* o_budget = app.add_option("--budget", flags_cfg.budget, "optimizer evaluations per point");
  auto* o_mua = app.add_option("--mu-a", flags_cfg.mu_a, "Alice's mean photon number, or 'optimize' (curve)");
  auto* o_t1max = app.add_option("--t-sf1-max", flags_cfg.t_sf1_max, "largest SF1 block searched");
  auto* o_mbmax = app.add_option("--mu-b-max", flags_cfg.mu_b_max, "largest mu_b searched");
  app.add_option("--out", out, "output file (default stdout)");
  app.add_option("--workers", workers, "worker threads (results do not depend on it)");

  auto* curve = app.add_subcommand("curve", "key rate versus length for sf, bs and usd");
  CurveFlags cf;
  double lmin = 0, lmax = 0, lstep = 0;
  auto* o_lmin = curve->add_option("--lmin", lmin, "first length, km");
  auto* o_lmax = curve->add_option("--lmax", lmax, "last length, km");
  auto* o_lstep = curve->add_option("--lstep", lstep, "length step, km");
  auto* o_lengths = curve->add_option("--lengths", lengths_csv, "comma-separated lengths, km");
  auto* o_attacks = curve->add_option("--attacks", attacks_csv, "comma-separated subset of sf,bs,usd");
  curve->add_option("--overlay", cf.overlay, "CSV with length_km,key_rate,series_label to draw in the chart");
  curve->add_option("--svg", cf.svg, "write a chart here");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo run of one attack");
  bool compare = false;
  std::string trace;
  auto* o_signals = sim->add_option("--signals", flags_cfg.signals, "number of Alice signals");
  auto* o_len = app.add_option("--length", flags_cfg.length_km, "channel length, km (simulate, optimize)");
  auto* o_t1 = sim->add_option("--t-sf1", flags_cfg.t_sf1, "SF1 block length");
  auto* o_t2 = sim->add_option("--t-sf2", flags_cfg.t_sf2, "SF2 trial cap");
  auto* o_mub = sim->add_option("--mu-b", flags_cfg.mu_b, "intensity sent to Bob");
  auto* o_mue1 = sim->add_option("--mu-e1", flags_cfg.mu_e1, "SF1 ancilla intensity (number or inf)");
  auto* o_mue2 = sim->add_option("--mu-e2", flags_cfg.mu_e2, "SF2 ancilla intensity (number or inf)");
  sim->add_flag("--compare-analytic", compare, "compare with the exact expectation");
  sim->add_option("--trace", trace, "per-signal fate dump (TSV)");

  auto* val = app.add_subcommand("validate", "built-in consistency checks");
  std::size_t samples = 1000;
  std::string fault;
  val->add_option("--samples", samples, "random intensity triples per filter stage");
  val->add_option("--inject-fault", fault)->group("");

  auto* opt = app.add_subcommand("optimize", "best soft-filtering attack at one operating point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw io_error("cannot read config '" + config_path + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw argument_error("malformed config '" + config_path + "': " + e.what());
      }
      apply_json(cfg, j);
    }
    const auto given = [](const CLI::Option* o) { return o->count() > 0; };
    if (given(o_eta)) cfg.eta = flags_cfg.eta;
    if (given(o_delta)) cfg.delta_db_per_km = flags_cfg.delta_db_per_km;
    if (given(o_f)) cfg.f = flags_cfg.f;
    if (given(o_mode)) cfg.mode = flags_cfg.mode;
    if (given(o_seed)) cfg.seed = flags_cfg.seed;
    if (given(o_budget)) cfg.budget = flags_cfg.budget;
    if (given(o_mua)) cfg.mu_a = flags_cfg.mu_a;
    if (given(o_t1max)) cfg.t_sf1_max = flags_cfg.t_sf1_max;
    if (given(o_mbmax)) cfg.mu_b_max = flags_cfg.mu_b_max;
    if (given(o_len)) cfg.length_km = flags_cfg.length_km;
    if (given(o_signals)) cfg.signals = flags_cfg.signals;
    if (given(o_t1)) cfg.t_sf1 = flags_cfg.t_sf1;
    if (given(o_t2)) cfg.t_sf2 = flags_cfg.t_sf2;
    if (given(o_mub)) cfg.mu_b = flags_cfg.mu_b;
    if (given(o_mue1)) cfg.mu_e1 = flags_cfg.mu_e1;
    if (given(o_mue2)) cfg.mu_e2 = flags_cfg.mu_e2;
    if (given(o_lengths)) {
      cfg.lengths.clear();
      for (const auto& cell : detail::split_csv_line(lengths_csv)) cfg.lengths.push_back(std::stod(cell));
    } else if (given(o_lmin) || given(o_lmax) || given(o_lstep)) {
      const double a = given(o_lmin) ? lmin : 25.0;
      const double b = given(o_lmax) ? lmax : 250.0;
      const double st = given(o_lstep) ? lstep : 25.0;
      if (!(st > 0.0) || b < a) throw argument_error("length grid needs lstep > 0 and lmax >= lmin");
      cfg.lengths.clear();
      for (int k = 0; a + k * st <= b + 1e-9 * st; ++k) cfg.lengths.push_back(a + k * st);
    }
    if (given(o_attacks)) cfg.attacks = detail::split_csv_line(attacks_csv);
    parse_mode(cfg.mode);

    if (curve->parsed()) return cmd_curve(cfg, cf, out, workers);
    if (sim->parsed()) {
      if (cfg.mu_a == "optimize") cfg.mu_a = "0.5";
      return cmd_simulate(cfg, compare, trace, out);
    }
    if (val->parsed()) return cmd_validate(samples, fault, cfg.seed, out);
    if (opt->parsed()) {
      if (cfg.mu_a == "optimize") throw argument_error("optimize needs a numeric --mu-a");
      return cmd_optimize(cfg, out, workers);
    }
  } catch (const infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
