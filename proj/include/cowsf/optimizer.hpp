#pragma once

// Attack search: a seeded grid over the five attack parameters, local
// Nelder-Mead refinement driven by LP duals, and a convex mixture closure.
//
// The mixture LP minimises the key rate Bob and Alice would be left with,
//   min sum_i w_i key_i  s.t.  sum w = 1,  sum w clicks_i = ref,
//                              (strict) sum w emit_i (cf_i - f) = 0.
// A basic optimum has at most three nonzero weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "cowsf/analytic.hpp"
#include "cowsf/errors.hpp"
#include "cowsf/photonics.hpp"
#include "cowsf/simplex.hpp"
#include "cowsf/simulator.hpp"
#include "cowsf/strategies.hpp"
#include "cowsf/strategy_point.hpp"

namespace cowsf {

enum class ComponentKind { Attack, BeamSplitter, BlockAll };

constexpr std::string_view to_string(ComponentKind kind) noexcept {
  switch (kind) {
    case ComponentKind::Attack:
      return "attack";
    case ComponentKind::BeamSplitter:
      return "beam_splitter";
    case ComponentKind::BlockAll:
      return "block_all";
  }
  return "?";
}

struct MixtureComponent {
  double weight = 0.0;
  ComponentKind kind = ComponentKind::Attack;
  AttackParams attack{};  ///< meaningful for ComponentKind::Attack only
  StrategyPoint point{};
};

struct MixedStrategy {
  std::vector<MixtureComponent> components;

  void validate() const {
    if (components.empty() || components.size() > 3) throw argument_error("mixture needs 1 to 3 components");
    double sum = 0.0;
    for (const auto& c : components) {
      if (!(c.weight >= 0.0)) throw argument_error("mixture weight must be non-negative");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw argument_error("mixture weights must sum to 1");
  }
};

struct WeightedPoint {
  double weight = 0.0;
  StrategyPoint point{};
};

/// Per-consumed-signal averaging. Emission, controls and clicks add up
/// linearly; the delivered intensity is the one reproducing the summed click
/// rate, and Eve's information is weighted by clicks on bit signals.
inline StrategyPoint mixture_combine(std::span<const WeightedPoint> parts, double eta) {
  if (parts.empty()) throw argument_error("mixture_combine: empty list");
  double wsum = 0.0;
  double emitted = 0.0;
  double controls = 0.0;
  double clicks = 0.0;
  double bit_clicks = 0.0;
  double info = 0.0;
  for (const auto& [w, pt] : parts) {
    if (!(w >= 0.0)) throw argument_error("mixture_combine: negative weight");
    wsum += w;
    const double c = click_probability(eta, pt.mu_delivered);
    emitted += w * pt.emit_fraction;
    controls += w * pt.emit_fraction * pt.control_fraction;
    clicks += w * pt.emit_fraction * c;
    bit_clicks += w * pt.emit_fraction * (1.0 - pt.control_fraction) * c;
    info += w * pt.emit_fraction * (1.0 - pt.control_fraction) * c * pt.eve_info_per_emitted_bit;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw argument_error("mixture_combine: weights must sum to 1");

  StrategyPoint out;
  out.emit_fraction = emitted;
  out.control_fraction = emitted > 0.0 ? controls / emitted : 0.0;
  out.eve_info_per_emitted_bit = bit_clicks > 0.0 ? info / bit_clicks : 0.0;
  if (emitted > 0.0 && clicks > 0.0) {
    const double per_pulse = std::min(clicks / emitted, 1.0);
    out.mu_delivered = per_pulse >= 1.0 ? MeanPhotonNumber::infinite()
                                        : MeanPhotonNumber(-std::log1p(-per_pulse) / eta);
  }
  return out;
}

struct OptimizerSettings {
  std::size_t budget = 20000;
  std::uint64_t seed = 1;
  bool include_beam_splitter = true;
  int t_sf1_max = 4;  ///< ignored (pinned to 0) in free mode
  std::vector<int> t_sf2_grid{1, 2, 4, 8, 16, 64, 256};
  int mu_b_points = 10;
  double mu_b_max = 1.0;
  std::vector<double> mu_e_offsets{0.0, 0.01, 0.05, 0.2, 0.5, 1.0, 3.0, std::numeric_limits<double>::infinity()};
  int refine_rounds = 8;
  int refine_starts = 4;
  int nm_max_evals = 60;
  unsigned workers = 1;  ///< threads for the grid phase
};

struct OptimizationResult {
  bool feasible = false;
  MixedStrategy best;
  StrategyPoint achieved_point{};
  ConstraintResiduals residuals{};
  /// 1 - key_rate_bound / ((1-f) ref): Eve's share of the key Bob would
  /// otherwise distil. Equals chi_BS for the beam-splitting point.
  double eve_info = 0.0;
  double key_rate_bound = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

struct Candidate {
  ComponentKind kind = ComponentKind::Attack;
  AttackParams attack{};
  StrategyPoint point{};
  double clicks = 0.0;
  double control_excess = 0.0;
  double key = 0.0;
};

inline Candidate make_candidate(const ProtocolParams& protocol, ComponentKind kind, const AttackParams& attack,
                                const StrategyPoint& pt) {
  Candidate c;
  c.kind = kind;
  c.attack = attack;
  c.point = pt;
  c.clicks = strategy_click_rate(pt, protocol);
  c.control_excess = pt.emit_fraction * (pt.control_fraction - protocol.f);
  c.key = key_rate(protocol, pt);
  return c;
}

inline std::optional<Candidate> evaluate_attack(const ProtocolParams& protocol, const AttackParams& attack) {
  try {
    return make_candidate(protocol, ComponentKind::Attack, attack, expected_statistics(protocol, attack));
  } catch (const infeasible_error&) {
    return std::nullopt;
  } catch (const degenerate_stage_error&) {
    return std::nullopt;
  }
}

inline MeanPhotonNumber offset_intensity(double mu_a, double mu_b, double offset) {
  if (std::isinf(offset)) return MeanPhotonNumber::infinite();
  return MeanPhotonNumber(std::max(0.0, mu_a - mu_b) + offset);
}

inline double mu_b_floor(const ProtocolParams& protocol, const OptimizerSettings& s) {
  const double honest = transmittance(protocol) * protocol.mu_a.value();
  return std::min(0.5 * honest, 0.5 * s.mu_b_max);
}

inline std::vector<AttackParams> attack_grid(const ProtocolParams& protocol, StatisticsMode mode,
                                             const OptimizerSettings& s) {
  const double mu_a = protocol.mu_a.value();
  const double lo = mu_b_floor(protocol, s);
  const int t1_max = mode == StatisticsMode::FreeStatistics ? 0 : s.t_sf1_max;
  std::vector<double> mu_bs;
  for (int i = 0; i < s.mu_b_points; ++i) {
    const double frac = s.mu_b_points == 1 ? 1.0 : static_cast<double>(i) / (s.mu_b_points - 1);
    mu_bs.push_back(lo * std::pow(s.mu_b_max / lo, frac));
  }
  std::vector<AttackParams> grid;
  for (int t1 = 0; t1 <= t1_max; ++t1) {
    for (const int t2 : s.t_sf2_grid) {
      for (const double mb : mu_bs) {
        const auto e1_list = t1 == 0 ? std::vector<double>{std::numeric_limits<double>::infinity()} : s.mu_e_offsets;
        for (const double d1 : e1_list) {
          for (const double d2 : s.mu_e_offsets) {
            AttackParams a;
            a.t_sf1 = t1;
            a.t_sf2 = t2;
            a.mu_b = MeanPhotonNumber(mb);
            a.mu_e1 = offset_intensity(mu_a, mb, d1);
            a.mu_e2 = offset_intensity(mu_a, mb, d2);
            grid.push_back(a);
          }
        }
      }
    }
  }
  return grid;
}

// Fisher-Yates with an explicit draw so the order is the same on every
// standard library.
inline void seeded_shuffle(std::vector<AttackParams>& v, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(v[i - 1], v[j]);
  }
}

struct LpOutcome {
  LpResult lp;
  std::vector<double> scaled_cost;
};

class MixtureProblem {
 public:
  MixtureProblem(const ProtocolParams& protocol, StatisticsMode mode) : protocol_(protocol), mode_(mode) {
    ref_ = bob_reference_click_rate(protocol);
    key_scale_ = std::max((1.0 - protocol.f) * ref_, 1e-300);
  }

  LpResult solve(const std::vector<Candidate>& cols) const {
    const std::size_t n = cols.size();
    std::vector<double> cost(n);
    std::vector<std::vector<double>> rows(strict() ? 3 : 2, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
      cost[j] = cols[j].key / key_scale_;
      rows[0][j] = 1.0;
      rows[1][j] = cols[j].clicks / ref_;
      if (strict()) rows[2][j] = cols[j].control_excess;
    }
    std::vector<double> rhs(rows.size(), 0.0);
    rhs[0] = 1.0;
    rhs[1] = 1.0;
    return solve_lp(cost, rows, rhs);
  }

  double reduced_cost(const Candidate& c, const std::vector<double>& duals) const {
    double rc = c.key / key_scale_ - duals[0] - duals[1] * c.clicks / ref_;
    if (strict()) rc -= duals[2] * c.control_excess;
    return rc;
  }

  double key_scale() const noexcept { return key_scale_; }

 private:
  bool strict() const noexcept { return mode_ == StatisticsMode::StrictStatistics; }

  ProtocolParams protocol_;
  StatisticsMode mode_;
  double ref_ = 0.0;
  double key_scale_ = 1.0;
};

// Maps an unconstrained Nelder-Mead vector to attack parameters around a
// fixed (t_sf1, t_sf2) cell: x = (log mu_b, u2 [, u1]), offset = u / (1-u).
class RefinementMap {
 public:
  RefinementMap(const ProtocolParams& protocol, const OptimizerSettings& s, int t1, int t2)
      : mu_a_(protocol.mu_a.value()),
        log_lo_(std::log(mu_b_floor(protocol, s) * 0.1)),
        log_hi_(std::log(s.mu_b_max)),
        t1_(t1),
        t2_(t2) {}

  std::size_t dims() const noexcept { return t1_ == 0 ? 2 : 3; }

  std::vector<double> encode(const AttackParams& a) const {
    const double mb = a.mu_b.value();
    std::vector<double> x{std::log(mb), to_u(a.mu_e2, mb)};
    if (t1_ > 0) x.push_back(to_u(a.mu_e1, mb));
    return x;
  }

  AttackParams decode(const std::vector<double>& x) const {
    AttackParams a;
    a.t_sf1 = t1_;
    a.t_sf2 = t2_;
    const double mb = std::exp(std::clamp(x[0], log_lo_, log_hi_));
    a.mu_b = MeanPhotonNumber(mb);
    a.mu_e2 = offset_intensity(mu_a_, mb, to_offset(x[1]));
    a.mu_e1 = t1_ == 0 ? MeanPhotonNumber::infinite() : offset_intensity(mu_a_, mb, to_offset(x[2]));
    return a;
  }

  std::vector<double> steps(const std::vector<double>& x) const {
    std::vector<double> st(x.size());
    st[0] = x[0] + 0.3 > log_hi_ ? -0.3 : 0.3;
    for (std::size_t i = 1; i < x.size(); ++i) st[i] = x[i] + 0.1 > 1.0 ? -0.1 : 0.1;
    return st;
  }

 private:
  double to_u(MeanPhotonNumber mu_e, double mb) const {
    if (mu_e.is_infinite()) return 1.0;
    const double d = std::max(0.0, mu_e.value() - std::max(0.0, mu_a_ - mb));
    return d / (1.0 + d);
  }

  static double to_offset(double u) {
    u = std::clamp(u, 0.0, 1.0);
    if (u >= 1.0 - 1e-9) return std::numeric_limits<double>::infinity();
    return u / (1.0 - u);
  }

  double mu_a_;
  double log_lo_;
  double log_hi_;
  int t1_;
  int t2_;
};

// Plain Nelder-Mead; `eval` returns nullopt once the budget is spent.
inline void nelder_mead(const std::function<std::optional<double>(const std::vector<double>&)>& eval,
                        std::vector<double> x0, const std::vector<double>& steps, int max_evals) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts{x0};
  for (std::size_t i = 0; i < d; ++i) {
    auto p = x0;
    p[i] += steps[i];
    pts.push_back(p);
  }
  std::vector<double> vals;
  int used = 0;
  auto call = [&](const std::vector<double>& x) -> std::optional<double> {
    if (used >= max_evals) return std::nullopt;
    ++used;
    return eval(x);
  };
  for (const auto& p : pts) {
    const auto v = call(p);
    if (!v) return;
    vals.push_back(*v);
  }
  std::vector<std::size_t> order(d + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[d - 1];
    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < d; ++i) centroid[i] += pts[order[k]][i] / static_cast<double>(d);
    }
    auto along = [&](double coef) {
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
      return p;
    };
    const auto xr = along(-1.0);
    const auto fr = call(xr);
    if (!fr) return;
    if (*fr < vals[best]) {
      const auto xe = along(-2.0);
      const auto fe = call(xe);
      if (!fe) return;
      if (*fe < *fr) {
        pts[worst] = xe;
        vals[worst] = *fe;
      } else {
        pts[worst] = xr;
        vals[worst] = *fr;
      }
      continue;
    }
    if (*fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = *fr;
      continue;
    }
    const bool outside = *fr < vals[worst];
    const auto xc = along(outside ? -0.5 : 0.5);
    const auto fc = call(xc);
    if (!fc) return;
    if (*fc < (outside ? *fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = *fc;
      continue;
    }
    for (std::size_t k = 1; k <= d; ++k) {
      auto& p = pts[order[k]];
      for (std::size_t i = 0; i < d; ++i) p[i] = pts[best][i] + 0.5 * (p[i] - pts[best][i]);
      const auto v = call(p);
      if (!v) return;
      vals[order[k]] = *v;
    }
  }
}

inline std::vector<std::optional<Candidate>> evaluate_all(const ProtocolParams& protocol,
                                                          const std::vector<AttackParams>& attacks,
                                                          unsigned workers) {
  std::vector<std::optional<Candidate>> out(attacks.size());
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(attacks.size())));
  if (n == 1) {
    for (std::size_t i = 0; i < attacks.size(); ++i) out[i] = evaluate_attack(protocol, attacks[i]);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < attacks.size(); i += n) out[i] = evaluate_attack(protocol, attacks[i]);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace detail

/// Searches soft-filtering attacks (and their mixtures with beam splitting
/// and blocking) for the lowest key rate compatible with Bob's statistics.
/// With budget b the evaluated attacks are the first b of a fixed sequence,
/// so a larger budget never gives a worse bound.
inline OptimizationResult optimize_attack(const ProtocolParams& protocol, StatisticsMode mode,
                                          const OptimizerSettings& s = {}) {
  protocol.validate();
  if (protocol.mu_a.is_infinite() || protocol.mu_a.value() <= 0.0) throw argument_error("optimizer needs 0 < mu_a < inf");
  if (s.budget < 1) throw argument_error("optimizer budget must be at least 1");

  std::vector<detail::Candidate> cols;
  cols.push_back(detail::make_candidate(protocol, ComponentKind::BlockAll, {}, block_all_point()));
  if (s.include_beam_splitter) {
    cols.push_back(detail::make_candidate(protocol, ComponentKind::BeamSplitter, {}, bs_point(protocol)));
  }

  std::size_t evaluations = 0;
  auto grid = detail::attack_grid(protocol, mode, s);
  detail::seeded_shuffle(grid, s.seed);
  if (grid.size() > s.budget) grid.resize(s.budget);
  for (auto& c : detail::evaluate_all(protocol, grid, s.workers)) {
    ++evaluations;
    if (c) cols.push_back(std::move(*c));
  }

  const detail::MixtureProblem problem(protocol, mode);
  LpResult lp = problem.solve(cols);

  std::vector<bool> started(cols.size(), false);
  for (int round = 0; round < s.refine_rounds && evaluations < s.budget && lp.status == LpStatus::Optimal; ++round) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].kind == ComponentKind::Attack && !started[j]) order.push_back(j);
    }
    std::vector<double> rc(cols.size());
    for (const std::size_t j : order) rc[j] = problem.reduced_cost(cols[j], lp.duals);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rc[a] < rc[b]; });
    if (order.size() > static_cast<std::size_t>(s.refine_starts)) order.resize(s.refine_starts);
    if (order.empty()) break;

    for (const std::size_t j : order) {
      started[j] = true;
      const AttackParams start = cols[j].attack;
      const detail::RefinementMap map(protocol, s, start.t_sf1, start.t_sf2);
      const auto eval = [&](const std::vector<double>& x) -> std::optional<double> {
        if (evaluations >= s.budget) return std::nullopt;
        ++evaluations;
        const auto c = detail::evaluate_attack(protocol, map.decode(x));
        if (!c) return std::numeric_limits<double>::infinity();
        cols.push_back(*c);
        started.push_back(false);
        return problem.reduced_cost(*c, lp.duals);
      };
      const auto x0 = map.encode(start);
      detail::nelder_mead(eval, x0, map.steps(x0), s.nm_max_evals);
      if (evaluations >= s.budget) break;
    }
    lp = problem.solve(cols);
  }

  OptimizationResult res;
  res.evaluations = evaluations;
  const double ref = bob_reference_click_rate(protocol);
  if (lp.status != LpStatus::Optimal) {
    // Report the single candidate closest to Bob's statistics.
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto& c : cols) {
      const auto r = constraint_residuals(c.point, protocol, mode);
      const double err = std::max(std::abs(r.click_residual), std::abs(r.control_residual));
      if (err < best_err) {
        best_err = err;
        res.best.components = {{1.0, c.kind, c.attack, c.point}};
        res.achieved_point = c.point;
        res.residuals = r;
        res.key_rate_bound = c.key;
      }
    }
    res.feasible = false;
    res.eve_info = ref > 0.0 ? 1.0 - res.key_rate_bound / ((1.0 - protocol.f) * ref) : 0.0;
    return res;
  }

  double wsum = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (lp.x[j] > 0.0) wsum += lp.x[j];
  }
  std::vector<WeightedPoint> parts;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (!(lp.x[j] > 0.0)) continue;
    const double w = lp.x[j] / wsum;
    res.best.components.push_back({w, cols[j].kind, cols[j].attack, cols[j].point});
    parts.push_back({w, cols[j].point});
    res.key_rate_bound += w * cols[j].key;
  }
  res.achieved_point = mixture_combine(parts, protocol.eta);
  res.residuals = constraint_residuals(res.achieved_point, protocol, mode);
  res.eve_info = 1.0 - res.key_rate_bound / problem.key_scale();
  res.feasible = true;
  return res;
}

struct IntensitySearch {
  double mu_min = 1e-3;  ///< multiplied by the transmittance
  double mu_max = 1.0;
  int grid_points = 25;
  int golden_steps = 12;
};

struct IntensityOptimum {
  double mu_a = 0.0;
  double value = 0.0;
};

/// Maximises `objective` over mu in (0, mu_max]: log grid, then golden
/// section on the bracket around the best grid point. Returns the best
/// point actually evaluated.
inline IntensityOptimum maximize_intensity(const std::function<double(double)>& objective, double mu_lo, double mu_hi,
                                           int grid_points, int golden_steps) {
  if (!(mu_lo > 0.0) || !(mu_hi >= mu_lo) || grid_points < 1) throw argument_error("bad intensity bracket");
  std::vector<double> xs;
  for (int i = 0; i < grid_points; ++i) {
    const double frac = grid_points == 1 ? 1.0 : static_cast<double>(i) / (grid_points - 1);
    xs.push_back(mu_lo * std::pow(mu_hi / mu_lo, frac));
  }
  IntensityOptimum best{xs.front(), -std::numeric_limits<double>::infinity()};
  std::size_t arg = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = objective(xs[i]);
    if (v > best.value) {
      best = {xs[i], v};
      arg = i;
    }
  }
  if (xs.size() < 3) return best;
  double a = std::log(xs[arg == 0 ? 0 : arg - 1]);
  double b = std::log(xs[std::min(arg + 1, xs.size() - 1)]);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = objective(std::exp(c));
  double fd = objective(std::exp(d));
  auto consider = [&](double x, double v) {
    if (v > best.value) best = {std::exp(x), v};
  };
  consider(c, fc);
  consider(d, fd);
  for (int i = 0; i < golden_steps; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(std::exp(c));
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(std::exp(d));
      consider(d, fd);
    }
  }
  return best;
}

struct AliceOptimum {
  MeanPhotonNumber mu_a{};
  double key_rate = 0.0;
  OptimizationResult attack{};
};

/// Alice's best intensity against the optimized soft-filtering attack.
inline AliceOptimum optimal_alice_intensity(const ChannelParams& channel, double length_km, StatisticsMode mode,
                                            const OptimizerSettings& s = {}, const IntensitySearch& search = {}) {
  const double t = transmittance(channel.delta_db_per_km, length_km);
  const double lo = std::min(search.mu_min * t, search.mu_max);
  const auto objective = [&](double mu) {
    return optimize_attack(channel.with(MeanPhotonNumber(mu), length_km), mode, s).key_rate_bound;
  };
  const auto best = maximize_intensity(objective, lo, search.mu_max, search.grid_points, search.golden_steps);
  AliceOptimum out;
  out.mu_a = MeanPhotonNumber(best.mu_a);
  out.attack = optimize_attack(channel.with(out.mu_a, length_km), mode, s);
  out.key_rate = out.attack.key_rate_bound;
  return out;
}

/// Alice's best intensity when Eve only has the beam-splitting attack.
inline AliceOptimum optimal_bs_intensity(const ChannelParams& channel, double length_km,
                                         const IntensitySearch& search = {.grid_points = 200, .golden_steps = 40}) {
  const double t = transmittance(channel.delta_db_per_km, length_km);
  const double lo = std::min(search.mu_min * t, search.mu_max);
  const auto objective = [&](double mu) {
    const auto p = channel.with(MeanPhotonNumber(mu), length_km);
    return key_rate(p, bs_point(p));
  };
  const auto best = maximize_intensity(objective, lo, search.mu_max, search.grid_points, search.golden_steps);
  AliceOptimum out;
  out.mu_a = MeanPhotonNumber(best.mu_a);
  out.key_rate = best.value;
  return out;
}

}  // namespace cowsf
