#pragma once

// Reference attacks, Bob's expected statistics and the key-rate model.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cowsf/analytic.hpp"
#include "cowsf/errors.hpp"
#include "cowsf/photonics.hpp"
#include "cowsf/simulator.hpp"
#include "cowsf/strategy_point.hpp"

namespace cowsf {

enum class StatisticsMode {
  StrictStatistics,  ///< preserve click rate and control fraction
  FreeStatistics,    ///< preserve click rate only
};

struct ConstraintResiduals {
  double click_residual = 0.0;
  double control_residual = 0.0;

  bool satisfied(double tolerance = 1e-4) const noexcept {
    return std::abs(click_residual) <= tolerance && std::abs(control_residual) <= tolerance;
  }
};

/// Fiber and detector parameters shared across an intensity scan.
struct ChannelParams {
  double eta = 0.1;
  double delta_db_per_km = 0.25;
  double f = 0.1;

  ProtocolParams with(MeanPhotonNumber mu_a, double length_km) const {
    ProtocolParams p;
    p.mu_a = mu_a;
    p.f = f;
    p.eta = eta;
    p.delta_db_per_km = delta_db_per_km;
    p.length_km = length_km;
    return p;
  }
};

/// Bob's per-signal data-line click probability without Eve: 1 - e^{-eta t mu_a}.
inline double bob_reference_click_rate(const ProtocolParams& protocol) {
  const double t = transmittance(protocol);
  if (protocol.mu_a.is_infinite()) return click_probability(protocol.eta, MeanPhotonNumber::infinite());
  return click_probability(protocol.eta, MeanPhotonNumber(t * protocol.mu_a.value()));
}

/// Clicks per consumed signal when Eve forwards emit_fraction pulses of
/// intensity mu_delivered over a lossless line.
inline double strategy_click_rate(const StrategyPoint& point, const ProtocolParams& protocol) {
  return point.emit_fraction * click_probability(protocol.eta, point.mu_delivered);
}

inline ConstraintResiduals constraint_residuals(const StrategyPoint& point, const ProtocolParams& protocol,
                                                StatisticsMode mode) {
  ConstraintResiduals r;
  r.click_residual = strategy_click_rate(point, protocol) - bob_reference_click_rate(protocol);
  r.control_residual = mode == StatisticsMode::StrictStatistics ? point.control_fraction - protocol.f : 0.0;
  return r;
}

/// Beam-splitting attack: Eve keeps the (1-t) fraction of every pulse and
/// forwards the rest on a lossless line.
inline StrategyPoint bs_point(const ProtocolParams& protocol) {
  protocol.validate();
  const double t = transmittance(protocol);
  StrategyPoint pt;
  pt.emit_fraction = 1.0;
  pt.control_fraction = protocol.f;
  pt.mu_delivered = MeanPhotonNumber(t * protocol.mu_a.value());
  pt.eve_info_per_emitted_bit = holevo_binary(MeanPhotonNumber((1.0 - t) * protocol.mu_a.value()));
  return pt;
}

/// No attack: Bob sees the honest channel and Eve learns nothing.
inline StrategyPoint passthrough_point(const ProtocolParams& protocol) {
  StrategyPoint pt = bs_point(protocol);
  pt.eve_info_per_emitted_bit = 0.0;
  return pt;
}

/// Eve blocks everything.
inline StrategyPoint block_all_point() { return StrategyPoint{0.0, 0.0, 0.0, MeanPhotonNumber(0.0)}; }

inline bool is_usd_like(const AttackParams& attack) noexcept {
  return attack.mu_e1.is_infinite() && attack.mu_e2.is_infinite() && attack.t_sf2 == 1;
}

/// Soft-filtering attack in its full-information limit: infinite Eve
/// intensities and a single SF2 trial.
inline StrategyPoint usd_like_point(const ProtocolParams& protocol, const AttackParams& attack) {
  if (!is_usd_like(attack)) throw argument_error("USD-like attack needs mu_e1 = mu_e2 = inf and t_sf2 = 1");
  return expected_statistics(protocol, attack);
}

/// Secret bits per Alice signal under a zero-error attack: Bob's clicks on
/// delivered bit signals times the fraction Eve does not know,
///   R = emit (1 - control_fraction) (1 - e^{-eta mu_delivered}) (1 - I_E).
/// At control_fraction = f this is (1-f) * click_rate * (1 - I_E).
inline double key_rate(const ProtocolParams& protocol, const StrategyPoint& point) {
  const double bit_clicks =
      point.emit_fraction * (1.0 - point.control_fraction) * click_probability(protocol.eta, point.mu_delivered);
  return std::max(0.0, bit_clicks * (1.0 - point.eve_info_per_emitted_bit));
}

struct UsdSearchSettings {
  double mu_a_min = 1e-9;
  double mu_a_max = 1.0;
  double mu_b_max = 1.0;
  int mu_b_points = 40;
  int t_sf1_max = 4;
  int bisection_steps = 50;
};

/// Whether some convex mixture of USD-like points (mu_b on a log grid,
/// t_sf1 = 0..t_sf1_max; t_sf1 = 0 only in free mode) reaches Bob's click
/// rate. Strict mode also balances the delivered control fraction at f;
/// Eve can always shed clicks by blocking, so ">=" suffices.
inline bool usd_like_feasible(const ProtocolParams& protocol, StatisticsMode mode, const UsdSearchSettings& s = {}) {
  const double ref = bob_reference_click_rate(protocol);
  const int t1_max = mode == StatisticsMode::FreeStatistics ? 0 : s.t_sf1_max;
  struct Col {
    double clicks;
    double control_excess;
  };
  std::vector<Col> cols;
  const double lo = s.mu_b_max * 1e-4;
  for (int t1 = 0; t1 <= t1_max; ++t1) {
    for (int i = 0; i < s.mu_b_points; ++i) {
      const double frac = s.mu_b_points == 1 ? 1.0 : static_cast<double>(i) / (s.mu_b_points - 1);
      AttackParams a;
      a.t_sf1 = t1;
      a.t_sf2 = 1;
      a.mu_b = MeanPhotonNumber(lo * std::pow(s.mu_b_max / lo, frac));
      const StrategyPoint pt = usd_like_point(protocol, a);
      cols.push_back({strategy_click_rate(pt, protocol), pt.emit_fraction * (pt.control_fraction - protocol.f)});
    }
  }
  double best = 0.0;
  if (mode == StatisticsMode::FreeStatistics) {
    for (const auto& c : cols) best = std::max(best, c.clicks);
    return best >= ref;
  }
  // One equality plus the simplex constraint: the optimum uses at most two columns.
  for (const auto& c : cols) {
    if (c.control_excess == 0.0) best = std::max(best, c.clicks);
  }
  for (const auto& a : cols) {
    if (!(a.control_excess > 0.0)) continue;
    for (const auto& b : cols) {
      if (!(b.control_excess < 0.0)) continue;
      const double w = -b.control_excess / (a.control_excess - b.control_excess);
      best = std::max(best, w * a.clicks + (1.0 - w) * b.clicks);
    }
  }
  return best >= ref;
}

enum class ThresholdStatus {
  Found,           ///< feasible for mu_a >= value, not below
  NoneFeasible,    ///< infeasible everywhere in the bracket
  AllFeasible,     ///< feasible already at the bracket's lower end
};

struct ThresholdResult {
  ThresholdStatus status = ThresholdStatus::NoneFeasible;
  double mu_a = 0.0;  ///< threshold (Found), bracket end otherwise
};

/// Smallest Alice intensity from which the USD-like attack can match Bob's
/// statistics, so Eve can read every delivered tuple. Alice has to stay
/// below it. Bisection in log mu_a.
inline ThresholdResult usd_feasibility_threshold(const ChannelParams& channel, double length_km, StatisticsMode mode,
                                                 const UsdSearchSettings& s = {}) {
  const auto feasible = [&](double mu) {
    return usd_like_feasible(channel.with(MeanPhotonNumber(mu), length_km), mode, s);
  };
  if (!feasible(s.mu_a_max)) return {ThresholdStatus::NoneFeasible, s.mu_a_max};
  if (feasible(s.mu_a_min)) return {ThresholdStatus::AllFeasible, s.mu_a_min};
  double lo = s.mu_a_min;
  double hi = s.mu_a_max;
  for (int i = 0; i < s.bisection_steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return {ThresholdStatus::Found, hi};
}

}  // namespace cowsf
