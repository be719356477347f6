#pragma once

// Exact long-run statistics of the attack as a renewal-reward process.
//
// expected_statistics() folds the cycle into geometric sums and two linear
// recursions; enumerate_small() walks every outcome path of a cycle with its
// weight and serves as the independent check on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "cowsf/errors.hpp"
#include "cowsf/photonics.hpp"
#include "cowsf/simulator.hpp"
#include "cowsf/soft_filter.hpp"
#include "cowsf/strategy_point.hpp"

namespace cowsf {

/// Expected per-cycle tallies of the attack.
///
/// With s = (1-f) Z the search consumes 1/s signals (opening included). The
/// SF1 block survives with P1^t1, P1 = (1-f) p1 + f q1, and then holds t1
/// signals that are controls with probability pd1 = f q1 / P1. SF2 successes
/// K are truncated-geometric in P2; each is a control w.p. pd2. The closing
/// search hits at the j-th success from the right with probability
/// (1-r)^{j-1} r, r = (1 - pd2) V, leaving K - j delivered SF2 signals whose
/// kinds are still i.i.d. With A_k = 1 - (1-r)^k and
/// B_k = sum_j (1-r)^{j-1} r (k - j), B_{k+1} = r k + (1 - r) B_k.
inline CycleExpectations expected_cycle(const ProtocolParams& protocol, const AttackParams& attack) {
  const AttackKernel k = AttackKernel::make(protocol, attack);
  const double f = protocol.f;

  const double s = (1.0 - f) * k.search_success;
  const double p1 = (1.0 - f) * k.sf1.p_info + f * k.sf1.q_control;
  const double pd1 = p1 > 0.0 ? f * k.sf1.q_control / p1 : 0.0;
  const double p2 = (1.0 - f) * k.sf2.p_info + f * k.sf2.q_control;
  const double pd2 = p2 > 0.0 ? f * k.sf2.q_control / p2 : 0.0;
  const double r = (1.0 - pd2) * k.closing_success;
  const double u = 1.0 - r;

  double sf1_consumed = 0.0;
  double survive = 1.0;
  for (int j = 0; j < k.t_sf1; ++j) {
    sf1_consumed += survive;
    survive *= p1;
  }

  const double t1 = static_cast<double>(k.t_sf1);
  double sf2_consumed = 0.0;
  double closed = 0.0;         // sum_k P(K=k) A_k
  double sf2_delivered = 0.0;  // sum_k P(K=k) B_k
  double reach = 1.0;          // P(K >= k)
  double u_pow = 1.0;          // u^k
  double b = 0.0;              // B_k
  for (int kk = 0; kk <= k.t_sf2; ++kk) {
    const double pk = kk < k.t_sf2 ? reach * (1.0 - p2) : reach;
    sf2_consumed += pk * (kk < k.t_sf2 ? kk + 1.0 : static_cast<double>(kk));
    closed += pk * (1.0 - u_pow);
    sf2_delivered += pk * b;
    b = r * kk + u * b;
    u_pow *= u;
    reach *= p2;
  }

  CycleExpectations e;
  e.consumed = 1.0 / s + sf1_consumed + survive * sf2_consumed;
  e.emitted = survive * (closed * (1.0 + t1) + sf2_delivered);
  e.controls = survive * (closed * t1 * pd1 + sf2_delivered * pd2);
  e.eve_info = survive * (closed * (0.5 + k.chi1 * t1 * (1.0 - pd1)) + sf2_delivered * k.chi2 * (1.0 - pd2));
  return e;
}

inline StrategyPoint expected_statistics(const ProtocolParams& protocol, const AttackParams& attack) {
  return expected_cycle(protocol, attack).to_point(attack.mu_b);
}

struct EnumerationResult {
  StrategyPoint point;
  CycleExpectations cycle;
  double residual_mass = 0.0;  ///< probability of cycles longer than the cap
};

namespace detail {

struct TuplePath {
  double weight = 0.0;
  std::size_t length = 0;  // signals consumed after the opening
  double emitted = 0.0;
  double controls = 0.0;
  double eve_info = 0.0;
};

// Depth-first walk of every tuple-attempt outcome, branching on signal kind
// and draw result exactly as the state machine does.
class TupleEnumerator {
 public:
  TupleEnumerator(const AttackKernel& k, double f) : k_(k), f_(f) {}

  std::vector<TuplePath> run() {
    for (const double coin : {1.0, 0.0}) sf1_step(0.5, 0, 0, 0, coin);
    return std::move(paths_);
  }

 private:
  void emit(double w, std::size_t len, double emitted, double controls, double info) {
    if (w > 0.0) paths_.push_back({w, len, emitted, controls, info});
  }

  void sf1_step(double w, int done, int ctrl, int bits, double coin) {
    if (w == 0.0) return;
    const std::size_t len = static_cast<std::size_t>(done);
    if (done == k_.t_sf1) {
      sf2_step(w, len, ctrl, bits, coin, {});
      return;
    }
    // control / bit, success / failure
    sf1_step(w * f_ * k_.sf1.q_control, done + 1, ctrl + 1, bits, coin);
    sf1_step(w * (1.0 - f_) * k_.sf1.p_info, done + 1, ctrl, bits + 1, coin);
    emit(w * (f_ * (1.0 - k_.sf1.q_control) + (1.0 - f_) * (1.0 - k_.sf1.p_info)), len + 1, 0, 0, 0);
  }

  void sf2_step(double w, std::size_t len, int sf1_ctrl, int sf1_bits, double coin, std::vector<bool> run) {
    if (w == 0.0) return;
    if (static_cast<int>(run.size()) == k_.t_sf2) {
      closing(w, len, sf1_ctrl, sf1_bits, coin, run, run.size());
      return;
    }
    auto with_ctrl = run;
    with_ctrl.push_back(true);
    sf2_step(w * f_ * k_.sf2.q_control, len + 1, sf1_ctrl, sf1_bits, coin, std::move(with_ctrl));
    auto with_bit = run;
    with_bit.push_back(false);
    sf2_step(w * (1.0 - f_) * k_.sf2.p_info, len + 1, sf1_ctrl, sf1_bits, coin, std::move(with_bit));
    const double fail = f_ * (1.0 - k_.sf2.q_control) + (1.0 - f_) * (1.0 - k_.sf2.p_info);
    closing(w * fail, len + 1, sf1_ctrl, sf1_bits, coin, run, run.size());
  }

  // Examine run[pos-1], moving left.
  void closing(double w, std::size_t len, int sf1_ctrl, int sf1_bits, double coin, const std::vector<bool>& run,
               std::size_t pos) {
    if (w == 0.0) return;
    if (pos == 0) {
      emit(w, len, 0, 0, 0);
      return;
    }
    const std::size_t j = pos - 1;
    if (run[j]) {
      closing(w, len, sf1_ctrl, sf1_bits, coin, run, j);
      return;
    }
    // Hit: signals run[0..j) are delivered.
    int ctrl = sf1_ctrl;
    int bits = sf1_bits;
    int sf2_bits = 0;
    for (std::size_t i = 0; i < j; ++i) {
      if (run[i]) {
        ++ctrl;
      } else {
        ++bits;
        ++sf2_bits;
      }
    }
    const double info = coin + k_.chi1 * sf1_bits + k_.chi2 * sf2_bits;
    emit(w * k_.closing_success, len, 1.0 + ctrl + bits, ctrl, info);
    closing(w * (1.0 - k_.closing_success), len, sf1_ctrl, sf1_bits, coin, run, j);
  }

  const AttackKernel& k_;
  double f_;
  std::vector<TuplePath> paths_;
};

}  // namespace detail

/// Weighted enumeration of all cycle paths of total length <= max_cycle_len.
/// Throws truncation_error when the excluded probability exceeds max_residual.
inline EnumerationResult enumerate_small(const ProtocolParams& protocol, const AttackParams& attack,
                                         std::size_t max_cycle_len, double max_residual = 1e-9) {
  const AttackKernel k = AttackKernel::make(protocol, attack);
  const double f = protocol.f;

  // Collapse tuple paths by length; the search prefix only shifts lengths.
  std::map<std::size_t, detail::TuplePath> by_length;
  for (const auto& path : detail::TupleEnumerator(k, f).run()) {
    auto& acc = by_length[path.length];
    acc.length = path.length;
    acc.weight += path.weight;
    acc.emitted += path.weight * path.emitted;
    acc.controls += path.weight * path.controls;
    acc.eve_info += path.weight * path.eve_info;
  }

  const double hit = (1.0 - f) * k.search_success;
  EnumerationResult res;
  double covered = 0.0;
  double search_weight = hit;  // P(search takes exactly n signals)
  for (std::size_t n = 1; n <= max_cycle_len; ++n) {
    for (const auto& [len, acc] : by_length) {
      if (n + len > max_cycle_len) break;
      const double w = search_weight * acc.weight;
      covered += w;
      res.cycle.consumed += w * static_cast<double>(n + len);
      res.cycle.emitted += search_weight * acc.emitted;
      res.cycle.controls += search_weight * acc.controls;
      res.cycle.eve_info += search_weight * acc.eve_info;
    }
    search_weight *= 1.0 - hit;
    if (search_weight == 0.0) break;
  }
  res.residual_mass = std::max(0.0, 1.0 - covered);
  if (res.residual_mass > max_residual) {
    throw truncation_error("cycle-length cap " + std::to_string(max_cycle_len) + " leaves residual mass " +
                               std::to_string(res.residual_mass),
                           res.residual_mass);
  }
  res.point = res.cycle.to_point(attack.mu_b);
  return res;
}

/// Cap for enumerate_small that leaves less than `residual` search-tail mass.
inline std::size_t enumeration_cap(const ProtocolParams& protocol, const AttackParams& attack,
                                   double residual = 1e-15) {
  const double hit = (1.0 - protocol.f) * vacuum_search_success(protocol.mu_a);
  const double tail = std::ceil(std::log(residual) / std::log1p(-hit));
  return static_cast<std::size_t>(tail) + static_cast<std::size_t>(attack.t_sf1 + attack.t_sf2 + 2);
}

}  // namespace cowsf
