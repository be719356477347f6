#pragma once

// Monte Carlo execution of the adaptive four-stage soft-filtering attack.
//
// Eve walks Alice's signal stream as a renewal process. One cycle is:
//   1. vacuum search: block signals until a bit signal yields its vacuum slot
//      (probability Z; controls have no vacuum slot and always fail); that
//      signal opens the tuple and is forwarded at intensity mu_b;
//   2. exactly t_sf1 SF1 trials; any failure aborts the whole tuple;
//   3. SF2 trials left to right until the first failure or t_sf2 successes;
//   4. a right-to-left vacuum search over the SF2 successes; the first hit
//      closes the tuple (forwarded as vacuum), everything to its right is
//      blocked; no hit aborts the tuple.
//
// Draw order within a cycle is fixed: search draws, the opening's full-info
// coin, SF1 draws left to right, SF2 draws left to right, closing-search draws
// right to left. Outcomes that are certain by construction (a control in
// either vacuum search) consume no draw. A draw succeeds iff u < p with
// u = (x >> 11) * 2^-53 taken from a 64-bit Mersenne twister.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cowsf/errors.hpp"
#include "cowsf/photonics.hpp"
#include "cowsf/soft_filter.hpp"
#include "cowsf/strategy_point.hpp"

namespace cowsf {

/// Bit0 = |a>|0>, Bit1 = |0>|a>, Control = |a>|a>.
enum class SignalKind : std::uint8_t { Bit0, Bit1, Control };

/// Pulse (true) or vacuum (false) in the early and late time slot.
constexpr std::array<bool, 2> slot_pattern(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::Bit0:
      return {true, false};
    case SignalKind::Bit1:
      return {false, true};
    case SignalKind::Control:
      return {true, true};
  }
  return {false, false};
}

constexpr std::string_view to_string(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::Bit0:
      return "bit0";
    case SignalKind::Bit1:
      return "bit1";
    case SignalKind::Control:
      return "control";
  }
  return "?";
}

/// Eve's five tunables.
struct AttackParams {
  int t_sf1 = 0;
  int t_sf2 = 1;
  MeanPhotonNumber mu_b{0.1};
  MeanPhotonNumber mu_e1 = MeanPhotonNumber::infinite();
  MeanPhotonNumber mu_e2 = MeanPhotonNumber::infinite();

  void validate_for(const ProtocolParams& protocol) const {
    protocol.validate();
    if (t_sf1 < 0) throw argument_error("t_sf1 must be non-negative");
    if (t_sf2 < 1) throw argument_error("t_sf2 must be positive");
    if (mu_b.is_infinite()) throw argument_error("mu_b must be finite");
    // Throw infeasible_error on either stage's intensity condition.
    (void)sf1_probs(protocol.mu_a, mu_b, mu_e1);
    (void)sf2_probs(protocol.mu_a, mu_b, mu_e2);
  }

  friend bool operator==(const AttackParams&, const AttackParams&) = default;
};

enum class Fate : std::uint8_t {
  BlockedSearch,
  OpeningBoundary,
  EmittedSF1,
  EmittedSF2,
  ClosingVacuum,
  BlockedVacuumFail,
  BlockedSFFail,
  BlockedTupleAbort,
};

constexpr std::string_view to_string(Fate fate) noexcept {
  switch (fate) {
    case Fate::BlockedSearch:
      return "blocked_search";
    case Fate::OpeningBoundary:
      return "opening_boundary";
    case Fate::EmittedSF1:
      return "emitted_sf1";
    case Fate::EmittedSF2:
      return "emitted_sf2";
    case Fate::ClosingVacuum:
      return "closing_vacuum";
    case Fate::BlockedVacuumFail:
      return "blocked_vacuum_fail";
    case Fate::BlockedSFFail:
      return "blocked_sf_fail";
    case Fate::BlockedTupleAbort:
      return "blocked_tuple_abort";
  }
  return "?";
}

/// True for the fates that put a mu_b pulse pattern on Bob's line.
constexpr bool is_emitted(Fate fate) noexcept {
  return fate == Fate::OpeningBoundary || fate == Fate::EmittedSF1 || fate == Fate::EmittedSF2;
}

struct SignalFate {
  Fate fate = Fate::BlockedSearch;
  double eve_info = 0.0;

  friend bool operator==(const SignalFate&, const SignalFate&) = default;
};

/// One renewal cycle: search signals plus the tuple attempt that followed.
struct TupleRecord {
  std::size_t first_signal = 0;
  std::optional<std::size_t> opening;  ///< empty for a trailing search-only cycle
  std::size_t end = 0;                 ///< one past the last consumed signal
  bool completed = false;
  std::size_t emitted = 0;
  std::size_t controls = 0;
  double eve_info = 0.0;

  std::size_t consumed() const noexcept { return end - first_signal; }
  std::size_t bits() const noexcept { return emitted - controls; }

  friend bool operator==(const TupleRecord&, const TupleRecord&) = default;
};

struct RunStats {
  std::size_t signals_consumed = 0;
  std::size_t signals_emitted = 0;
  std::size_t controls_emitted = 0;
  std::size_t bits_emitted = 0;
  double eve_info_total = 0.0;
  std::size_t tuples_completed = 0;
  std::size_t tuples_aborted = 0;

  RunStats& operator+=(const RunStats& o) noexcept {
    signals_consumed += o.signals_consumed;
    signals_emitted += o.signals_emitted;
    controls_emitted += o.controls_emitted;
    bits_emitted += o.bits_emitted;
    eve_info_total += o.eve_info_total;
    tuples_completed += o.tuples_completed;
    tuples_aborted += o.tuples_aborted;
    return *this;
  }

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct RunResult {
  std::vector<SignalFate> fates;
  std::vector<TupleRecord> cycles;
  RunStats stats;
};

/// Pulse pattern Eve puts on Bob's line for one signal.
using EmittedSlots = std::array<bool, 2>;

struct ReplayResult {
  std::vector<SignalFate> fates;
  std::vector<EmittedSlots> emitted;
};

/// Probabilities and information values driving one attack execution.
struct AttackKernel {
  int t_sf1 = 0;
  int t_sf2 = 1;
  double search_success = 0.0;   ///< Z on a bit signal
  SFOutcomeProbs sf1{1.0, 1.0};
  SFOutcomeProbs sf2{1.0, 1.0};
  double closing_success = 0.0;  ///< V on a bit signal
  double chi1 = 0.0;
  double chi2 = 0.0;

  static AttackKernel make(const ProtocolParams& protocol, const AttackParams& attack) {
    attack.validate_for(protocol);
    AttackKernel k;
    k.t_sf1 = attack.t_sf1;
    k.t_sf2 = attack.t_sf2;
    k.search_success = vacuum_search_success(protocol.mu_a);
    k.sf1 = sf1_probs(protocol.mu_a, attack.mu_b, attack.mu_e1);
    k.sf2 = sf2_probs(protocol.mu_a, attack.mu_b, attack.mu_e2);
    k.closing_success = vacuum_search_success(attack.mu_b + attack.mu_e2);
    k.chi1 = holevo_binary(attack.mu_e1);
    k.chi2 = holevo_binary(attack.mu_e2);
    return k;
  }
};

namespace detail {

inline double to_unit_interval(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class RngDraws {
 public:
  explicit RngDraws(std::uint64_t seed) : gen_(seed) {}
  bool operator()(double p) { return to_unit_interval(gen_()) < p; }

 private:
  std::mt19937_64 gen_;
};

class ScriptDraws {
 public:
  explicit ScriptDraws(std::span<const bool> script) : script_(script) {}
  bool operator()(double /*p*/) {
    if (next_ >= script_.size()) throw script_exhausted_error(next_);
    return script_[next_++];
  }

 private:
  std::span<const bool> script_;
  std::size_t next_ = 0;
};

// The attack state machine, generic over the source of random outcomes.
template <class Draw>
RunResult execute_attack(std::span<const SignalKind> kinds, const AttackKernel& k, Draw& draw) {
  const std::size_t n = kinds.size();
  RunResult out;
  out.fates.resize(n);
  RunStats& st = out.stats;

  const auto is_control = [&](std::size_t i) { return kinds[i] == SignalKind::Control; };

  const auto abort_tuple = [&](TupleRecord& rec, std::size_t opening, std::size_t end) {
    for (std::size_t j = opening; j < end; ++j) out.fates[j] = {Fate::BlockedTupleAbort, 0.0};
    rec.end = end;
    ++st.tuples_aborted;
  };

  std::size_t i = 0;
  while (i < n) {
    TupleRecord rec;
    rec.first_signal = i;

    bool found = false;
    while (i < n) {
      if (!is_control(i) && draw(k.search_success)) {
        found = true;
        break;
      }
      out.fates[i++] = {Fate::BlockedSearch, 0.0};
    }
    if (!found) {
      rec.end = i;
      out.cycles.push_back(rec);
      break;
    }

    const std::size_t opening = i;
    rec.opening = opening;
    out.fates[i++] = {Fate::OpeningBoundary, draw(0.5) ? 1.0 : 0.0};

    bool alive = true;
    for (int trial = 0; trial < k.t_sf1; ++trial) {
      if (i >= n) {
        alive = false;
        break;
      }
      const bool ctrl = is_control(i);
      if (!draw(ctrl ? k.sf1.q_control : k.sf1.p_info)) {
        ++i;
        alive = false;
        break;
      }
      out.fates[i] = {Fate::EmittedSF1, ctrl ? 0.0 : k.chi1};
      ++i;
    }
    if (!alive) {
      abort_tuple(rec, opening, i);
      out.cycles.push_back(rec);
      continue;
    }

    const std::size_t sf2_begin = i;
    int successes = 0;
    bool stopped = false;
    while (successes < k.t_sf2 && i < n) {
      const bool ctrl = is_control(i);
      if (!draw(ctrl ? k.sf2.q_control : k.sf2.p_info)) {
        out.fates[i++] = {Fate::BlockedSFFail, 0.0};
        stopped = true;
        break;
      }
      out.fates[i++] = {Fate::EmittedSF2, ctrl ? 0.0 : k.chi2};
      ++successes;
    }
    if (!stopped && successes < k.t_sf2) {
      // Input ran out mid-tuple.
      abort_tuple(rec, opening, i);
      out.cycles.push_back(rec);
      continue;
    }

    std::optional<std::size_t> closing;
    for (std::size_t j = sf2_begin + static_cast<std::size_t>(successes); j-- > sf2_begin;) {
      if (!is_control(j) && draw(k.closing_success)) {
        closing = j;
        break;
      }
      out.fates[j] = {Fate::BlockedVacuumFail, 0.0};
    }
    if (!closing) {
      abort_tuple(rec, opening, i);
      out.cycles.push_back(rec);
      continue;
    }
    out.fates[*closing] = {Fate::ClosingVacuum, 0.0};

    rec.end = i;
    rec.completed = true;
    for (std::size_t j = opening; j < *closing; ++j) {
      ++rec.emitted;
      if (is_control(j)) ++rec.controls;
      rec.eve_info += out.fates[j].eve_info;
    }
    ++st.tuples_completed;
    out.cycles.push_back(rec);
  }

  st.signals_consumed = n;
  for (std::size_t j = 0; j < n; ++j) {
    if (!is_emitted(out.fates[j].fate)) continue;
    ++st.signals_emitted;
    if (is_control(j)) {
      ++st.controls_emitted;
    } else {
      ++st.bits_emitted;
    }
    st.eve_info_total += out.fates[j].eve_info;
  }
  return out;
}

}  // namespace detail

/// Alice's i.i.d. stream: control with probability f, each bit value with (1-f)/2.
inline std::vector<SignalKind> generate_sequence(std::size_t n, double f, std::uint64_t seed) {
  if (n < 1) throw argument_error("sequence length must be at least 1");
  detail::require_probability(f, "f");
  std::mt19937_64 gen(seed);
  std::vector<SignalKind> kinds(n);
  const double bit0_edge = f + (1.0 - f) / 2.0;
  for (auto& kind : kinds) {
    const double u = detail::to_unit_interval(gen());
    kind = u < f ? SignalKind::Control : (u < bit0_edge ? SignalKind::Bit0 : SignalKind::Bit1);
  }
  return kinds;
}

inline RunResult run_attack(std::span<const SignalKind> kinds, const ProtocolParams& protocol,
                            const AttackParams& attack, std::uint64_t seed) {
  const AttackKernel kernel = AttackKernel::make(protocol, attack);
  detail::RngDraws draws(seed);
  return detail::execute_attack(kinds, kernel, draws);
}

/// Re-executes the state machine with every random outcome taken from `script`.
inline ReplayResult replay_with_outcomes(std::span<const SignalKind> kinds, const AttackParams& attack,
                                         std::span<const bool> script) {
  if (attack.t_sf1 < 0 || attack.t_sf2 < 1) throw argument_error("invalid tuple lengths");
  AttackKernel k;
  k.t_sf1 = attack.t_sf1;
  k.t_sf2 = attack.t_sf2;
  k.chi1 = holevo_binary(attack.mu_e1);
  k.chi2 = holevo_binary(attack.mu_e2);
  detail::ScriptDraws draws(script);
  RunResult run = detail::execute_attack(kinds, k, draws);

  ReplayResult out;
  out.emitted.resize(kinds.size(), EmittedSlots{false, false});
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (is_emitted(run.fates[i].fate)) out.emitted[i] = slot_pattern(kinds[i]);
  }
  out.fates = std::move(run.fates);
  return out;
}

// std::vector<bool> is not contiguous.
inline ReplayResult replay_with_outcomes(std::span<const SignalKind> kinds, const AttackParams& attack,
                                         const std::vector<bool>& script) {
  const std::unique_ptr<bool[]> buf(new bool[script.size() + 1]);
  std::copy(script.begin(), script.end(), buf.get());
  return replay_with_outcomes(kinds, attack, std::span<const bool>(buf.get(), script.size()));
}

/// Checks that every delivered tuple keeps the monitoring line's interference
/// intact: an opening bit whose left neighbour carries no pulse, optionally
/// exactly `t_sf1` SF1 signals, SF2 signals, then a closing vacuum on a bit
/// signal. Eve may hold information only on delivered bit signals.
inline bool structural_visibility_check(std::span<const SignalKind> kinds, std::span<const SignalFate> fates,
                                        std::optional<int> t_sf1 = std::nullopt) {
  if (kinds.size() != fates.size()) return false;
  enum class Phase { Outside, SF1, SF2 };
  Phase phase = Phase::Outside;
  int sf1_count = 0;

  for (std::size_t i = 0; i < fates.size(); ++i) {
    const Fate fate = fates[i].fate;
    const bool ctrl = kinds[i] == SignalKind::Control;
    if (fates[i].eve_info < 0.0 || fates[i].eve_info > 1.0) return false;
    if (fates[i].eve_info > 0.0 && (!is_emitted(fate) || ctrl)) return false;

    switch (fate) {
      case Fate::OpeningBoundary:
        if (phase != Phase::Outside || ctrl) return false;
        if (i > 0 && is_emitted(fates[i - 1].fate)) return false;
        phase = Phase::SF1;
        sf1_count = 0;
        break;
      case Fate::EmittedSF1:
        if (phase != Phase::SF1) return false;
        ++sf1_count;
        break;
      case Fate::EmittedSF2:
        if (phase == Phase::Outside) return false;
        if (phase == Phase::SF1 && t_sf1 && sf1_count != *t_sf1) return false;
        phase = Phase::SF2;
        break;
      case Fate::ClosingVacuum:
        if (phase == Phase::Outside || ctrl) return false;
        if (phase == Phase::SF1 && t_sf1 && sf1_count != *t_sf1) return false;
        phase = Phase::Outside;
        break;
      default:
        // Any other fate is blocked; it may not interrupt an open tuple.
        if (phase != Phase::Outside) return false;
        break;
    }
  }
  return phase == Phase::Outside;
}

/// Tab-separated per-signal dump: index, kind, fate, eve_info.
inline void write_trace(std::ostream& os, std::span<const SignalKind> kinds, std::span<const SignalFate> fates) {
  os << "index\tkind\tfate\teve_info\n";
  for (std::size_t i = 0; i < fates.size() && i < kinds.size(); ++i) {
    os << i << '\t' << to_string(kinds[i]) << '\t' << to_string(fates[i].fate) << '\t' << fates[i].eve_info << '\n';
  }
}

/// Monte Carlo point estimate with delta-method standard errors over the
/// independent renewal cycles.
struct PointEstimate {
  StrategyPoint point;
  StrategyPoint standard_error;
  std::size_t cycles = 0;
};

inline PointEstimate estimate_point(const RunResult& run, MeanPhotonNumber mu_delivered) {
  CycleExpectations totals;
  for (const auto& c : run.cycles) {
    totals.consumed += static_cast<double>(c.consumed());
    totals.emitted += static_cast<double>(c.emitted);
    totals.controls += static_cast<double>(c.controls);
    totals.eve_info += c.eve_info;
  }
  PointEstimate est;
  est.cycles = run.cycles.size();
  est.point = totals.to_point(mu_delivered);
  est.standard_error.mu_delivered = MeanPhotonNumber(0.0);

  const double m = static_cast<double>(run.cycles.size());
  if (m < 2.0) return est;
  // SE of sum(y)/sum(x): sqrt(m/(m-1) * sum (y - r x)^2) / sum(x).
  const auto ratio_se = [&](auto num, auto den, double ratio, double den_total) {
    if (den_total <= 0.0) return 0.0;
    double ss = 0.0;
    for (const auto& c : run.cycles) {
      const double e = num(c) - ratio * den(c);
      ss += e * e;
    }
    return std::sqrt(ss * m / (m - 1.0)) / den_total;
  };
  const auto consumed = [](const TupleRecord& c) { return static_cast<double>(c.consumed()); };
  const auto emitted = [](const TupleRecord& c) { return static_cast<double>(c.emitted); };
  const auto controls = [](const TupleRecord& c) { return static_cast<double>(c.controls); };
  const auto bits = [](const TupleRecord& c) { return static_cast<double>(c.bits()); };
  const auto info = [](const TupleRecord& c) { return c.eve_info; };

  est.standard_error.emit_fraction = ratio_se(emitted, consumed, est.point.emit_fraction, totals.consumed);
  est.standard_error.control_fraction = ratio_se(controls, emitted, est.point.control_fraction, totals.emitted);
  est.standard_error.eve_info_per_emitted_bit =
      ratio_se(info, bits, est.point.eve_info_per_emitted_bit, totals.bits());
  return est;
}

}  // namespace cowsf
