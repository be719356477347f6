#pragma once

// Self-checks behind `cowsf validate`: overlap preservation of both filter
// stages, closed form versus path enumeration, and the scripted worked
// example c01c10110.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cowsf/analytic.hpp"
#include "cowsf/photonics.hpp"
#include "cowsf/simulator.hpp"
#include "cowsf/soft_filter.hpp"

namespace cowsf {

struct IntensityTriple {
  MeanPhotonNumber mu_a;
  MeanPhotonNumber mu_b;
  MeanPhotonNumber mu_e;
};

/// Random point of the feasible region mu_b + mu_e >= mu_a: mu_a and the
/// excess log-uniform, mu_b uniform in (0, 1.5 mu_a].
inline IntensityTriple sample_feasible_triple(std::mt19937_64& gen) {
  const auto u = [&] { return detail::to_unit_interval(gen()); };
  const double mu_a = std::exp(std::log(0.01) + u() * std::log(200.0));
  const double mu_b = std::max(1e-6, 1.5 * mu_a * u());
  const double excess = std::exp(std::log(1e-6) + u() * std::log(1e7));
  return {MeanPhotonNumber(mu_a), MeanPhotonNumber(mu_b), MeanPhotonNumber(std::max(0.0, mu_a - mu_b) + excess)};
}

/// The worked example's sequence c01c10110, signals 1..9 at indices 0..8.
inline std::vector<SignalKind> worked_example_kinds() {
  using K = SignalKind;
  return {K::Control, K::Bit0, K::Bit1, K::Control, K::Bit1, K::Bit0, K::Bit1, K::Bit1, K::Bit0};
}

/// Case (a): search fails on 2, hits on 3, SF1 succeeds on 4 and fails on 5.
inline AttackParams worked_example_a_attack() {
  AttackParams a;
  a.t_sf1 = 2;
  a.t_sf2 = 4;
  return a;
}
inline std::vector<bool> worked_example_a_script() { return {false, true, false, true, false}; }

/// Case (b): opening 3 with the full-information coin, SF1 on 4-5, SF2
/// succeeds on 6-8 and fails on 9, closing search fails on 8, hits on 7.
inline AttackParams worked_example_b_attack() {
  AttackParams a;
  a.t_sf1 = 2;
  a.t_sf2 = 4;
  a.mu_e1 = MeanPhotonNumber(0.3);
  a.mu_e2 = MeanPhotonNumber(0.7);
  return a;
}
inline std::vector<bool> worked_example_b_script() {
  return {false, true, true, true, true, true, true, true, false, false, true};
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 20240501;
  std::size_t unitarity_samples = 1000;
  bool inject_wrong_q2 = false;  ///< negative control: perturb q2 by 1%
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline ValidationCheck check_unitarity(FilterStage stage, const ValidationOptions& o) {
  std::mt19937_64 gen(o.seed + (stage == FilterStage::SF1 ? 0 : 1));
  double worst = 0.0;
  for (std::size_t i = 0; i < o.unitarity_samples; ++i) {
    const auto t = sample_feasible_triple(gen);
    SFOutcomeProbs probs = stage == FilterStage::SF1 ? sf1_probs(t.mu_a, t.mu_b, t.mu_e) : sf2_probs(t.mu_a, t.mu_b, t.mu_e);
    if (stage == FilterStage::SF2 && o.inject_wrong_q2) probs.q_control = std::min(1.0, probs.q_control * 1.01 + 1e-3);
    worst = std::max(worst, unitarity_residual(stage, t.mu_a, t.mu_b, t.mu_e, probs));
  }
  return {stage == FilterStage::SF1 ? "unitarity_sf1" : "unitarity_sf2", worst < 1e-9, "max residual " + sci(worst)};
}

inline ValidationCheck check_enumeration() {
  ProtocolParams p;
  p.mu_a = MeanPhotonNumber(0.5);
  p.f = 0.1;
  std::vector<AttackParams> configs;
  for (const int t1 : {0, 1, 2}) {
    for (const int t2 : {1, 2, 3}) {
      AttackParams a;
      a.t_sf1 = t1;
      a.t_sf2 = t2;
      a.mu_b = MeanPhotonNumber(0.2);
      a.mu_e1 = t1 == 0 ? MeanPhotonNumber::infinite() : MeanPhotonNumber(0.4);
      a.mu_e2 = MeanPhotonNumber(0.5);
      configs.push_back(a);
    }
  }
  double worst = 0.0;
  for (const auto& a : configs) {
    const auto exact = expected_statistics(p, a);
    const auto e = enumerate_small(p, a, enumeration_cap(p, a)).point;
    worst = std::max({worst, std::abs(exact.emit_fraction - e.emit_fraction),
                      std::abs(exact.control_fraction - e.control_fraction),
                      std::abs(exact.eve_info_per_emitted_bit - e.eve_info_per_emitted_bit)});
  }
  return {"analytic_vs_enumeration", worst < 1e-8, "max deviation " + sci(worst)};
}

inline ValidationCheck check_case_a() {
  const auto kinds = worked_example_kinds();
  const auto script = worked_example_a_script();
  const auto r = replay_with_outcomes(std::span(kinds).first(5), worked_example_a_attack(), script);
  bool ok = r.fates.size() == 5;
  for (const auto& f : r.fates) ok = ok && !is_emitted(f.fate) && f.eve_info == 0.0;
  return {"replay_case_a", ok, ok ? "signals 1-5 blocked" : "unexpected fates"};
}

inline ValidationCheck check_case_b() {
  const auto kinds = worked_example_kinds();
  const auto attack = worked_example_b_attack();
  const auto r = replay_with_outcomes(kinds, attack, worked_example_b_script());
  const double chi1 = holevo_binary(attack.mu_e1);
  const double chi2 = holevo_binary(attack.mu_e2);
  const std::vector<EmittedSlots> want_slots{{false, false}, {false, false}, {false, true},
                                             {true, true},   {false, true},  {true, false},
                                             {false, false}, {false, false}, {false, false}};
  const std::vector<double> want_info{0, 0, 1.0, 0, chi1, chi2, 0, 0, 0};
  bool ok = r.emitted == want_slots && r.fates.size() == want_info.size();
  for (std::size_t i = 0; ok && i < want_info.size(); ++i) ok = r.fates[i].eve_info == want_info[i];
  ok = ok && structural_visibility_check(kinds, r.fates, attack.t_sf1);
  return {"replay_case_b", ok, ok ? "tuple 3-7 delivered as expected" : "pattern or ledger mismatch"};
}

}  // namespace detail

inline std::vector<ValidationCheck> run_validation(const ValidationOptions& o = {}) {
  return {detail::check_unitarity(FilterStage::SF1, o), detail::check_unitarity(FilterStage::SF2, o),
          detail::check_enumeration(), detail::check_case_a(), detail::check_case_b()};
}

}  // namespace cowsf
