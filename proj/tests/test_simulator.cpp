#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "cowsf/simulator.hpp"

using namespace cowsf;
using K = SignalKind;

namespace {

ProtocolParams protocol(double mu_a = 0.5, double f = 0.1) {
  ProtocolParams p;
  p.mu_a = MeanPhotonNumber(mu_a);
  p.f = f;
  return p;
}

AttackParams attack(int t1, int t2, double mb, double e1, double e2) {
  AttackParams a;
  a.t_sf1 = t1;
  a.t_sf2 = t2;
  a.mu_b = MeanPhotonNumber(mb);
  a.mu_e1 = std::isinf(e1) ? MeanPhotonNumber::infinite() : MeanPhotonNumber(e1);
  a.mu_e2 = std::isinf(e2) ? MeanPhotonNumber::infinite() : MeanPhotonNumber(e2);
  return a;
}

const double kInf = std::numeric_limits<double>::infinity();
const bool kTTF[] = {true, true, false};
const bool kFT[] = {false, true};
const bool kCaseA[] = {false, true, false, true, false};

// c01c10110 with |a>|0> as the 0 bit
std::vector<K> example_sequence() {
  return {K::Control, K::Bit0, K::Bit1, K::Control, K::Bit1, K::Bit0, K::Bit1, K::Bit1, K::Bit0};
}

}  // namespace

TEST(SlotPattern, Kinds) {
  EXPECT_EQ(slot_pattern(K::Bit0), (EmittedSlots{true, false}));
  EXPECT_EQ(slot_pattern(K::Bit1), (EmittedSlots{false, true}));
  EXPECT_EQ(slot_pattern(K::Control), (EmittedSlots{true, true}));
}

TEST(GenerateSequence, Basics) {
  EXPECT_THROW(generate_sequence(0, 0.1, 1), argument_error);
  for (const auto k : generate_sequence(10, 0.0, 99)) EXPECT_NE(k, K::Control);
  EXPECT_EQ(generate_sequence(5, 0.5, 1), generate_sequence(5, 0.5, 1));
  EXPECT_NE(generate_sequence(64, 0.5, 1), generate_sequence(64, 0.5, 2));
}

TEST(GenerateSequence, ControlCountWithinFourSigma) {
  const auto kinds = generate_sequence(1000000, 0.1, 7);
  const double n = static_cast<double>(std::count(kinds.begin(), kinds.end(), K::Control));
  const double sigma = std::sqrt(1e6 * 0.1 * 0.9);
  EXPECT_LT(std::abs(n - 1e5), 4 * sigma);
  const double b0 = static_cast<double>(std::count(kinds.begin(), kinds.end(), K::Bit0));
  EXPECT_LT(std::abs(b0 - 4.5e5), 4 * std::sqrt(1e6 * 0.45 * 0.55));
}

TEST(RunAttack, AllControlsNeverEmit) {
  const std::vector<K> kinds(500, K::Control);
  const auto r = run_attack(kinds, protocol(), attack(1, 3, 0.2, 0.4, 0.4), 3);
  EXPECT_EQ(r.stats.signals_emitted, 0u);
  EXPECT_EQ(r.stats.eve_info_total, 0.0);
  for (const auto& f : r.fates) EXPECT_EQ(f.fate, Fate::BlockedSearch);
}

TEST(RunAttack, InfeasibleAttackFailsBeforeRunning) {
  const auto kinds = generate_sequence(10, 0.1, 1);
  EXPECT_THROW(run_attack(kinds, protocol(0.5), attack(0, 1, 0.1, kInf, 0.1), 1), infeasible_error);
}

TEST(RunAttack, DeterministicAndConserving) {
  const auto p = protocol();
  const auto a = attack(1, 3, 0.2, 0.4, 0.4);
  const auto kinds = generate_sequence(20000, p.f, 11);
  const auto r1 = run_attack(kinds, p, a, 5);
  const auto r2 = run_attack(kinds, p, a, 5);
  EXPECT_EQ(r1.fates, r2.fates);
  EXPECT_EQ(r1.stats, r2.stats);
  EXPECT_EQ(r1.cycles, r2.cycles);

  ASSERT_EQ(r1.fates.size(), kinds.size());
  std::size_t emitted = 0, controls = 0;
  double info = 0.0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (is_emitted(r1.fates[i].fate)) {
      ++emitted;
      if (kinds[i] == K::Control) ++controls;
    }
    info += r1.fates[i].eve_info;
  }
  EXPECT_EQ(r1.stats.signals_consumed, kinds.size());
  EXPECT_EQ(r1.stats.signals_emitted, emitted);
  EXPECT_EQ(r1.stats.controls_emitted, controls);
  EXPECT_EQ(r1.stats.signals_emitted, r1.stats.controls_emitted + r1.stats.bits_emitted);
  EXPECT_NEAR(r1.stats.eve_info_total, info, 1e-9);

  std::size_t covered = 0;
  for (const auto& c : r1.cycles) covered += c.consumed();
  EXPECT_EQ(covered, kinds.size());
}

TEST(RunAttack, StructuralInvariantsOnRandomRuns) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 1000; ++run) {
    const double mu_a = 0.05 + 0.9 * u(gen);
    const double f = 0.3 * u(gen);
    const double mb = 0.01 + 1.2 * mu_a * u(gen);
    const double e1 = u(gen) < 0.2 ? kInf : std::max(0.0, mu_a - mb) + 2 * u(gen);
    const double e2 = u(gen) < 0.2 ? kInf : std::max(0.0, mu_a - mb) + 2 * u(gen);
    const auto a = attack(static_cast<int>(gen() % 4), 1 + static_cast<int>(gen() % 6), mb, e1, e2);
    const auto p = protocol(mu_a, f);
    const auto kinds = generate_sequence(300, f, gen());
    const auto r = run_attack(kinds, p, a, gen());
    ASSERT_TRUE(structural_visibility_check(kinds, r.fates, a.t_sf1)) << run;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (r.fates[i].fate == Fate::OpeningBoundary) {
        EXPECT_NE(kinds[i], K::Control);
      }
      if (r.fates[i].eve_info > 0.0) {
        EXPECT_TRUE(is_emitted(r.fates[i].fate));
        EXPECT_NE(kinds[i], K::Control);
      }
    }
  }
}

TEST(RunAttack, LosslessSecondStageNeverFails) {
  // mu_b + mu_e2 = mu_a: p2 = q2 = 1
  const auto p = protocol(0.5);
  const auto kinds = generate_sequence(200000, p.f, 8);
  const auto r = run_attack(kinds, p, attack(0, 1000, 0.3, kInf, 0.2), 9);
  for (const auto& f : r.fates) EXPECT_NE(f.fate, Fate::BlockedSFFail);
}

TEST(Replay, ExampleCaseA) {
  const auto kinds = example_sequence();
  const bool script[] = {false, true, false, true, false};
  const auto r = replay_with_outcomes(std::span(kinds).first(5), attack(2, 4, 0.1, kInf, kInf), script);
  ASSERT_EQ(r.fates.size(), 5u);
  EXPECT_EQ(r.fates[0].fate, Fate::BlockedSearch);
  EXPECT_EQ(r.fates[1].fate, Fate::BlockedSearch);
  for (std::size_t i = 2; i < 5; ++i) EXPECT_EQ(r.fates[i].fate, Fate::BlockedTupleAbort);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.fates[i].eve_info, 0.0);
    EXPECT_EQ(r.emitted[i], (EmittedSlots{false, false}));
  }
}

TEST(Replay, ExampleCaseAResumesAtSixth) {
  // Same start; the next draw is the stage-1 search on signal 6.
  const auto kinds = example_sequence();
  const bool script[] = {false, true, false, true, false, false, false, false, false};
  const auto r = replay_with_outcomes(kinds, attack(2, 4, 0.1, kInf, kInf), script);
  for (std::size_t i = 5; i < 9; ++i) EXPECT_EQ(r.fates[i].fate, Fate::BlockedSearch);
}

TEST(Replay, ExampleCaseB) {
  const auto kinds = example_sequence();
  const auto a = attack(2, 4, 0.1, 0.3, 0.7);
  const bool script[] = {false, true, true, true, true, true, true, true, false, false, true};
  const auto r = replay_with_outcomes(kinds, a, script);
  const double chi1 = holevo_binary(MeanPhotonNumber(0.3));
  const double chi2 = holevo_binary(MeanPhotonNumber(0.7));

  const std::vector<Fate> fates{Fate::BlockedSearch, Fate::BlockedSearch, Fate::OpeningBoundary,
                                Fate::EmittedSF1,    Fate::EmittedSF1,    Fate::EmittedSF2,
                                Fate::ClosingVacuum, Fate::BlockedVacuumFail, Fate::BlockedSFFail};
  const std::vector<double> info{0, 0, 1, 0, chi1, chi2, 0, 0, 0};
  const std::vector<EmittedSlots> slots{{false, false}, {false, false}, {false, true},
                                        {true, true},   {false, true},  {true, false},
                                        {false, false}, {false, false}, {false, false}};
  ASSERT_EQ(r.fates.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(r.fates[i].fate, fates[i]) << "signal " << i + 1;
    EXPECT_EQ(r.fates[i].eve_info, info[i]) << "signal " << i + 1;
    EXPECT_EQ(r.emitted[i], slots[i]) << "signal " << i + 1;
  }
  EXPECT_TRUE(structural_visibility_check(kinds, r.fates, 2));
}

TEST(Replay, ForcedSecondStageFailureBlocksEverything) {
  const std::vector<K> kinds{K::Bit0, K::Bit1};
  const auto r = replay_with_outcomes(kinds, attack(0, 1, 0.1, kInf, kInf), kTTF);
  for (const auto& f : r.fates) {
    EXPECT_FALSE(is_emitted(f.fate));
    EXPECT_EQ(f.eve_info, 0.0);
  }
}

TEST(Replay, ScriptExhaustedReportsIndex) {
  const auto kinds = example_sequence();
  try {
    replay_with_outcomes(kinds, attack(2, 4, 0.1, kInf, kInf), kFT);
    FAIL() << "expected script_exhausted_error";
  } catch (const script_exhausted_error& e) {
    EXPECT_EQ(e.draw_index(), 2u);
  }
}

TEST(Replay, EmptyInput) {
  const auto r = replay_with_outcomes({}, attack(0, 1, 0.1, kInf, kInf), std::span<const bool>{});
  EXPECT_TRUE(r.fates.empty());
  EXPECT_TRUE(r.emitted.empty());
}

TEST(Visibility, RejectsSecondStageBeforeOpening) {
  const std::vector<K> kinds{K::Bit0, K::Bit1, K::Bit0};
  std::vector<SignalFate> fates{{Fate::EmittedSF2, 0.0}, {Fate::OpeningBoundary, 0.0}, {Fate::ClosingVacuum, 0.0}};
  EXPECT_FALSE(structural_visibility_check(kinds, fates));
  std::vector<SignalFate> blocked(3, {Fate::BlockedSearch, 0.0});
  EXPECT_TRUE(structural_visibility_check(kinds, blocked));
  std::vector<SignalFate> leaky(3, {Fate::BlockedSearch, 0.0});
  leaky[1].eve_info = 0.5;
  EXPECT_FALSE(structural_visibility_check(kinds, leaky));
}

TEST(Trace, HeaderAndRows) {
  const auto kinds = example_sequence();
  const auto r = replay_with_outcomes(std::span(kinds).first(5), attack(2, 4, 0.1, kInf, kInf),
                                      kCaseA);
  std::ostringstream os;
  write_trace(os, std::span(kinds).first(5), r.fates);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index\tkind\tfate\teve_info");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Estimate, StandardErrorsShrinkWithMoreSignals) {
  const auto p = protocol();
  const auto a = attack(1, 3, 0.2, 0.4, 0.4);
  const auto small = estimate_point(run_attack(generate_sequence(20000, p.f, 1), p, a, 2), a.mu_b);
  const auto large = estimate_point(run_attack(generate_sequence(320000, p.f, 1), p, a, 2), a.mu_b);
  EXPECT_GT(small.standard_error.emit_fraction, 0.0);
  EXPECT_LT(large.standard_error.emit_fraction, small.standard_error.emit_fraction);
  EXPECT_LT(large.standard_error.eve_info_per_emitted_bit, small.standard_error.eve_info_per_emitted_bit);
}
