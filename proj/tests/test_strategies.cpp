#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cowsf/strategies.hpp"

using namespace cowsf;

namespace {

ProtocolParams protocol(double mu_a, double length_km, double f = 0.1) {
  ProtocolParams p;
  p.mu_a = MeanPhotonNumber(mu_a);
  p.f = f;
  p.eta = 0.1;
  p.delta_db_per_km = 0.25;
  p.length_km = length_km;
  return p;
}

AttackParams usd_attack(int t1, double mb) {
  AttackParams a;
  a.t_sf1 = t1;
  a.t_sf2 = 1;
  a.mu_b = MeanPhotonNumber(mb);
  return a;
}

double h2(double x) { return -(x * std::log2(x) + (1 - x) * std::log2(1 - x)); }

}  // namespace

TEST(BeamSplitter, SatisfiesConstraintsExactly) {
  for (double L = 0; L <= 300; L += 12.5) {
    for (double mu : {0.01, 0.3, 1.0}) {
      const auto p = protocol(mu, L);
      const auto r = constraint_residuals(bs_point(p), p, StatisticsMode::StrictStatistics);
      EXPECT_NEAR(r.click_residual, 0.0, 1e-15);
      EXPECT_EQ(r.control_residual, 0.0);
    }
  }
}

TEST(BeamSplitter, EveInfoExamples) {
  EXPECT_EQ(bs_point(protocol(0.5, 0)).eve_info_per_emitted_bit, 0.0);
  const double tapped = 0.5 * (1 - std::pow(10.0, -2.5));
  EXPECT_NEAR(bs_point(protocol(0.5, 100)).eve_info_per_emitted_bit, h2((1 - std::exp(-tapped)) / 2), 1e-13);
  EXPECT_NEAR(bs_point(protocol(0.5, 5000)).eve_info_per_emitted_bit, holevo_binary(MeanPhotonNumber(0.5)), 1e-12);
}

TEST(KeyRate, Examples) {
  const auto p = protocol(0.5, 100);
  const auto bs = bs_point(p);
  const double chi = bs.eve_info_per_emitted_bit;
  EXPECT_NEAR(key_rate(p, bs), 0.9 * (1 - std::exp(-0.1 * std::pow(10.0, -2.5) * 0.5)) * (1 - chi), 1e-15);
  EXPECT_NEAR(key_rate(p, passthrough_point(p)), 0.9 * bob_reference_click_rate(p), 1e-16);
  EXPECT_EQ(key_rate(p, block_all_point()), 0.0);
  auto full = bs;
  full.eve_info_per_emitted_bit = 1.0;
  EXPECT_EQ(key_rate(p, full), 0.0);
}

TEST(KeyRate, BeamSplitterNeverBreaksKey) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = protocol(1e-3 + u(gen), 400 * u(gen));
    EXPECT_GT(key_rate(p, bs_point(p)), 0.0);
  }
}

TEST(BeamSplitter, SoftFilterCorrespondenceLimit) {
  const auto p = protocol(0.5, 100);
  const double t = transmittance(p);
  AttackParams a;
  a.t_sf1 = 0;
  a.t_sf2 = 100000;
  a.mu_b = MeanPhotonNumber(t * 0.5);
  a.mu_e2 = MeanPhotonNumber((1 - t) * 0.5);
  const auto pt = expected_statistics(p, a);
  const double chi = bs_point(p).eve_info_per_emitted_bit;
  EXPECT_GE(pt.emit_fraction, 0.99);
  EXPECT_GE(pt.eve_info_per_emitted_bit, 0.9 * chi);
  EXPECT_LE(pt.eve_info_per_emitted_bit, chi);
}

TEST(UsdLike, ShapeIsEnforced) {
  const auto p = protocol(0.5, 100);
  auto a = usd_attack(0, 0.1);
  a.t_sf2 = 2;
  EXPECT_THROW(usd_like_point(p, a), argument_error);
  a = usd_attack(0, 0.1);
  a.mu_e2 = MeanPhotonNumber(3.0);
  EXPECT_THROW(usd_like_point(p, a), argument_error);
}

TEST(UsdLike, OpeningCarriesHalfAndSecondStageOne) {
  // f = 0, t_sf1 = 0: a delivered tuple is the opening plus at most one SF2 bit.
  const auto p = protocol(0.4, 50, 0.0);
  const auto a = usd_attack(0, 0.2);
  const auto pt = usd_like_point(p, a);
  const auto en = enumerate_small(p, a, enumeration_cap(p, a));
  EXPECT_NEAR(pt.eve_info_per_emitted_bit, en.point.eve_info_per_emitted_bit, 1e-12);
  // Delivered tuples are always exactly the opening (the single SF2 success is the closing vacuum).
  EXPECT_NEAR(pt.eve_info_per_emitted_bit, 0.5, 1e-12);
}

TEST(UsdLike, ControlsOnlyThroughFirstStage) {
  EXPECT_EQ(usd_like_point(protocol(0.4, 50), usd_attack(0, 0.2)).control_fraction, 0.0);
  EXPECT_GT(usd_like_point(protocol(0.4, 50), usd_attack(3, 0.2)).control_fraction, 0.0);
}

TEST(UsdLike, DeliveredFilteredBitsCarryExactlyOneBit) {
  const auto p = protocol(0.5, 100);
  AttackParams a = usd_attack(3, 0.3);
  a.t_sf2 = 4;
  const auto kinds = generate_sequence(200000, p.f, 4);
  const auto run = run_attack(kinds, p, a, 5);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const Fate fate = run.fates[i].fate;
    if ((fate == Fate::EmittedSF1 || fate == Fate::EmittedSF2) && kinds[i] != SignalKind::Control) {
      EXPECT_EQ(run.fates[i].eve_info, 1.0);
      ++seen;
    }
  }
  EXPECT_GT(seen, 0u);
}

TEST(UsdThreshold, ShortChannelsAreNeverFullyBroken) {
  const ChannelParams ch;
  EXPECT_EQ(usd_feasibility_threshold(ch, 0, StatisticsMode::StrictStatistics).status, ThresholdStatus::NoneFeasible);
  EXPECT_EQ(usd_feasibility_threshold(ch, 10, StatisticsMode::StrictStatistics).status,
            ThresholdStatus::NoneFeasible);
}

TEST(UsdThreshold, FoundAndNonincreasingInLength) {
  const ChannelParams ch;
  double prev = 2.0;
  for (double L : {50.0, 100.0, 150.0, 200.0}) {
    const auto r = usd_feasibility_threshold(ch, L, StatisticsMode::StrictStatistics);
    ASSERT_EQ(r.status, ThresholdStatus::Found) << L;
    EXPECT_GT(r.mu_a, 0.0);
    EXPECT_LT(r.mu_a, prev) << L;
    prev = r.mu_a;
  }
}

TEST(UsdThreshold, FeasibilityHoldsAboveThreshold) {
  const ChannelParams ch;
  const auto r = usd_feasibility_threshold(ch, 150, StatisticsMode::StrictStatistics);
  ASSERT_EQ(r.status, ThresholdStatus::Found);
  for (double k : {1.001, 1.5, 3.0}) {
    const double mu = std::min(1.0, r.mu_a * k);
    EXPECT_TRUE(usd_like_feasible(ch.with(MeanPhotonNumber(mu), 150), StatisticsMode::StrictStatistics));
  }
  EXPECT_FALSE(usd_like_feasible(ch.with(MeanPhotonNumber(r.mu_a * 0.99), 150), StatisticsMode::StrictStatistics));
}

TEST(UsdThreshold, FreeModeIsNoHarderThanStrict) {
  const ChannelParams ch;
  for (double L : {100.0, 200.0}) {
    const auto strict = usd_feasibility_threshold(ch, L, StatisticsMode::StrictStatistics);
    const auto free = usd_feasibility_threshold(ch, L, StatisticsMode::FreeStatistics);
    ASSERT_EQ(strict.status, ThresholdStatus::Found);
    EXPECT_LE(free.mu_a, strict.mu_a * (1 + 1e-9));
  }
}
