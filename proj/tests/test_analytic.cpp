#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cowsf/analytic.hpp"

using namespace cowsf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MeanPhotonNumber mpn(double v) { return std::isinf(v) ? MeanPhotonNumber::infinite() : MeanPhotonNumber(v); }

ProtocolParams protocol(double mu_a, double f = 0.1) {
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
  a.mu_e1 = mpn(e1);
  a.mu_e2 = mpn(e2);
  return a;
}

void expect_points_near(const StrategyPoint& x, const StrategyPoint& y, double tol) {
  EXPECT_NEAR(x.emit_fraction, y.emit_fraction, tol);
  EXPECT_NEAR(x.control_fraction, y.control_fraction, tol);
  EXPECT_NEAR(x.eve_info_per_emitted_bit, y.eve_info_per_emitted_bit, tol);
  EXPECT_EQ(x.mu_delivered, y.mu_delivered);
}

}  // namespace

TEST(Analytic, LosslessSingleSecondStageClosedForm) {
  // t1 = 0, t2 = 1 with p2 = q2 = 1: the opening is delivered iff the next
  // signal is a bit whose vacuum slot is found.
  const double a = 0.5, b = 0.3, e2 = 0.2, f = 0.1;
  const auto pt = expected_statistics(protocol(a, f), attack(0, 1, b, kInf, e2));
  const double s = (1 - f) * (1 - std::exp(-a));
  const double v = 1 - std::exp(-(b + e2));
  EXPECT_NEAR(pt.emit_fraction, (1 - f) * v / (1 / s + 1), 1e-14);
  EXPECT_EQ(pt.control_fraction, 0.0);
  EXPECT_NEAR(pt.eve_info_per_emitted_bit, 0.5, 1e-14);
  EXPECT_EQ(pt.mu_delivered, MeanPhotonNumber(b));
}

TEST(Analytic, NoControlsMeansNoDeliveredControls) {
  const auto pt = expected_statistics(protocol(0.4, 0.0), attack(2, 5, 0.2, 0.5, 0.5));
  EXPECT_EQ(pt.control_fraction, 0.0);
  EXPECT_GT(pt.emit_fraction, 0.0);
}

TEST(Analytic, MatchesEnumerationOnGrid) {
  const double mus[] = {0.05, 0.3, 0.9};
  const double fs[] = {0.0, 0.1, 0.3};
  for (const double a : mus) {
    for (const double f : fs) {
      for (int t1 = 0; t1 <= 3; ++t1) {
        for (int t2 : {1, 2, 5}) {
          for (const double b_frac : {0.3, 1.0, 1.6}) {
            const double b = b_frac * a;
            for (const double off : {0.0, 0.2, kInf}) {
              const double e = std::max(0.0, a - b) + off;
              const auto p = protocol(a, f);
              const auto at = attack(t1, t2, b, e, e);
              const auto en = enumerate_small(p, at, enumeration_cap(p, at));
              const auto an = expected_statistics(p, at);
              SCOPED_TRACE(testing::Message() << a << ' ' << f << ' ' << t1 << ' ' << t2 << ' ' << b << ' ' << e);
              expect_points_near(an, en.point, 1e-8);
            }
          }
        }
      }
    }
  }
}

TEST(Analytic, MatchesMonteCarlo) {
  struct Case {
    double a, f;
    int t1, t2;
    double b, e1, e2;
  };
  const Case cases[] = {{0.5, 0.1, 1, 3, 0.2, 0.4, 0.4},
                        {0.2, 0.2, 0, 8, 0.1, kInf, 0.3},
                        {0.8, 0.05, 3, 2, 0.9, 0.0, 1.0}};
  for (const auto& c : cases) {
    const auto p = protocol(c.a, c.f);
    const auto at = attack(c.t1, c.t2, c.b, c.e1, c.e2);
    const auto an = expected_statistics(p, at);
    const auto est = estimate_point(run_attack(generate_sequence(1000000, c.f, 17), p, at, 18), at.mu_b);
    EXPECT_LT(std::abs(est.point.emit_fraction - an.emit_fraction), 4 * est.standard_error.emit_fraction + 1e-12);
    EXPECT_LT(std::abs(est.point.control_fraction - an.control_fraction),
              4 * est.standard_error.control_fraction + 1e-12);
    EXPECT_LT(std::abs(est.point.eve_info_per_emitted_bit - an.eve_info_per_emitted_bit),
              4 * est.standard_error.eve_info_per_emitted_bit + 1e-12);
  }
}

TEST(Analytic, FractionsInRangeOnRandomAttacks) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = 1e-3 + u(gen);
    const double b = 1e-3 + 2 * a * u(gen);
    const double e1 = u(gen) < 0.1 ? kInf : std::max(0.0, a - b) + 3 * u(gen);
    const double e2 = u(gen) < 0.1 ? kInf : std::max(0.0, a - b) + 3 * u(gen);
    const auto pt = expected_statistics(protocol(a, 0.4 * u(gen)),
                                        attack(static_cast<int>(gen() % 9), 1 + static_cast<int>(gen() % 300), b, e1, e2));
    EXPECT_GE(pt.emit_fraction, 0.0);
    EXPECT_LE(pt.emit_fraction, 1.0);
    EXPECT_GE(pt.control_fraction, 0.0);
    EXPECT_LE(pt.control_fraction, 1.0);
    EXPECT_GE(pt.eve_info_per_emitted_bit, 0.0);
    EXPECT_LE(pt.eve_info_per_emitted_bit, 1.0 + 1e-12);
  }
}

TEST(Analytic, InfeasibleAttackThrows) {
  EXPECT_THROW(expected_statistics(protocol(0.5), attack(1, 1, 0.1, 0.1, 0.4)), infeasible_error);
  EXPECT_THROW(expected_statistics(protocol(0.5), attack(-1, 1, 0.1, kInf, kInf)), argument_error);
}

TEST(Enumeration, ShortCapReportsResidual) {
  const auto p = protocol(0.05);
  const auto at = attack(1, 2, 0.1, kInf, kInf);
  try {
    enumerate_small(p, at, 10);
    FAIL() << "expected truncation_error";
  } catch (const truncation_error& e) {
    EXPECT_GT(e.residual_mass(), 0.1);
  }
  EXPECT_LE(enumerate_small(p, at, enumeration_cap(p, at)).residual_mass, 1e-9);
}
