#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cowsf/photonics.hpp"

using namespace cowsf;

namespace {

double h2_oracle(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -(x * std::log(x) + (1 - x) * std::log(1 - x)) / std::log(2.0);
}

}  // namespace

TEST(MeanPhotonNumber, RejectsNegativeAndNan) {
  EXPECT_THROW(MeanPhotonNumber(-1e-9), argument_error);
  EXPECT_THROW(MeanPhotonNumber(std::nan("")), argument_error);
  EXPECT_NO_THROW(MeanPhotonNumber(0.0));
}

TEST(MeanPhotonNumber, InfiniteOrdersAboveFinite) {
  const auto inf = MeanPhotonNumber::infinite();
  EXPECT_TRUE(inf.is_infinite());
  EXPECT_GT(inf, MeanPhotonNumber(1e300));
  EXPECT_EQ(inf, MeanPhotonNumber::infinite());
  EXPECT_EQ((MeanPhotonNumber(2.0) + inf), inf);
  EXPECT_DOUBLE_EQ((MeanPhotonNumber(2.0) + MeanPhotonNumber(0.5)).value(), 2.5);
}

TEST(MeanPhotonNumber, ParseRoundTrip) {
  EXPECT_TRUE(MeanPhotonNumber::parse("inf").is_infinite());
  EXPECT_DOUBLE_EQ(MeanPhotonNumber::parse("0.25").value(), 0.25);
  EXPECT_THROW(MeanPhotonNumber::parse("0.25x"), argument_error);
  EXPECT_THROW(MeanPhotonNumber::parse("-1"), argument_error);
  EXPECT_EQ(MeanPhotonNumber::parse(MeanPhotonNumber(0.1).to_string()), MeanPhotonNumber(0.1));
}

TEST(ProtocolParams, Validation) {
  ProtocolParams p;
  EXPECT_NO_THROW(p.validate());
  p.f = 1.0;
  EXPECT_THROW(p.validate(), argument_error);
  p.f = 0.1;
  p.eta = 0.0;
  EXPECT_THROW(p.validate(), argument_error);
  p.eta = 0.1;
  p.length_km = -1;
  EXPECT_THROW(p.validate(), argument_error);
  p.length_km = 0;
  p.mu_a = MeanPhotonNumber::infinite();
  EXPECT_THROW(p.validate(), argument_error);
}

TEST(Transmittance, Examples) {
  EXPECT_DOUBLE_EQ(transmittance(0.25, 0), 1.0);
  EXPECT_NEAR(transmittance(0.25, 40), 0.1, 1e-15);
  EXPECT_NEAR(transmittance(0.25, 100), std::pow(10.0, -2.5), 1e-15);
  EXPECT_NEAR(transmittance(0.25, 100), 0.0031623, 1e-7);
  EXPECT_THROW(transmittance(-0.1, 1), argument_error);
  EXPECT_THROW(transmittance(0.1, -1), argument_error);
}

TEST(Transmittance, Multiplicative) {
  for (double a = 0; a <= 200; a += 17.5) {
    for (double b = 0; b <= 150; b += 23.0) {
      EXPECT_NEAR(transmittance(0.25, a + b), transmittance(0.25, a) * transmittance(0.25, b), 1e-12);
    }
  }
}

TEST(BinaryEntropy, Examples) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_NEAR(binary_entropy(0.11), h2_oracle(0.11), 1e-14);
  EXPECT_NEAR(binary_entropy(0.11), 0.4999160, 1e-6);
  EXPECT_THROW(binary_entropy(-0.01), argument_error);
  EXPECT_THROW(binary_entropy(1.01), argument_error);
}

TEST(BinaryEntropy, SymmetricOnFineGrid) {
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    EXPECT_NEAR(binary_entropy(x), binary_entropy(1.0 - x), 1e-12) << x;
  }
}

TEST(Holevo, Examples) {
  EXPECT_EQ(holevo_binary(MeanPhotonNumber(0.0)), 0.0);
  EXPECT_EQ(holevo_binary(MeanPhotonNumber::infinite()), 1.0);
  const double x = (1.0 - std::exp(-0.2)) / 2.0;
  EXPECT_NEAR(x, 0.090635, 1e-6);
  EXPECT_NEAR(holevo_binary(MeanPhotonNumber(0.2)), h2_oracle(x), 1e-14);
}

TEST(Holevo, NondecreasingInIntensity) {
  double prev = 0.0;
  for (double mu = 0.0; mu < 40.0; mu += 0.01) {
    const double v = holevo_binary(MeanPhotonNumber(mu));
    EXPECT_GE(v, prev) << mu;
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(Click, Examples) {
  EXPECT_EQ(click_probability(0.1, MeanPhotonNumber(0.0)), 0.0);
  EXPECT_EQ(click_probability(1.0, MeanPhotonNumber::infinite()), 1.0);
  EXPECT_NEAR(click_probability(0.1, MeanPhotonNumber(0.5)), 1.0 - std::exp(-0.05), 1e-15);
  EXPECT_NEAR(click_probability(0.1, MeanPhotonNumber(0.5)), 0.048771, 1e-6);
}

TEST(Click, EqualsVacuumSearchOfScaledIntensity) {
  for (double eta : {0.01, 0.1, 0.5, 1.0}) {
    for (double mu = 0.0; mu < 5.0; mu += 0.037) {
      EXPECT_DOUBLE_EQ(click_probability(eta, MeanPhotonNumber(mu)), vacuum_search_success(MeanPhotonNumber(eta * mu)));
    }
  }
}

TEST(VacuumSearch, Examples) {
  EXPECT_EQ(vacuum_search_success(MeanPhotonNumber(0.0)), 0.0);
  EXPECT_EQ(vacuum_search_success(MeanPhotonNumber::infinite()), 1.0);
  EXPECT_NEAR(vacuum_search_success(MeanPhotonNumber(0.5)), 0.393469, 1e-6);
  double prev = -1.0;
  for (double mu = 0.0; mu < 10.0; mu += 0.05) {
    const double v = vacuum_search_success(MeanPhotonNumber(mu));
    EXPECT_GT(v, prev);
    prev = v;
  }
}
