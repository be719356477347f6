#pragma once

// Coherent-state algebra shared by every other module: intensities with an
// exact infinite value, channel loss, threshold detection, binary entropy and
// the Holevo quantity of two equiprobable vacuum/pulse pair states.

#include <cmath>
#include <compare>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "cowsf/errors.hpp"

namespace cowsf {

/// Mean photon number of a coherent pulse. Infinite is a first-class value:
/// every formula below branches on it so the limits come out exact.
class MeanPhotonNumber {
 public:
  constexpr MeanPhotonNumber() = default;

  explicit MeanPhotonNumber(double value) : value_(value) {
    if (!(value >= 0.0)) {
      throw argument_error("mean photon number must be non-negative, got " + std::to_string(value));
    }
  }

  static constexpr MeanPhotonNumber infinite() noexcept {
    MeanPhotonNumber mu;
    mu.value_ = std::numeric_limits<double>::infinity();
    return mu;
  }

  /// Parses a decimal number or one of "inf", "infinity", "+inf".
  static MeanPhotonNumber parse(std::string_view text) {
    if (text == "inf" || text == "+inf" || text == "infinity" || text == "Infinity") return infinite();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text), &used);
    } catch (const std::exception&) {
      throw argument_error("cannot parse mean photon number '" + std::string(text) + "'");
    }
    if (used != text.size()) throw argument_error("cannot parse mean photon number '" + std::string(text) + "'");
    return MeanPhotonNumber(v);
  }

  constexpr bool is_infinite() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const noexcept { return !is_infinite(); }

  /// +infinity for the Infinite value.
  constexpr double value() const noexcept { return value_; }

  std::string to_string() const {
    if (is_infinite()) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend MeanPhotonNumber operator+(MeanPhotonNumber a, MeanPhotonNumber b) noexcept {
    if (a.is_infinite() || b.is_infinite()) return infinite();
    MeanPhotonNumber sum;
    sum.value_ = a.value_ + b.value_;
    return sum;
  }

  friend constexpr auto operator<=>(MeanPhotonNumber a, MeanPhotonNumber b) noexcept {
    return a.value_ <=> b.value_;
  }
  friend constexpr bool operator==(MeanPhotonNumber a, MeanPhotonNumber b) noexcept = default;

 private:
  double value_ = 0.0;
};

namespace detail {

inline void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw argument_error(std::string(what) + " must lie in [0,1], got " + std::to_string(x));
  }
}

// e^{-mu}, exact zero at infinity.
inline double exp_neg(MeanPhotonNumber mu) noexcept { return mu.is_infinite() ? 0.0 : std::exp(-mu.value()); }

// 1 - e^{-mu} without cancellation for small mu.
inline double one_minus_exp_neg(double mu) noexcept { return -std::expm1(-mu); }

}  // namespace detail

/// Alice, Bob and channel configuration.
struct ProtocolParams {
  MeanPhotonNumber mu_a{0.5};
  double f = 0.1;    ///< control-state emission probability
  double eta = 0.1;  ///< Bob's detector efficiency
  double delta_db_per_km = 0.25;
  double length_km = 0.0;

  void validate() const {
    if (!(mu_a.value() > 0.0) || mu_a.is_infinite()) throw argument_error("mu_a must be finite and > 0");
    if (!(f >= 0.0 && f < 1.0)) throw argument_error("f must lie in [0,1)");
    if (!(eta > 0.0 && eta <= 1.0)) throw argument_error("eta must lie in (0,1]");
    if (!(delta_db_per_km >= 0.0)) throw argument_error("attenuation must be non-negative");
    if (!(length_km >= 0.0)) throw argument_error("channel length must be non-negative");
  }
};

/// Power transmission of a fiber: 10^{-delta L / 10}.
inline double transmittance(double delta_db_per_km, double length_km) {
  if (!(delta_db_per_km >= 0.0) || !(length_km >= 0.0)) {
    throw argument_error("transmittance needs non-negative attenuation and length");
  }
  return std::pow(10.0, -delta_db_per_km * length_km / 10.0);
}

inline double transmittance(const ProtocolParams& p) { return transmittance(p.delta_db_per_km, p.length_km); }

/// Binary Shannon entropy in bits, with 0 log 0 = 0.
inline double binary_entropy(double x) {
  detail::require_probability(x, "binary_entropy argument");
  if (x == 0.0 || x == 1.0) return 0.0;
  if (x == 0.5) return 1.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Holevo quantity of {|0>|e>, |e>|0>} with |e|^2 = mu: h2[(1 - e^{-mu}) / 2].
/// Exactly 1 for the Infinite intensity.
inline double holevo_binary(MeanPhotonNumber mu_e) {
  if (mu_e.is_infinite()) return 1.0;
  const double c = std::exp(-mu_e.value());
  if (c > 0.5) return binary_entropy(detail::one_minus_exp_neg(mu_e.value()) / 2.0);
  // h2((1-c)/2) = 1 - sum_k c^{2k} / (2k(2k-1) ln 2). All terms shrink with
  // mu, so the result stays monotone where the direct form wobbles by an ulp.
  const double c2 = c * c;
  double term = c2;
  double sum = 0.0;
  for (int k = 1; k < 64 && term > 0.0; ++k) {
    sum += term / (2.0 * k * (2.0 * k - 1.0));
    term *= c2;
  }
  return 1.0 - sum / std::numbers::ln2;
}

/// Threshold detector of efficiency eta hit by a pulse of intensity mu.
inline double click_probability(double eta, MeanPhotonNumber mu) {
  detail::require_probability(eta, "detector efficiency");
  if (mu.is_infinite()) return eta > 0.0 ? 1.0 : 0.0;
  return detail::one_minus_exp_neg(eta * mu.value());
}

/// Probability of conclusively locating the vacuum slot of a bit pair state.
inline double vacuum_search_success(MeanPhotonNumber mu) {
  if (mu.is_infinite()) return 1.0;
  return detail::one_minus_exp_neg(mu.value());
}

}  // namespace cowsf
