#pragma once

// Success probabilities of soft-filtering operations.
//
// A soft filter maps |a_i> -> sqrt(p)|b_i>|s> + sqrt(1-p)|0>|f> and must
// preserve every pairwise scalar product. For the COW pair states this fixes
// the information-state success probability p from the bit/bit overlap and the
// control-state success probability q from the bit/control overlap.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cowsf/errors.hpp"
#include "cowsf/photonics.hpp"

namespace cowsf {

enum class FilterStage { SF1, SF2 };

/// Success probabilities of one stage: p on |a0>, |0a>; q on |aa>.
struct SFOutcomeProbs {
  double p_info = 0.0;
  double q_control = 0.0;
};

struct StageAggregates {
  double p_stage = 0.0;                 ///< (1-f) p + f q
  double control_fraction_after = 0.0;  ///< f q / p_stage
};

/// p = (1 - <a0|a1>) / (1 - <b0|b1>) for a two-state soft filter.
inline double generic_success_probability(double overlap_in, double overlap_out) {
  if (!(overlap_in >= 0.0 && overlap_in < 1.0) || !(overlap_out >= 0.0 && overlap_out < 1.0)) {
    throw argument_error("overlaps must lie in [0,1)");
  }
  if (overlap_out > overlap_in) {
    throw infeasible_error("soft filtering cannot decrease distinguishability (overlap_out > overlap_in)");
  }
  return (1.0 - overlap_in) / (1.0 - overlap_out);
}

namespace detail {

// Relative slack admitted on mu_b + mu_e >= mu_a, so the beam-splitter
// boundary survives the rounding of mu_e = mu_a - mu_b.
inline constexpr double kFeasibilitySlack = 1e-12;

inline void require_stage_inputs(MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e) {
  if (mu_a.is_infinite() || !(mu_a.value() > 0.0)) throw argument_error("mu_a must be finite and > 0");
  if (mu_b.is_infinite()) throw argument_error("mu_b must be finite");
  const MeanPhotonNumber out = mu_b + mu_e;
  if (out.is_finite() && out.value() < mu_a.value() * (1.0 - kFeasibilitySlack)) {
    throw infeasible_error("mu_b + mu_e = " + out.to_string() + " is below mu_a = " + mu_a.to_string());
  }
}

// Bit/bit overlap preservation: e^{-mu_a} = p e^{-(mu_b+mu_e)} + (1 - p).
inline double info_success(MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e) {
  const MeanPhotonNumber out = mu_b + mu_e;
  if (out.is_infinite()) return one_minus_exp_neg(mu_a.value());
  if (out.value() <= mu_a.value()) return 1.0;
  return std::min(1.0, std::expm1(-mu_a.value()) / std::expm1(-out.value()));
}

// <E|e0> for SF1's control-state ancilla: cos(eps'/2) with cos eps' = e^{-mu_e1}.
inline double sf1_ancilla_overlap(MeanPhotonNumber mu_e1) {
  if (mu_e1.is_infinite()) return std::numbers::sqrt2 / 2.0;
  return std::sqrt((1.0 + std::exp(-mu_e1.value())) / 2.0);
}

// Bit/control overlap after the stage, success branch only (without sqrt(pq)).
inline double cross_overlap_out(FilterStage stage, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e) {
  if (stage == FilterStage::SF1) return std::exp(-mu_b.value() / 2.0) * sf1_ancilla_overlap(mu_e);
  const MeanPhotonNumber out = mu_b + mu_e;
  return out.is_infinite() ? 0.0 : std::exp(-out.value() / 2.0);
}

inline double cross_residual(FilterStage stage, MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e,
                             double p, double q) {
  const double lhs = std::exp(-mu_a.value() / 2.0);
  const double rhs = std::sqrt(p * q) * cross_overlap_out(stage, mu_b, mu_e) + std::sqrt((1.0 - p) * (1.0 - q));
  return std::abs(lhs - rhs);
}

inline double info_residual(MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e, double p) {
  const double lhs = std::exp(-mu_a.value());
  const double rhs = p * exp_neg(mu_b + mu_e) + (1.0 - p);
  return std::abs(lhs - rhs);
}

}  // namespace detail

/// SF1: p from the bit/bit overlap, q solved from the bit/control overlap
///   e^{-mu_a/2} = sqrt(p q) e^{-mu_b/2} kappa + sqrt((1-p)(1-q)),
///   kappa = sqrt((1 + e^{-mu_e1}) / 2).
/// Writing sqrt(q) = cos(theta) turns the right side into R cos(theta - phi);
/// of the two roots the one with the smaller residual wins, ties going to the
/// larger q.
inline SFOutcomeProbs sf1_probs(MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e1) {
  detail::require_stage_inputs(mu_a, mu_b, mu_e1);
  const double p = detail::info_success(mu_a, mu_b, mu_e1);
  const double a = std::sqrt(p) * detail::cross_overlap_out(FilterStage::SF1, mu_b, mu_e1);
  const double b = std::sqrt(std::max(0.0, 1.0 - p));
  const double r = std::hypot(a, b);
  const double c = std::exp(-mu_a.value() / 2.0);
  if (c > r * (1.0 + 1e-12)) throw infeasible_error("SF1 admits no unitary solution for these intensities");

  const double phi = std::acos(std::clamp(a / r, -1.0, 1.0));
  const double spread = std::acos(std::clamp(c / r, -1.0, 1.0));

  struct Root {
    double q;
    double residual;
  };
  const auto root_at = [&](double theta) {
    const double cq = std::cos(theta);
    const double q = std::clamp(cq * cq, 0.0, 1.0);
    return Root{q, detail::cross_residual(FilterStage::SF1, mu_a, mu_b, mu_e1, p, q)};
  };
  Root best = root_at(phi - spread);
  const Root other = root_at(phi + spread);
  const bool tie = std::abs(other.residual - best.residual) <= 1e-12;
  if ((!tie && other.residual < best.residual) || (tie && other.q > best.q)) best = other;
  if (best.residual >= 1e-9) throw infeasible_error("SF1 root selection failed to satisfy unitarity");
  return {p, best.q};
}

/// SF2: p as for SF1, q = p e^{mu_a - mu_b - mu_e2} (zero for infinite mu_e2).
inline SFOutcomeProbs sf2_probs(MeanPhotonNumber mu_a, MeanPhotonNumber mu_b, MeanPhotonNumber mu_e2) {
  detail::require_stage_inputs(mu_a, mu_b, mu_e2);
  const double p = detail::info_success(mu_a, mu_b, mu_e2);
  if (mu_e2.is_infinite()) return {p, 0.0};
  const double q = p * std::exp(mu_a.value() - mu_b.value() - mu_e2.value());
  return {p, std::min(q, p)};
}

/// Largest violation of scalar-product preservation for the given stage:
/// max of the bit/bit and the bit/control overlap equations.
inline double unitarity_residual(FilterStage stage, MeanPhotonNumber mu_a, MeanPhotonNumber mu_b,
                                 MeanPhotonNumber mu_e, const SFOutcomeProbs& probs) {
  detail::require_probability(probs.p_info, "p_info");
  detail::require_probability(probs.q_control, "q_control");
  return std::max(detail::info_residual(mu_a, mu_b, mu_e, probs.p_info),
                  detail::cross_residual(stage, mu_a, mu_b, mu_e, probs.p_info, probs.q_control));
}

inline StageAggregates stage_aggregates(double f, const SFOutcomeProbs& probs) {
  if (!(f >= 0.0 && f < 1.0)) throw argument_error("f must lie in [0,1)");
  const double p_stage = (1.0 - f) * probs.p_info + f * probs.q_control;
  if (!(p_stage > 0.0)) throw degenerate_stage_error("stage success probability is zero");
  return {p_stage, f * probs.q_control / p_stage};
}

}  // namespace cowsf
