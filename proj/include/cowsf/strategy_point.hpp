#pragma once

#include "cowsf/photonics.hpp"

namespace cowsf {

/// Long-run outcome of an attack, per signal Alice sends.
struct StrategyPoint {
  double emit_fraction = 0.0;             ///< pulses delivered to Bob per consumed signal
  double control_fraction = 0.0;          ///< controls among delivered pulses
  double eve_info_per_emitted_bit = 0.0;  ///< bits Eve holds per delivered bit signal
  MeanPhotonNumber mu_delivered{};        ///< intensity of the delivered pulses
};

/// Expected per-renewal-cycle tallies; ratios of these give a StrategyPoint.
struct CycleExpectations {
  double consumed = 0.0;
  double emitted = 0.0;
  double controls = 0.0;
  double eve_info = 0.0;  ///< summed over delivered bit signals

  double bits() const noexcept { return emitted - controls; }

  StrategyPoint to_point(MeanPhotonNumber mu_delivered) const noexcept {
    StrategyPoint pt;
    pt.emit_fraction = consumed > 0.0 ? emitted / consumed : 0.0;
    pt.control_fraction = emitted > 0.0 ? controls / emitted : 0.0;
    pt.eve_info_per_emitted_bit = bits() > 0.0 ? eve_info / bits() : 0.0;
    pt.mu_delivered = mu_delivered;
    return pt;
  }
};

}  // namespace cowsf
