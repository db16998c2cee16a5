#pragma once

// Deterministic domain rules turning heating observations (plus age band and
// housing type) into a main heating type and its energy source. The clause
// order is significant and must not be reordered. Gaps return Unknown rather
// than a guessed default; the evaluation side scores Unknown as incorrect.

#include "facade/core.hpp"

namespace facade {

inline constexpr HeatingType infer_heating_type(const HeatingObservation& obs) {
  HeatingType heating = HeatingType::Unknown;
  if (obs.radiators && obs.water_filled) {
    heating = HeatingType::WaterRads;
  } else if (obs.panel) {
    heating = HeatingType::ElectricPanels;
  } else if (obs.storage) {
    heating = HeatingType::ElectricStorage;
  }
  if (!obs.air_vent && !obs.radiators && !obs.panel && !obs.storage) {
    heating = HeatingType::Underfloor;
  }
  if (obs.air_vent && !obs.radiators && !obs.panel && !obs.storage) {
    heating = HeatingType::WarmAir;
  }
  return heating;
}

// "Building age >= 1970" is applied at band granularity: bands whose
// interval starts at or after 1970. ">5 units" is the EIA "5 or more
// units" category.
inline constexpr bool band_starts_1970_or_later(AgeBand band) {
  return band == AgeBand::Y1970_1990 || band == AgeBand::Y1990_2020 ||
         band == AgeBand::Y2020_Now;
}

inline constexpr EnergySource infer_energy_source(AgeBand band,
                                                  BuildingType btype,
                                                  const HeatingObservation& obs,
                                                  HeatingType heating) {
  if (band_starts_1970_or_later(band) && btype == BuildingType::Units5Plus &&
      !obs.panel && !obs.storage) {
    return EnergySource::Community;
  }
  if (obs.water_filled) {
    return EnergySource::Gas;
  }
  if (heating == HeatingType::Underfloor || obs.panel || obs.storage) {
    return EnergySource::Electric;
  }
  return EnergySource::Unknown;
}

}  // namespace facade
