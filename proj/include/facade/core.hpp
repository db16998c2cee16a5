#pragma once

// Core domain vocabulary for the facade-audit pipeline: building age bands,
// EIA housing categories, heating observations and derived heating/energy
// enums, window glazing, lighting percentages, energy estimates and EPC
// ratings, plus the pure conversions between them. Everything here is an
// immutable value type.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace facade {

// ---------------------------------------------------------------------------
// Age bands

enum class AgeBand : int {
  Before1900 = 0,
  Y1900_1930,
  Y1930_1950,
  Y1950_1970,
  Y1970_1990,
  Y1990_2020,
  Y2020_Now,
};

inline constexpr std::array<AgeBand, 7> kAllAgeBands = {
    AgeBand::Before1900, AgeBand::Y1900_1930, AgeBand::Y1930_1950,
    AgeBand::Y1950_1970, AgeBand::Y1970_1990, AgeBand::Y1990_2020,
    AgeBand::Y2020_Now};

// Half-open interval [lo, hi) for each band. Unbounded ends use sentinels
// wide enough that no real construction year escapes them.
struct YearInterval {
  int lo;
  int hi;
};

inline constexpr int kYearMin = -100000;
inline constexpr int kYearMax = 100000;

inline constexpr YearInterval band_interval(AgeBand band) {
  switch (band) {
    case AgeBand::Before1900: return {kYearMin, 1900};
    case AgeBand::Y1900_1930: return {1900, 1930};
    case AgeBand::Y1930_1950: return {1930, 1950};
    case AgeBand::Y1950_1970: return {1950, 1970};
    case AgeBand::Y1970_1990: return {1970, 1990};
    case AgeBand::Y1990_2020: return {1990, 2020};
    case AgeBand::Y2020_Now: return {2020, kYearMax};
  }
  return {kYearMin, kYearMax};  // unreachable
}

// Total: every year lands in exactly one half-open band.
inline constexpr AgeBand age_band_for_year(int year) {
  if (year < 1900) return AgeBand::Before1900;
  if (year < 1930) return AgeBand::Y1900_1930;
  if (year < 1950) return AgeBand::Y1930_1950;
  if (year < 1970) return AgeBand::Y1950_1970;
  if (year < 1990) return AgeBand::Y1970_1990;
  if (year < 2020) return AgeBand::Y1990_2020;
  return AgeBand::Y2020_Now;
}

// Interval midpoint for bounded bands; fixed constants for the open-ended
// ones. Used only by the midpoint age-error mode.
inline constexpr int representative_year(AgeBand band) {
  switch (band) {
    case AgeBand::Before1900: return 1890;
    case AgeBand::Y1900_1930: return 1915;
    case AgeBand::Y1930_1950: return 1940;
    case AgeBand::Y1950_1970: return 1960;
    case AgeBand::Y1970_1990: return 1980;
    case AgeBand::Y1990_2020: return 2005;
    case AgeBand::Y2020_Now: return 2022;
  }
  return 0;  // unreachable
}

inline std::string_view to_string(AgeBand band) {
  switch (band) {
    case AgeBand::Before1900: return "before 1900";
    case AgeBand::Y1900_1930: return "1900-1930";
    case AgeBand::Y1930_1950: return "1930-1950";
    case AgeBand::Y1950_1970: return "1950-1970";
    case AgeBand::Y1970_1990: return "1970-1990";
    case AgeBand::Y1990_2020: return "1990-2020";
    case AgeBand::Y2020_Now: return "2020-now";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Housing type (EIA categories)

enum class BuildingType : int {
  SingleFamilyDetached = 1,
  SingleFamilyAttached,
  Units2to4,
  Units5Plus,
  MobileHome,
};

inline constexpr std::array<BuildingType, 5> kAllBuildingTypes = {
    BuildingType::SingleFamilyDetached, BuildingType::SingleFamilyAttached,
    BuildingType::Units2to4, BuildingType::Units5Plus,
    BuildingType::MobileHome};

inline std::string_view to_string(BuildingType type) {
  switch (type) {
    case BuildingType::SingleFamilyDetached: return "single-family detached";
    case BuildingType::SingleFamilyAttached: return "single-family attached";
    case BuildingType::Units2to4: return "apartments in buildings with 2-4 units";
    case BuildingType::Units5Plus: return "apartments in buildings with 5 or more units";
    case BuildingType::MobileHome: return "mobile home";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Heating

// The five Y/N flags the heating prompt asks for. Always complete;
// water_filled is only meaningful alongside radiators but is kept as
// reported because the rule base reads it on its own.
struct HeatingObservation {
  bool air_vent = false;
  bool radiators = false;
  bool water_filled = false;
  bool panel = false;
  bool storage = false;

  bool operator==(const HeatingObservation&) const = default;
};

enum class HeatingType : int {
  WaterRads = 0,
  ElectricPanels,
  ElectricStorage,
  Underfloor,
  WarmAir,
  Unknown,
};

inline std::string_view to_string(HeatingType type) {
  switch (type) {
    case HeatingType::WaterRads: return "water rads";
    case HeatingType::ElectricPanels: return "electric panels";
    case HeatingType::ElectricStorage: return "electric storage";
    case HeatingType::Underfloor: return "underfloor";
    case HeatingType::WarmAir: return "warm air";
    case HeatingType::Unknown: return "unknown";
  }
  return "?";
}

enum class EnergySource : int {
  Community = 0,
  Gas,
  Electric,
  Unknown,
};

inline std::string_view to_string(EnergySource source) {
  switch (source) {
    case EnergySource::Community: return "community";
    case EnergySource::Gas: return "gas";
    case EnergySource::Electric: return "electric";
    case EnergySource::Unknown: return "unknown";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Windows and lighting

enum class WindowType : int {
  SingleGlazed = 1,
  DoubleGlazed = 2,
  HighEfficiencyDoubleOrTriple = 3,
};

inline std::string_view to_string(WindowType type) {
  switch (type) {
    case WindowType::SingleGlazed: return "single glazed";
    case WindowType::DoubleGlazed: return "double glazed";
    case WindowType::HighEfficiencyDoubleOrTriple:
      return "high efficiency double or triple glazed";
  }
  return "?";
}

// Percentage of low-energy lighting. Parsed predictions land on the
// quantized steps {0,20,...,100}; ground truth may carry any integer.
struct LightingPercent {
  double percent_low_energy = 0.0;

  bool operator==(const LightingPercent&) const = default;
};

// ---------------------------------------------------------------------------
// Energy estimate

struct EnergyEstimate {
  double low_kwh_m2 = 0.0;
  double high_kwh_m2 = 0.0;

  double point_kwh_m2() const { return (low_kwh_m2 + high_kwh_m2) / 2.0; }

  bool operator==(const EnergyEstimate&) const = default;
};

// ---------------------------------------------------------------------------
// EPC ratings

enum class EpcRating : int { A = 1, B, C, D, E, F, G };

inline constexpr int epc_numeric(EpcRating rating) {
  return static_cast<int>(rating);
}

inline char epc_letter(EpcRating rating) {
  return static_cast<char>('A' + epc_numeric(rating) - 1);
}

inline std::optional<EpcRating> epc_from_letter(char letter) {
  if (letter >= 'a' && letter <= 'g') letter = static_cast<char>(letter - 'a' + 'A');
  if (letter < 'A' || letter > 'G') return std::nullopt;
  return static_cast<EpcRating>(letter - 'A' + 1);
}

// ---------------------------------------------------------------------------
// Label -> enum lookups (case-insensitive exact match on the canonical
// labels above, plus the short forms used in ground-truth tables).

namespace detail {
inline std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}
}  // namespace detail

inline std::optional<AgeBand> age_band_from_string(std::string_view label) {
  std::string s = detail::ascii_lower(label);
  for (AgeBand band : kAllAgeBands) {
    if (s == to_string(band)) return band;
  }
  return std::nullopt;
}

inline std::optional<BuildingType> building_type_from_string(
    std::string_view label) {
  std::string s = detail::ascii_lower(label);
  for (BuildingType type : kAllBuildingTypes) {
    if (s == to_string(type)) return type;
  }
  if (s == "2-4 units") return BuildingType::Units2to4;
  if (s == ">5 units" || s == "5 or more units") return BuildingType::Units5Plus;
  if (s == "single-family detached") return BuildingType::SingleFamilyDetached;
  if (s == "single-family attached") return BuildingType::SingleFamilyAttached;
  if (s == "mobile home") return BuildingType::MobileHome;
  return std::nullopt;
}

inline std::optional<HeatingType> heating_type_from_string(
    std::string_view label) {
  std::string s = detail::ascii_lower(label);
  for (HeatingType type :
       {HeatingType::WaterRads, HeatingType::ElectricPanels,
        HeatingType::ElectricStorage, HeatingType::Underfloor,
        HeatingType::WarmAir, HeatingType::Unknown}) {
    if (s == to_string(type)) return type;
  }
  return std::nullopt;
}

inline std::optional<EnergySource> energy_source_from_string(
    std::string_view label) {
  std::string s = detail::ascii_lower(label);
  for (EnergySource source :
       {EnergySource::Community, EnergySource::Gas, EnergySource::Electric,
        EnergySource::Unknown}) {
    if (s == to_string(source)) return source;
  }
  return std::nullopt;
}

inline std::optional<WindowType> window_type_from_string(
    std::string_view label) {
  std::string s = detail::ascii_lower(label);
  for (WindowType type :
       {WindowType::SingleGlazed, WindowType::DoubleGlazed,
        WindowType::HighEfficiencyDoubleOrTriple}) {
    if (s == to_string(type)) return type;
  }
  if (s == "high efficiency double glazed") {
    return WindowType::HighEfficiencyDoubleOrTriple;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ground-truth age: either a precise construction year or just a band.

struct GroundTruthAge {
  std::optional<int> exact_year;
  std::optional<AgeBand> band;

  static GroundTruthAge from_year(int year) { return {year, std::nullopt}; }
  static GroundTruthAge from_band(AgeBand b) { return {std::nullopt, b}; }

  bool valid() const { return exact_year.has_value() != band.has_value(); }

  bool operator==(const GroundTruthAge&) const = default;
};

}  // namespace facade
