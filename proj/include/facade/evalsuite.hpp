#pragma once

// Metric computation over a join of predicted assessments and ground truth,
// plus report rendering (aligned text table or CSV). Every metric carries
// its denominator and the coverage fraction so absent predictions are never
// silently dropped.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "facade/core.hpp"
#include "facade/dataset.hpp"

namespace facade {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyInput : EvalError {
  using EvalError::EvalError;
};
struct JoinError : EvalError {
  using EvalError::EvalError;
};

enum class AgeMetricMode { Band, Midpoint };

// Band mode: zero when the truth year falls inside the predicted interval,
// otherwise years to the nearest interval edge. Band-vs-band compares the
// nearest edges of the two intervals. Midpoint mode compares representative
// years directly.
inline double age_error_years(AgeBand pred, const GroundTruthAge& truth,
                              AgeMetricMode mode = AgeMetricMode::Band) {
  if (mode == AgeMetricMode::Midpoint) {
    int truth_year = truth.exact_year ? *truth.exact_year
                                      : representative_year(*truth.band);
    return std::abs(representative_year(pred) - truth_year);
  }
  YearInterval p = band_interval(pred);
  if (truth.exact_year) {
    int y = *truth.exact_year;
    if (y < p.lo) return p.lo - y;
    if (y > p.hi) return y - p.hi;  // right edge of the half-open interval
    return 0.0;
  }
  if (*truth.band == pred) return 0.0;
  YearInterval t = band_interval(*truth.band);
  if (p.hi <= t.lo) return t.lo - p.hi;
  if (t.hi <= p.lo) return p.lo - t.hi;
  return 0.0;
}

// One metric's value together with its denominator and the share of joined
// properties that contributed a usable prediction.
struct MetricValue {
  double value = 0.0;
  int n = 0;
  double coverage = 0.0;
};

struct EvaluationReport {
  MetricValue age_avg_error_years;
  MetricValue building_type_pct;
  MetricValue heating_type_pct;
  MetricValue energy_source_pct;
  MetricValue window_perfect_pct;
  MetricValue window_approx_pct;
  MetricValue lighting_rmse_pct;
  MetricValue energy_mean_abs_diff;
  std::optional<MetricValue> epc_rmse;
  int joined_properties = 0;
};

namespace detail {

template <class T>
double percent_correct(const std::vector<std::pair<std::optional<T>, T>>& pairs) {
  if (pairs.empty()) throw EmptyInput("no pairs");
  int matches = 0;
  for (const auto& [pred, truth] : pairs) {
    if (pred && *pred == truth) ++matches;
  }
  return 100.0 * matches / static_cast<double>(pairs.size());
}

}  // namespace detail

// Unknown or absent predictions count as mismatch; the caller excludes
// properties whose stage never ran.
template <class T>
double categorical_accuracy(
    const std::vector<std::pair<std::optional<T>, T>>& pairs) {
  return detail::percent_correct(pairs);
}

// Perfect = exact match; approx = the unordered {double, high-efficiency}
// pair. The two buckets are disjoint.
inline std::pair<double, double> window_accuracy(
    const std::vector<std::pair<WindowType, WindowType>>& pairs) {
  if (pairs.empty()) throw EmptyInput("no window pairs");
  int perfect = 0;
  int approx = 0;
  for (const auto& [pred, truth] : pairs) {
    if (pred == truth) {
      ++perfect;
    } else if ((pred == WindowType::DoubleGlazed &&
                truth == WindowType::HighEfficiencyDoubleOrTriple) ||
               (pred == WindowType::HighEfficiencyDoubleOrTriple &&
                truth == WindowType::DoubleGlazed)) {
      ++approx;
    }
  }
  double n = static_cast<double>(pairs.size());
  return {100.0 * perfect / n, 100.0 * approx / n};
}

inline double lighting_rmse(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw EmptyInput("no lighting pairs");
  double sum = 0.0;
  for (const auto& [pred, truth] : pairs) {
    sum += (pred - truth) * (pred - truth);
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

inline double energy_mean_abs_diff(
    const std::vector<std::pair<EnergyEstimate, double>>& pairs) {
  if (pairs.empty()) throw EmptyInput("no energy pairs");
  double sum = 0.0;
  for (const auto& [pred, truth] : pairs) {
    sum += std::abs(pred.point_kwh_m2() - truth);
  }
  return sum / static_cast<double>(pairs.size());
}

inline double epc_rmse(const std::vector<std::pair<EpcRating, EpcRating>>& pairs) {
  if (pairs.empty()) throw EmptyInput("no EPC pairs");
  double sum = 0.0;
  for (const auto& [pred, truth] : pairs) {
    double d = epc_numeric(pred) - epc_numeric(truth);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

struct EvaluateOptions {
  AgeMetricMode age_mode = AgeMetricMode::Band;
};

inline EvaluationReport evaluate(
    const std::vector<PropertyAssessment>& assessments,
    const std::vector<GroundTruthRecord>& truth,
    const EvaluateOptions& options = {}) {
  std::map<std::string, const GroundTruthRecord*> by_id;
  for (const auto& rec : truth) by_id[rec.property_id] = &rec;

  std::vector<std::pair<const PropertyAssessment*, const GroundTruthRecord*>>
      joined;
  std::vector<std::string> unmatched;
  for (const auto& a : assessments) {
    auto it = by_id.find(a.property_id);
    if (it == by_id.end()) {
      unmatched.push_back(a.property_id);
      continue;
    }
    joined.emplace_back(&a, it->second);
  }
  if (joined.empty()) {
    std::string ids;
    for (const auto& id : unmatched) ids += " " + id;
    throw JoinError("no property ids in common; unmatched predictions:" + ids);
  }

  EvaluationReport report;
  report.joined_properties = static_cast<int>(joined.size());
  double total = static_cast<double>(joined.size());

  // Age
  {
    std::vector<double> errors;
    for (const auto& [a, t] : joined) {
      if (a->age_band) errors.push_back(age_error_years(*a->age_band, t->age, options.age_mode));
    }
    if (errors.empty()) throw EmptyInput("no age predictions");
    double sum = 0.0;
    for (double e : errors) sum += e;
    report.age_avg_error_years = {sum / errors.size(),
                                  static_cast<int>(errors.size()),
                                  errors.size() / total};
  }

  // Building type: in the denominator whenever the stage ran.
  {
    std::vector<std::pair<std::optional<BuildingType>, BuildingType>> pairs;
    for (const auto& [a, t] : joined) {
      if (a->stage_ran(PromptId::P2)) pairs.emplace_back(a->building_type, t->building_type);
    }
    report.building_type_pct = {categorical_accuracy(pairs),
                                static_cast<int>(pairs.size()),
                                pairs.size() / total};
  }

  // Heating type and energy source: Unknown stays in the denominator and
  // scores as wrong.
  {
    std::vector<std::pair<std::optional<HeatingType>, HeatingType>> hpairs;
    std::vector<std::pair<std::optional<EnergySource>, EnergySource>> spairs;
    for (const auto& [a, t] : joined) {
      if (!a->stage_ran(PromptId::P3)) continue;
      hpairs.emplace_back(a->heating_type, t->heating_type);
      spairs.emplace_back(a->energy_source, t->energy_source);
    }
    report.heating_type_pct = {categorical_accuracy(hpairs),
                               static_cast<int>(hpairs.size()),
                               hpairs.size() / total};
    report.energy_source_pct = {categorical_accuracy(spairs),
                                static_cast<int>(spairs.size()),
                                spairs.size() / total};
  }

  // Windows
  {
    std::vector<std::pair<WindowType, WindowType>> pairs;
    for (const auto& [a, t] : joined) {
      if (a->window_type) pairs.emplace_back(*a->window_type, t->window_type);
    }
    auto [perfect, approx] = window_accuracy(pairs);
    double coverage = pairs.size() / total;
    report.window_perfect_pct = {perfect, static_cast<int>(pairs.size()), coverage};
    report.window_approx_pct = {approx, static_cast<int>(pairs.size()), coverage};
  }

  // Lighting
  {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [a, t] : joined) {
      if (a->lighting) {
        pairs.emplace_back(a->lighting->percent_low_energy,
                           t->lighting.percent_low_energy);
      }
    }
    report.lighting_rmse_pct = {lighting_rmse(pairs),
                                static_cast<int>(pairs.size()),
                                pairs.size() / total};
  }

  // Energy consumption
  {
    std::vector<std::pair<EnergyEstimate, double>> pairs;
    for (const auto& [a, t] : joined) {
      if (a->energy_estimate) pairs.emplace_back(*a->energy_estimate, t->energy_kwh_m2);
    }
    report.energy_mean_abs_diff = {energy_mean_abs_diff(pairs),
                                   static_cast<int>(pairs.size()),
                                   pairs.size() / total};
  }

  // EPC (only when any prediction carries a rating)
  {
    std::vector<std::pair<EpcRating, EpcRating>> pairs;
    for (const auto& [a, t] : joined) {
      if (a->epc_rating) pairs.emplace_back(*a->epc_rating, t->epc);
    }
    if (!pairs.empty()) {
      report.epc_rmse = MetricValue{epc_rmse(pairs),
                                    static_cast<int>(pairs.size()),
                                    pairs.size() / total};
    }
  }

  return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render_report_text(const EvaluationReport& report,
                                      std::string_view label = "AI") {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  auto row = [&](std::string_view name, const MetricValue& m) {
    out << "  " << std::setw(36) << std::left << name << std::right
        << std::setw(10) << m.value << "   n=" << m.n
        << "  coverage=" << std::setprecision(2) << m.coverage * 100.0 << "%\n";
  };
  out << "Evaluation report (" << label << ", " << report.joined_properties
      << " properties)\n";
  row("Age Av error (years)", report.age_avg_error_years);
  row("Building Type (% correct)", report.building_type_pct);
  row("Heating type (% correct)", report.heating_type_pct);
  row("Energy source (% correct)", report.energy_source_pct);
  row("Window type perfect (%)", report.window_perfect_pct);
  row("Window type approx (%)", report.window_approx_pct);
  row("Lighting Eff RMSE (% low energy)", report.lighting_rmse_pct);
  row("Energy consump Av diff (kwh/m2)", report.energy_mean_abs_diff);
  if (report.epc_rmse) row("EPC rating RMSE (letters)", *report.epc_rmse);
  return std::move(out).str();
}

inline std::string render_report_csv(const EvaluationReport& report,
                                     std::string_view label = "AI") {
  std::ostringstream out;
  out << "label,age_avg_error_years,building_type_pct,heating_type_pct,"
         "energy_source_pct,window_perfect_pct,window_approx_pct,"
         "lighting_rmse_pct,energy_mean_abs_diff,epc_rmse\n";
  out << label;
  out << std::fixed << std::setprecision(6);
  for (const MetricValue* m :
       {&report.age_avg_error_years, &report.building_type_pct,
        &report.heating_type_pct, &report.energy_source_pct,
        &report.window_perfect_pct, &report.window_approx_pct,
        &report.lighting_rmse_pct, &report.energy_mean_abs_diff}) {
    out << "," << m->value;
  }
  if (report.epc_rmse) {
    out << "," << report.epc_rmse->value;
  } else {
    out << ",";
  }
  out << "\n";
  return std::move(out).str();
}

}  // namespace facade
