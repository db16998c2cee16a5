// Acceptance gate: one pass/fail line per criterion, non-zero exit on any
// failure. Criterion 9 (live smoke) is skipped unless an API key is present.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facade/dataset.hpp"
#include "facade/evalsuite.hpp"
#include "facade/extract.hpp"
#include "facade/pipeline.hpp"
#include "facade/rulebase.hpp"

using namespace facade;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& note = "") {
  std::printf("criterion %d: %s%s%s\n", criterion, ok ? "PASS" : "FAIL",
              note.empty() ? "" : " - ", note.c_str());
  if (!ok) ++g_failures;
}

fs::path fixtures() { return fs::path(FACADE_FIXTURES_DIR); }

const PromptRegistry& registry() {
  static PromptRegistry reg = PromptRegistry::load(FACADE_PROMPTS_DIR);
  return reg;
}

// Independent transcription of the published rule table, written against Y/N
// characters so it shares no code with the library implementation.
std::string oracle_heating(char air_vent, char radiators, char water_filled,
                           char panel, char storage) {
  std::string main_heating;
  if (radiators == 'Y' && water_filled == 'Y') {
    main_heating = "water rads";
  } else if (panel == 'Y') {
    main_heating = "electric panels";
  } else if (storage == 'Y') {
    main_heating = "electric storage";
  }
  if (air_vent == 'N' && radiators == 'N' && panel == 'N' && storage == 'N') {
    main_heating = "underfloor";
  }
  if (air_vent == 'Y' && radiators == 'N' && panel == 'N' && storage == 'N') {
    main_heating = "warm air";
  }
  return main_heating;  // empty when no rule fired
}

std::string oracle_source(int building_age, bool more_than_5_units,
                          char water_filled, char panel, char storage,
                          const std::string& heating_type) {
  if (building_age >= 1970 && more_than_5_units && panel == 'N' &&
      storage == 'N') {
    return "community";
  } else if (water_filled == 'Y') {
    return "gas";
  } else if (heating_type == "underfloor" || panel == 'Y' || storage == 'Y') {
    return "electric";
  }
  return "";
}

char yn(bool b) { return b ? 'Y' : 'N'; }

std::string heating_name(HeatingType type) {
  return type == HeatingType::Unknown ? "" : std::string(to_string(type));
}

std::string source_name(EnergySource source) {
  return source == EnergySource::Unknown ? "" : std::string(to_string(source));
}

std::vector<HeatingObservation> all_observations() {
  std::vector<HeatingObservation> out;
  for (int bits = 0; bits < 32; ++bits) {
    out.push_back(HeatingObservation{(bits & 1) != 0, (bits & 2) != 0,
                                     (bits & 4) != 0, (bits & 8) != 0,
                                     (bits & 16) != 0});
  }
  return out;
}

std::string normalize_timestamps(std::string text) {
  static const std::regex ts(R"("timestamp":"[^"]*")");
  return std::regex_replace(text, ts, R"("timestamp":"T")");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  int tuples = 0;
  for (const auto& obs : all_observations()) {
    std::string expected =
        oracle_heating(yn(obs.air_vent), yn(obs.radiators),
                       yn(obs.water_filled), yn(obs.panel), yn(obs.storage));
    if (heating_name(infer_heating_type(obs)) != expected) ok = false;
  }
  for (AgeBand band : kAllAgeBands) {
    for (BuildingType type : kAllBuildingTypes) {
      for (const auto& obs : all_observations()) {
        HeatingType heating = infer_heating_type(obs);
        std::string expected = oracle_source(
            band_interval(band).lo, type == BuildingType::Units5Plus,
            yn(obs.water_filled), yn(obs.panel), yn(obs.storage),
            heating_name(heating));
        if (source_name(infer_energy_source(band, type, obs, heating)) !=
            expected)
          ok = false;
        ++tuples;
      }
    }
  }
  if (tuples != 1120) ok = false;
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  if (ms >= 1000) ok = false;
  report(1, ok, "rule-base oracle equivalence over 32 + 1120 tuples, " +
                    std::to_string(ms) + " ms");
}

void criterion2() {
  // The Unknown gap is exactly {radiators Y, water N, panel N, storage N};
  // only air_vent varies inside it, so enumeration finds 2 observations.
  int unknowns = 0;
  bool predicate_ok = true;
  for (const auto& obs : all_observations()) {
    bool is_unknown = infer_heating_type(obs) == HeatingType::Unknown;
    bool gap = obs.radiators && !obs.water_filled && !obs.panel && !obs.storage;
    if (is_unknown != gap) predicate_ok = false;
    if (is_unknown) ++unknowns;
  }
  report(2, predicate_ok && unknowns == 2,
         "Unknown set == {radiators Y, water N, panel N, storage N}; count " +
             std::to_string(unknowns) +
             " (the stated count of 8 contradicts the defining predicate; see "
             "the project decision ledger)");
}

void criterion3() {
  auto dir = fixtures() / "responses/fixture-0";
  auto p1 = parse_age_band(slurp(dir / "P1.txt"));
  auto p2 = parse_building_type(slurp(dir / "P2.txt"));
  auto p3 = parse_heating_observation(slurp(dir / "P3.txt"));
  auto p4 = parse_window_type(slurp(dir / "P4.txt"));
  auto p5 = parse_lighting(slurp(dir / "P5.txt"));
  auto p6 = parse_energy_estimate(slurp(dir / "P6.txt"));
  bool ok = p1.ok() && p2.ok() && p3.ok() && p4.ok() && p5.ok() && p6.ok();
  if (ok) {
    HeatingObservation warm_air{true, false, false, false, false};
    ok = *p1.value == AgeBand::Y2020_Now &&
         *p2.value == BuildingType::Units5Plus && *p3.value == warm_air &&
         *p4.value == WindowType::HighEfficiencyDoubleOrTriple &&
         p5.value->percent_low_energy == 80.0 &&
         p6.value->low_kwh_m2 == 35.0 && p6.value->high_kwh_m2 == 50.0;
  }
  report(3, ok, "all six published example outputs parse, zero diagnostics");
}

void criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  fs::path work = fs::temp_directory_path() / "facade-acceptance-c4";
  fs::remove_all(work);
  fs::create_directories(work);

  PipelineConfig config;
  config.fixtures_dir = fixtures() / "responses";
  config.cache_dir = work / "cache";
  auto manifests = load_manifest(fixtures() / "manifest.json");

  std::vector<std::string> contents;
  std::vector<std::size_t> calls;
  for (int run = 0; run < 3; ++run) {
    auto client = make_llm_client(config);  // fresh client; cache persists
    fs::path out = work / ("run" + std::to_string(run) + ".jsonl");
    auto result = run_batch(manifests, registry(), *client, config, out);
    bool complete = result.assessments.size() == 3 && result.failures.empty();
    if (!complete) {
      report(4, false, "batch run incomplete");
      return;
    }
    calls.push_back(client->calls_made());
    contents.push_back(normalize_timestamps(slurp(out)));
  }
  bool ok = !contents[0].empty() && contents[0] == contents[1] &&
            contents[1] == contents[2] && calls[1] == 0 && calls[2] == 0;
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  if (ms >= 5000) ok = false;
  report(4, ok, "byte-stable across 3 runs; warm-cache calls " +
                    std::to_string(calls[1]) + "; " + std::to_string(ms) +
                    " ms");
}

void criterion5() {
  bool ok = true;
  auto predictions = read_assessments(fixtures() / "eval/predictions.jsonl");
  auto truth = load_ground_truth(fixtures() / "eval/truth.csv");
  auto rep = evaluate(predictions, truth);
  std::ifstream in(fixtures() / "eval/expected_report.json");
  nlohmann::json expected = nlohmann::json::parse(in);
  auto close = [](double a, double b) { return std::fabs(a - b) < 1e-9; };
  auto check = [&](const char* key, const MetricValue& m) {
    if (!close(m.value, expected[key]["value"].get<double>()) ||
        m.n != expected[key]["n"].get<int>() ||
        !close(m.coverage, expected[key]["coverage"].get<double>()))
      ok = false;
  };
  if (rep.joined_properties != expected["joined_properties"].get<int>()) ok = false;
  check("age_avg_error_years", rep.age_avg_error_years);
  check("building_type_pct", rep.building_type_pct);
  check("heating_type_pct", rep.heating_type_pct);
  check("energy_source_pct", rep.energy_source_pct);
  check("window_perfect_pct", rep.window_perfect_pct);
  check("window_approx_pct", rep.window_approx_pct);
  check("lighting_rmse_pct", rep.lighting_rmse_pct);
  check("energy_mean_abs_diff", rep.energy_mean_abs_diff);
  if (!rep.epc_rmse) ok = false;
  else check("epc_rmse", *rep.epc_rmse);

  std::vector<PropertyAssessment> perfect;
  for (const auto& t : truth) {
    PropertyAssessment a;
    a.property_id = t.property_id;
    for (PromptId id : {PromptId::P1, PromptId::P2, PromptId::P3, PromptId::P4,
                        PromptId::P5, PromptId::P6})
      a.raw_texts[id] = "x";
    a.age_band = t.age.exact_year ? age_band_for_year(*t.age.exact_year)
                                  : *t.age.band;
    a.building_type = t.building_type;
    a.heating_type = t.heating_type;
    a.energy_source = t.energy_source;
    a.window_type = t.window_type;
    a.lighting = t.lighting;
    a.energy_estimate = EnergyEstimate{t.energy_kwh_m2, t.energy_kwh_m2};
    a.epc_rating = t.epc;
    perfect.push_back(std::move(a));
  }
  auto pr = evaluate(perfect, truth);
  if (pr.age_avg_error_years.value != 0.0 || pr.building_type_pct.value != 100.0 ||
      pr.heating_type_pct.value != 100.0 || pr.energy_source_pct.value != 100.0 ||
      pr.window_perfect_pct.value != 100.0 || pr.lighting_rmse_pct.value != 0.0 ||
      pr.energy_mean_abs_diff.value != 0.0 || !pr.epc_rmse ||
      pr.epc_rmse->value != 0.0)
    ok = false;
  report(5, ok, "evaluation matches the hand-computed reference within 1e-9");
}

void criterion6() {
  double uniform = epc_rmse({{EpcRating::B, EpcRating::C},
                             {EpcRating::E, EpcRating::D},
                             {EpcRating::G, EpcRating::F}});
  double pair = epc_rmse({{EpcRating::A, EpcRating::C}});
  report(6, uniform == 1.0 && pair == 2.0,
         "uniform one-off RMSE 1.0; (A,C) RMSE 2.0");
}

void criterion7() {
  bool ok =
      age_error_years(AgeBand::Y1990_2020, GroundTruthAge::from_year(2014)) == 0.0 &&
      age_error_years(AgeBand::Y1990_2020, GroundTruthAge::from_year(1985)) == 5.0 &&
      age_error_years(AgeBand::Y2020_Now,
                      GroundTruthAge::from_band(AgeBand::Before1900)) == 120.0;
  report(7, ok, "age metric edge distances exact");
}

void criterion8() {
  std::mt19937 rng(987654321u);
  const std::vector<std::string> filler = {
      "The building shows several distinguishing features.",
      "Considering the materials and style, a few periods are plausible.",
      "After weighing the visible evidence, one stands out.",
      "On balance the most convincing answer follows."};
  bool ok = true;
  for (int trial = 0; trial < 300 && ok; ++trial) {
    std::string text = filler[rng() % filler.size()];
    AgeBand decoy = kAllAgeBands[rng() % kAllAgeBands.size()];
    text += " It could be " + std::string(to_string(decoy)) + ".";
    text += " " + filler[rng() % filler.size()];
    AgeBand appended = kAllAgeBands[rng() % kAllAgeBands.size()];
    text += " Final answer: " + std::string(to_string(appended));
    auto parsed = parse_age_band(text);
    if (!parsed.ok() || *parsed.value != appended) ok = false;
  }
  report(8, ok, "appending an option label flips the parse (300 random trials)");
}

void criterion9() {
  const char* key = std::getenv("FACADE_AUDIT_API_KEY");
  if (!key || !*key) key = std::getenv("OPENAI_API_KEY");
  if (!key || !*key) {
    std::printf("criterion 9: SKIP - live smoke requires an API key\n");
    return;
  }
  const char* manifest_path = std::getenv("FACADE_LIVE_MANIFEST");
  if (!manifest_path || !*manifest_path) {
    std::printf(
        "criterion 9: SKIP - set FACADE_LIVE_MANIFEST to a real property "
        "manifest to run the live smoke\n");
    return;
  }
  PipelineConfig config;
  auto manifests = load_manifest(manifest_path);
  auto client = make_llm_client(config);
  auto outcome = assess_property(manifests[0], registry(), *client, config);
  const auto& a = outcome.assessment;
  bool ok = outcome.stage_errors.empty() && a.raw_texts.size() == 7 &&
            a.age_band && a.building_type && a.heating_observation &&
            a.window_type && a.lighting;
  report(9, ok, "live single-property smoke");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
