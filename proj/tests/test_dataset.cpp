#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "facade/dataset.hpp"

using namespace facade;
namespace fs = std::filesystem;

namespace {

fs::path fixtures() { return fs::path(FACADE_FIXTURES_DIR); }

fs::path temp_file(const std::string& name, const std::string& contents) {
  fs::path dir = fs::temp_directory_path() / "facade-dataset-tests";
  fs::create_directories(dir);
  fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("load_manifest resolves groups to URIs") {
  auto manifests = load_manifest(fixtures() / "manifest.json");
  REQUIRE(manifests.size() == 3);
  CHECK(manifests[0].property_id == "fixture-0");
  auto building = manifests[0].group_uris(ImageGroup::Building);
  REQUIRE(building.size() == 4);
  CHECK(building[0] == "https://images.example.org/fixture-0/exterior-street.jpg");
  CHECK(building[3] == "https://images.example.org/fixture-0/balcony-view.jpg");
}

TEST_CASE("load_manifest schema errors") {
  auto path = temp_file("bad-index.json", R"([
    {"property_id": "p", "images": ["a", "b"],
     "groups": {"building": [9], "heating": [0], "windows": [0], "lighting": [0]}}
  ])");
  CHECK_THROWS_AS(load_manifest(path), SchemaError);

  path = temp_file("empty-group.json", R"([
    {"property_id": "p", "images": ["a"],
     "groups": {"building": [], "heating": [0], "windows": [0], "lighting": [0]}}
  ])");
  CHECK_THROWS_AS(load_manifest(path), SchemaError);

  path = temp_file("unknown-key.json", R"([
    {"property_id": "p", "images": ["a"], "extra": 1,
     "groups": {"building": [0], "heating": [0], "windows": [0], "lighting": [0]}}
  ])");
  CHECK_THROWS_AS(load_manifest(path), SchemaError);

  CHECK_THROWS_AS(load_manifest(fixtures() / "no-such-file.json"), IoError);
}

TEST_CASE("load_ground_truth parses the fixture rows") {
  auto records = load_ground_truth(fixtures() / "ground_truth.csv");
  REQUIRE(records.size() == 3);

  const auto& r0 = records[0];
  CHECK(r0.property_id == "fixture-0");
  CHECK(r0.age == GroundTruthAge::from_year(2014));
  CHECK(r0.building_type == BuildingType::Units5Plus);
  CHECK(r0.heating_type == HeatingType::Underfloor);
  CHECK(r0.energy_source == EnergySource::Community);
  CHECK(r0.window_type == WindowType::HighEfficiencyDoubleOrTriple);
  CHECK(r0.lighting.percent_low_energy == 75.0);
  CHECK(r0.energy_kwh_m2 == 57.0);
  CHECK(r0.epc == EpcRating::B);

  const auto& r1 = records[1];
  CHECK(r1.age == GroundTruthAge::from_band(AgeBand::Before1900));
  CHECK(r1.building_type == BuildingType::Units2to4);
  CHECK(r1.heating_type == HeatingType::WaterRads);
  CHECK(r1.energy_source == EnergySource::Gas);
  CHECK(r1.window_type == WindowType::SingleGlazed);
  CHECK(r1.lighting.percent_low_energy == 100.0);
  CHECK(r1.energy_kwh_m2 == 275.0);
  CHECK(r1.epc == EpcRating::D);
}

TEST_CASE("load_ground_truth rejects unknown heating labels") {
  auto path = temp_file("magic.csv",
                        std::string(kGroundTruthHeader) +
                            "\np,0,0,0,0,2014,>5 units,Magic heating,"
                            "Double glazed,Low energy in 20%,57,B\n");
  CHECK_THROWS_AS(load_ground_truth(path), UnknownHeatingLabel);
}

TEST_CASE("load_ground_truth rejects a wrong header") {
  auto path = temp_file("badheader.csv", "id,oops\np,x\n");
  CHECK_THROWS_AS(load_ground_truth(path), SchemaError);
}

TEST_CASE("assessment round-trip through JSON Lines") {
  std::mt19937 rng(7);
  std::vector<PropertyAssessment> batch;
  for (int i = 0; i < 3; ++i) {
    PropertyAssessment a;
    a.property_id = "p" + std::to_string(i);
    a.model_name = "mock";
    a.timestamp = "2025-01-01T00:00:00Z";
    a.raw_texts[PromptId::P1] = "raw one\nwith newline";
    a.raw_texts[PromptId::P3] = "{}";
    a.age_band = kAllAgeBands[rng() % 7];
    a.building_type = kAllBuildingTypes[rng() % 5];
    a.heating_observation = HeatingObservation{(rng() & 1) != 0, true, false,
                                               false, (rng() & 1) != 0};
    a.heating_type = HeatingType::WaterRads;
    a.energy_source = EnergySource::Gas;
    a.window_type = WindowType::DoubleGlazed;
    a.lighting = LightingPercent{double(rng() % 6) * 20.0};
    a.energy_estimate = EnergyEstimate{35.0, 50.0};
    a.epc_rating = EpcRating::C;
    a.recommendation_text = "do good things";
    a.diagnostics.push_back(
        ParseDiagnostic{PromptId::P4, ParseReason::NoAnswerFound, "snippet"});
    batch.push_back(std::move(a));
  }

  fs::path path = fs::temp_directory_path() / "facade-dataset-tests" /
                  "roundtrip.jsonl";
  fs::create_directories(path.parent_path());
  write_assessments(path, batch);
  auto loaded = read_assessments(path);
  REQUIRE(loaded.size() == batch.size());
  for (size_t i = 0; i < batch.size(); ++i) CHECK(loaded[i] == batch[i]);
}

TEST_CASE("read_assessments names unknown fields") {
  auto path = temp_file("unknown-field.jsonl",
                        R"({"property_id":"p","mystery":1})"
                        "\n");
  try {
    read_assessments(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("mystery") != std::string::npos);
  }
}

TEST_CASE("write_assessments to an unwritable path") {
  CHECK_THROWS_AS(write_assessments("/no-such-dir/out.jsonl", {}), IoError);
}

TEST_CASE("canonical heating synonym table") {
  auto community = canonical_heating("Community scheme with underfloor heating");
  REQUIRE(community);
  CHECK(community->first == HeatingType::Underfloor);
  CHECK(community->second == EnergySource::Community);
  CHECK(!canonical_heating("Magic heating"));
}
