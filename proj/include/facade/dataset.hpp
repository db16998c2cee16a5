#pragma once

// Dataset ingestion and persistence: property manifests (JSON), ground-truth
// records (CSV with semicolon-separated index lists inside cells) and
// per-property assessments (JSON Lines, one self-contained record per line).

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facade/core.hpp"
#include "facade/extract.hpp"
#include "facade/promptkit.hpp"

namespace facade {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : DatasetError {
  using DatasetError::DatasetError;
};
struct SchemaError : DatasetError {
  using DatasetError::DatasetError;
};
struct UnknownHeatingLabel : DatasetError {
  explicit UnknownHeatingLabel(const std::string& label)
      : DatasetError("unknown heating label: \"" + label + "\""), label(label) {}
  std::string label;
};

// ---------------------------------------------------------------------------
// Manifests

enum class ImageGroup { Building, Heating, Windows, Lighting };

inline std::string_view to_string(ImageGroup group) {
  switch (group) {
    case ImageGroup::Building: return "building";
    case ImageGroup::Heating: return "heating";
    case ImageGroup::Windows: return "windows";
    case ImageGroup::Lighting: return "lighting";
  }
  return "?";
}

struct PropertyManifest {
  std::string property_id;
  std::vector<std::string> images;
  std::map<ImageGroup, std::vector<int>> groups;

  std::vector<std::string> group_uris(ImageGroup group) const {
    std::vector<std::string> out;
    for (int index : groups.at(group)) out.push_back(images.at(index));
    return out;
  }
};

namespace detail {

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw SchemaError("invalid JSON in " + path.string());
  return doc;
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<std::string_view> known,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw SchemaError("unknown field \"" + key + "\" in " + where);
  }
}

}  // namespace detail

// Each group must carry 1 to 5 in-range image indices.
inline std::vector<PropertyManifest> load_manifest(
    const std::filesystem::path& path) {
  nlohmann::json doc = detail::parse_json_file(path);
  if (!doc.is_array()) throw SchemaError("manifest must be a JSON array");

  std::vector<PropertyManifest> out;
  for (const auto& entry : doc) {
    if (!entry.is_object()) throw SchemaError("manifest entry must be an object");
    detail::reject_unknown_keys(entry, {"property_id", "images", "groups"},
                                "manifest entry");
    PropertyManifest manifest;
    manifest.property_id = entry.value("property_id", std::string{});
    if (manifest.property_id.empty()) {
      throw SchemaError("manifest entry missing property_id");
    }
    if (!entry.contains("images") || !entry["images"].is_array()) {
      throw SchemaError(manifest.property_id + ": missing images array");
    }
    for (const auto& uri : entry["images"]) {
      manifest.images.push_back(uri.get<std::string>());
    }
    if (!entry.contains("groups") || !entry["groups"].is_object()) {
      throw SchemaError(manifest.property_id + ": missing groups object");
    }
    detail::reject_unknown_keys(entry["groups"],
                                {"building", "heating", "windows", "lighting"},
                                manifest.property_id + " groups");
    for (ImageGroup group : {ImageGroup::Building, ImageGroup::Heating,
                             ImageGroup::Windows, ImageGroup::Lighting}) {
      std::string key(to_string(group));
      if (!entry["groups"].contains(key)) {
        throw SchemaError(manifest.property_id + ": missing group " + key);
      }
      std::vector<int> indices;
      for (const auto& v : entry["groups"][key]) {
        int index = v.get<int>();
        if (index < 0 || index >= static_cast<int>(manifest.images.size())) {
          throw SchemaError(manifest.property_id + ": group " + key +
                            " index " + std::to_string(index) +
                            " out of range");
        }
        indices.push_back(index);
      }
      if (indices.empty() || indices.size() > 5) {
        throw SchemaError(manifest.property_id + ": group " + key +
                          " must hold 1 to 5 images");
      }
      manifest.groups[group] = std::move(indices);
    }
    out.push_back(std::move(manifest));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth

struct GroundTruthRecord {
  std::string property_id;
  GroundTruthAge age;
  BuildingType building_type = BuildingType::Units5Plus;
  std::string heating_label;
  HeatingType heating_type = HeatingType::Unknown;
  EnergySource energy_source = EnergySource::Unknown;
  WindowType window_type = WindowType::DoubleGlazed;
  LightingPercent lighting;
  double energy_kwh_m2 = 0.0;
  EpcRating epc = EpcRating::D;
};

// Free-text heating labels are canonicalized through a fixed synonym table;
// anything else is an error, not a guess.
inline std::optional<std::pair<HeatingType, EnergySource>>
canonical_heating(std::string_view label) {
  static const std::map<std::string, std::pair<HeatingType, EnergySource>,
                        std::less<>>
      table = {
          {"community scheme with underfloor heating",
           {HeatingType::Underfloor, EnergySource::Community}},
          {"community scheme with warm air heating",
           {HeatingType::WarmAir, EnergySource::Community}},
          {"gas boiler water radiators",
           {HeatingType::WaterRads, EnergySource::Gas}},
          {"electric panel heaters",
           {HeatingType::ElectricPanels, EnergySource::Electric}},
          {"electric storage heaters",
           {HeatingType::ElectricStorage, EnergySource::Electric}},
          {"electric underfloor heating",
           {HeatingType::Underfloor, EnergySource::Electric}},
      };
  auto it = table.find(detail::ascii_lower(label));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

inline std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<int> parse_int(std::string_view s) {
  try {
    size_t used = 0;
    std::string str(trim(s));
    int v = std::stoi(str, &used);
    if (used != str.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace detail

inline constexpr std::string_view kGroundTruthHeader =
    "id,building_images,heating_images,window_images,lighting_images,"
    "building_age,building_type,main_heating,window_type,lighting,"
    "energy_kwh_m2,epc_rating";

inline std::vector<GroundTruthRecord> load_ground_truth(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty ground-truth file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kGroundTruthHeader) {
    throw SchemaError("ground-truth header mismatch, got: " + line);
  }

  std::vector<GroundTruthRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 12) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 12 cells, got " +
                        std::to_string(cells.size()));
    }
    auto bad = [&](const std::string& what) {
      return SchemaError("line " + std::to_string(line_no) + ": " + what);
    };

    GroundTruthRecord rec;
    rec.property_id = detail::trim(cells[0]);
    if (rec.property_id.empty()) throw bad("empty id");

    // columns 1-4 are the image-group index lists; carried only in the
    // manifest, validated here for shape (semicolon-separated integers).
    for (int col = 1; col <= 4; ++col) {
      std::stringstream ss(cells[col]);
      std::string part;
      while (std::getline(ss, part, ';')) {
        if (!detail::parse_int(part)) throw bad("bad index list in column " + std::to_string(col));
      }
    }

    std::string age_cell = detail::trim(cells[5]);
    if (auto year = detail::parse_int(age_cell)) {
      rec.age = GroundTruthAge::from_year(*year);
    } else if (auto band = age_band_from_string(age_cell)) {
      rec.age = GroundTruthAge::from_band(*band);
    } else {
      throw bad("unparseable building_age: " + age_cell);
    }

    auto btype = building_type_from_string(detail::trim(cells[6]));
    if (!btype) throw bad("unknown building_type: " + cells[6]);
    rec.building_type = *btype;

    rec.heating_label = detail::trim(cells[7]);
    auto heating = canonical_heating(rec.heating_label);
    if (!heating) throw UnknownHeatingLabel(rec.heating_label);
    rec.heating_type = heating->first;
    rec.energy_source = heating->second;

    auto wtype = window_type_from_string(detail::trim(cells[8]));
    if (!wtype) throw bad("unknown window_type: " + cells[8]);
    rec.window_type = *wtype;

    // "Low energy in 75%" or a bare percent.
    std::string lighting = detail::ascii_lower(detail::trim(cells[9]));
    if (lighting == "no low energy lighting") {
      rec.lighting = LightingPercent{0.0};
    } else {
      static const std::string prefix = "low energy in ";
      std::string num = lighting;
      if (num.starts_with(prefix)) num = num.substr(prefix.size());
      if (!num.empty() && num.back() == '%') num.pop_back();
      auto pct = detail::parse_int(num);
      if (!pct || *pct < 0 || *pct > 100) throw bad("unparseable lighting: " + cells[9]);
      rec.lighting = LightingPercent{static_cast<double>(*pct)};
    }

    try {
      rec.energy_kwh_m2 = std::stod(detail::trim(cells[10]));
    } catch (...) {
      throw bad("unparseable energy_kwh_m2: " + cells[10]);
    }
    if (rec.energy_kwh_m2 < 0) throw bad("negative energy_kwh_m2");

    std::string epc = detail::trim(cells[11]);
    auto rating = epc.size() == 1 ? epc_from_letter(epc[0]) : std::nullopt;
    if (!rating) throw bad("unknown epc_rating: " + cells[11]);
    rec.epc = *rating;

    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assessments

struct PropertyAssessment {
  std::string property_id;
  std::string model_name;
  std::string timestamp;  // ISO-8601; normalized away in golden comparisons
  std::map<PromptId, std::string> raw_texts;

  std::optional<AgeBand> age_band;
  std::optional<BuildingType> building_type;
  std::optional<HeatingObservation> heating_observation;
  std::optional<HeatingType> heating_type;
  std::optional<EnergySource> energy_source;
  std::optional<WindowType> window_type;
  std::optional<LightingPercent> lighting;
  std::optional<EnergyEstimate> energy_estimate;
  std::optional<EpcRating> epc_rating;
  std::string recommendation_text;
  std::vector<ParseDiagnostic> diagnostics;

  bool stage_ran(PromptId id) const { return raw_texts.contains(id); }

  bool operator==(const PropertyAssessment&) const = default;
};

inline nlohmann::json assessment_to_json(const PropertyAssessment& a) {
  nlohmann::json raw = nlohmann::json::object();
  for (const auto& [id, text] : a.raw_texts) raw[std::string(to_string(id))] = text;

  nlohmann::json parsed = nlohmann::json::object();
  if (a.age_band) parsed["age_band"] = to_string(*a.age_band);
  if (a.building_type) parsed["building_type"] = to_string(*a.building_type);
  if (a.heating_observation) {
    const auto& o = *a.heating_observation;
    parsed["heating_observation"] = {{"air_vent", o.air_vent},
                                     {"radiators", o.radiators},
                                     {"water_filled", o.water_filled},
                                     {"panel", o.panel},
                                     {"storage", o.storage}};
  }
  if (a.heating_type) parsed["heating_type"] = to_string(*a.heating_type);
  if (a.energy_source) parsed["energy_source"] = to_string(*a.energy_source);
  if (a.window_type) parsed["window_type"] = to_string(*a.window_type);
  if (a.lighting) parsed["lighting_percent"] = a.lighting->percent_low_energy;
  if (a.energy_estimate) {
    parsed["energy_estimate"] = {{"low_kwh_m2", a.energy_estimate->low_kwh_m2},
                                 {"high_kwh_m2", a.energy_estimate->high_kwh_m2}};
  }
  if (a.epc_rating) parsed["epc_rating"] = std::string(1, epc_letter(*a.epc_rating));

  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : a.diagnostics) {
    diags.push_back({{"prompt", to_string(d.prompt_id)},
                     {"reason", to_string(d.reason)},
                     {"snippet", d.snippet}});
  }

  return {{"property_id", a.property_id}, {"model_name", a.model_name},
          {"timestamp", a.timestamp},     {"raw", raw},
          {"parsed", parsed},             {"recommendation", a.recommendation_text},
          {"diagnostics", diags}};
}

inline PropertyAssessment assessment_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("assessment must be a JSON object");
  detail::reject_unknown_keys(doc,
                              {"property_id", "model_name", "timestamp", "raw",
                               "parsed", "recommendation", "diagnostics"},
                              "assessment");
  PropertyAssessment a;
  a.property_id = doc.value("property_id", std::string{});
  if (a.property_id.empty()) throw SchemaError("assessment missing property_id");
  a.model_name = doc.value("model_name", std::string{});
  a.timestamp = doc.value("timestamp", std::string{});
  a.recommendation_text = doc.value("recommendation", std::string{});

  // Bind before iterating: items() on a temporary dangles in C++20.
  const auto raw = doc.value("raw", nlohmann::json::object());
  for (const auto& [key, text] : raw.items()) {
    auto id = prompt_id_from_string(key);
    if (!id) throw SchemaError("unknown field \"" + key + "\" in assessment raw");
    a.raw_texts[*id] = text.get<std::string>();
  }

  const auto parsed = doc.value("parsed", nlohmann::json::object());
  detail::reject_unknown_keys(
      parsed,
      {"age_band", "building_type", "heating_observation", "heating_type",
       "energy_source", "window_type", "lighting_percent", "energy_estimate",
       "epc_rating"},
      "assessment parsed");
  auto require = [&](auto opt, const std::string& what) {
    if (!opt) throw SchemaError("bad value for " + what);
    return *opt;
  };
  if (parsed.contains("age_band")) {
    a.age_band = require(age_band_from_string(parsed["age_band"].get<std::string>()), "age_band");
  }
  if (parsed.contains("building_type")) {
    a.building_type = require(
        building_type_from_string(parsed["building_type"].get<std::string>()),
        "building_type");
  }
  if (parsed.contains("heating_observation")) {
    const auto& o = parsed["heating_observation"];
    a.heating_observation = HeatingObservation{
        o.value("air_vent", false), o.value("radiators", false),
        o.value("water_filled", false), o.value("panel", false),
        o.value("storage", false)};
  }
  if (parsed.contains("heating_type")) {
    a.heating_type = require(
        heating_type_from_string(parsed["heating_type"].get<std::string>()),
        "heating_type");
  }
  if (parsed.contains("energy_source")) {
    a.energy_source = require(
        energy_source_from_string(parsed["energy_source"].get<std::string>()),
        "energy_source");
  }
  if (parsed.contains("window_type")) {
    a.window_type = require(
        window_type_from_string(parsed["window_type"].get<std::string>()),
        "window_type");
  }
  if (parsed.contains("lighting_percent")) {
    a.lighting = LightingPercent{parsed["lighting_percent"].get<double>()};
  }
  if (parsed.contains("energy_estimate")) {
    a.energy_estimate =
        EnergyEstimate{parsed["energy_estimate"].value("low_kwh_m2", 0.0),
                       parsed["energy_estimate"].value("high_kwh_m2", 0.0)};
  }
  if (parsed.contains("epc_rating")) {
    std::string letter = parsed["epc_rating"].get<std::string>();
    if (letter.size() != 1) throw SchemaError("bad value for epc_rating");
    a.epc_rating = require(epc_from_letter(letter[0]), "epc_rating");
  }

  for (const auto& d : doc.value("diagnostics", nlohmann::json::array())) {
    auto id = prompt_id_from_string(d.value("prompt", std::string{}));
    auto reason = parse_reason_from_string(d.value("reason", std::string{}));
    if (!id || !reason) throw SchemaError("bad diagnostic entry");
    a.diagnostics.push_back(
        ParseDiagnostic{*id, *reason, d.value("snippet", std::string{})});
  }
  return a;
}

inline void write_assessments(const std::filesystem::path& path,
                              const std::vector<PropertyAssessment>& list) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& a : list) out << assessment_to_json(a).dump() << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::vector<PropertyAssessment> read_assessments(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PropertyAssessment> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw SchemaError("line " + std::to_string(line_no) + ": invalid JSON");
    }
    out.push_back(assessment_from_json(doc));
  }
  return out;
}

}  // namespace facade
