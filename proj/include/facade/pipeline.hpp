#pragma once

// End-to-end orchestration per property: the five feature prompts, the rule
// base, the energy estimate and the recommendation, plus batch execution
// with bounded parallelism, write-through caching and resume.

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "facade/dataset.hpp"
#include "facade/evalsuite.hpp"
#include "facade/extract.hpp"
#include "facade/llm.hpp"
#include "facade/promptkit.hpp"
#include "facade/rulebase.hpp"

namespace facade {

struct ContextUnavailable : std::runtime_error {
  explicit ContextUnavailable(PromptId id)
      : std::runtime_error("cannot run " + std::string(to_string(id)) +
                           ": a prerequisite stage failed to parse") {}
};

struct PipelineConfig {
  LlmConfig llm;
  std::optional<std::filesystem::path> fixtures_dir;  // set = mock mode
  std::filesystem::path cache_dir;                    // empty = no cache
  std::filesystem::path prompts_dir = "prompts";
  int parallel_properties = 4;
  std::set<PromptId> stages = {PromptId::P1, PromptId::P2, PromptId::P3,
                               PromptId::P4, PromptId::P5, PromptId::P6,
                               PromptId::P7};
};

inline std::shared_ptr<LlmClient> make_llm_client(const PipelineConfig& config) {
  std::shared_ptr<LlmClient> client;
  if (config.fixtures_dir) {
    client = std::make_shared<MockLlmClient>(*config.fixtures_dir);
  } else {
    client = std::make_shared<HttpLlmClient>(config.llm);
  }
  if (!config.cache_dir.empty()) {
    client = std::make_shared<CachingLlmClient>(client, config.cache_dir);
  }
  return client;
}

namespace detail {

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Per-stage LLM failures are recorded here rather than thrown; a property
// with at least one raw answer still yields a (partial) assessment.
struct AssessmentOutcome {
  PropertyAssessment assessment;
  std::map<PromptId, std::string> stage_errors;

  bool wholly_failed() const { return assessment.raw_texts.empty(); }
};

inline AssessmentOutcome assess_property(const PropertyManifest& manifest,
                                         const PromptRegistry& registry,
                                         LlmClient& client,
                                         const PipelineConfig& config) {
  AssessmentOutcome outcome;
  PropertyAssessment& a = outcome.assessment;
  a.property_id = manifest.property_id;
  a.model_name = config.fixtures_dir ? "mock" : config.llm.model_name;
  a.timestamp = detail::utc_timestamp();

  auto want = [&](PromptId id) { return config.stages.contains(id); };

  auto run_stage = [&](PromptId id, ImageGroup group,
                       std::optional<std::string> context =
                           std::nullopt) -> const std::string* {
    try {
      auto payload = registry.render(id, manifest.group_uris(group),
                                     std::move(context));
      auto result = client.complete(payload, manifest.property_id);
      a.raw_texts[id] = std::move(result.text);
      return &a.raw_texts[id];
    } catch (const LlmError& e) {
      outcome.stage_errors[id] = e.what();
      return nullptr;
    }
  };

  auto note = [&](const auto& parsed) {
    if (parsed.diag) a.diagnostics.push_back(*parsed.diag);
    return parsed.value;
  };

  // Independent feature stages. Order is fixed; each failure is recorded
  // and the remaining stages still run.
  if (want(PromptId::P1)) {
    if (const auto* text = run_stage(PromptId::P1, ImageGroup::Building)) {
      a.age_band = note(parse_age_band(*text));
    }
  }
  if (want(PromptId::P2)) {
    if (const auto* text = run_stage(PromptId::P2, ImageGroup::Building)) {
      a.building_type = note(parse_building_type(*text));
    }
  }
  if (want(PromptId::P3)) {
    if (const auto* text = run_stage(PromptId::P3, ImageGroup::Heating)) {
      a.heating_observation = note(parse_heating_observation(*text));
    }
  }
  if (want(PromptId::P4)) {
    if (const auto* text = run_stage(PromptId::P4, ImageGroup::Windows)) {
      a.window_type = note(parse_window_type(*text));
    }
  }
  if (want(PromptId::P5)) {
    if (const auto* text = run_stage(PromptId::P5, ImageGroup::Lighting)) {
      a.lighting = note(parse_lighting(*text));
    }
  }

  // Rule base: heating type and source are derived only when all three
  // upstream parses succeeded.
  if (a.age_band && a.building_type && a.heating_observation) {
    a.heating_type = infer_heating_type(*a.heating_observation);
    a.energy_source = infer_energy_source(*a.age_band, *a.building_type,
                                          *a.heating_observation,
                                          *a.heating_type);
  }

  // Summary stages need every P1-P5 answer plus the rule-base result.
  bool context_ready = a.age_band && a.building_type && a.heating_observation &&
                       a.window_type && a.lighting;
  std::optional<std::string> summary;
  if (context_ready) {
    summary = stage_summary(a.raw_texts, *a.heating_type, *a.energy_source);
  }

  for (PromptId id : {PromptId::P6, PromptId::P7}) {
    if (!want(id)) continue;
    if (!context_ready) {
      outcome.stage_errors[id] = ContextUnavailable(id).what();
      continue;
    }
    if (const auto* text = run_stage(id, ImageGroup::Building, summary)) {
      if (id == PromptId::P6) {
        a.energy_estimate = note(parse_energy_estimate(*text));
      } else {
        a.recommendation_text = *text;
      }
    }
  }

  return outcome;
}

struct BatchResult {
  std::vector<PropertyAssessment> assessments;  // manifest order
  std::map<std::string, std::string> failures;  // property id -> reason
  int skipped = 0;                              // resumed from existing output
};

// Processes up to parallel_properties properties concurrently. Finished
// assessments are appended to the output file in manifest order as soon as
// every earlier property has been appended, so reruns and crashes leave a
// resumable prefix.
inline BatchResult run_batch(const std::vector<PropertyManifest>& manifests,
                             const PromptRegistry& registry,
                             LlmClient& client, const PipelineConfig& config,
                             const std::filesystem::path& out_path,
                             bool resume = false) {
  BatchResult result;

  std::set<std::string> done;
  if (resume && std::filesystem::exists(out_path)) {
    for (const auto& a : read_assessments(out_path)) {
      done.insert(a.property_id);
    }
  }

  std::ofstream out(out_path, resume ? std::ios::app | std::ios::binary
                                     : std::ios::binary);
  if (!out) throw IoError("cannot write " + out_path.string());

  struct Slot {
    std::optional<AssessmentOutcome> outcome;
    std::string error;
    bool skipped = false;
    std::atomic<bool> ready{false};
  };
  std::vector<Slot> slots(manifests.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= manifests.size()) return;
      if (done.contains(manifests[i].property_id)) {
        slots[i].skipped = true;
      } else {
        try {
          slots[i].outcome = assess_property(manifests[i], registry, client, config);
        } catch (const std::exception& e) {
          slots[i].error = e.what();
        }
      }
      slots[i].ready.store(true, std::memory_order_release);
    }
  };

  int threads = std::max(1, std::min<int>(config.parallel_properties,
                                          static_cast<int>(manifests.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);

  // Drain in manifest order; blocks on the earliest unfinished property.
  for (size_t i = 0; i < manifests.size(); ++i) {
    while (!slots[i].ready.load(std::memory_order_acquire)) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    if (slots[i].skipped) {
      ++result.skipped;
      continue;
    }
    if (!slots[i].error.empty()) {
      result.failures[manifests[i].property_id] = slots[i].error;
      continue;
    }
    AssessmentOutcome& outcome = *slots[i].outcome;
    if (outcome.wholly_failed()) {
      std::string reason = "all stages failed";
      if (!outcome.stage_errors.empty()) {
        reason += ": " + outcome.stage_errors.begin()->second;
      }
      result.failures[manifests[i].property_id] = reason;
      continue;
    }
    out << assessment_to_json(outcome.assessment).dump() << "\n";
    out.flush();
    result.assessments.push_back(std::move(outcome.assessment));
  }
  for (auto& t : pool) t.join();
  return result;
}

enum class EpcExperimentMode { FromText, FromImages };

// Direct EPC estimation: X1 consumes the P1-P5 summary as text only, X2
// looks at the building images with no context. Returns the letter RMSE
// against ground truth over every property that produced a rating.
inline double epc_direct_experiment(
    EpcExperimentMode mode, const std::vector<PropertyManifest>& manifests,
    const std::vector<GroundTruthRecord>& truth, const PromptRegistry& registry,
    LlmClient& client, const PipelineConfig& config) {
  std::map<std::string, const GroundTruthRecord*> by_id;
  for (const auto& rec : truth) by_id[rec.property_id] = &rec;

  std::vector<std::pair<EpcRating, EpcRating>> pairs;
  for (const auto& manifest : manifests) {
    auto it = by_id.find(manifest.property_id);
    if (it == by_id.end()) continue;

    PromptPayload payload;
    if (mode == EpcExperimentMode::FromText) {
      PipelineConfig stage_config = config;
      stage_config.stages = {PromptId::P1, PromptId::P2, PromptId::P3,
                             PromptId::P4, PromptId::P5};
      auto outcome = assess_property(manifest, registry, client, stage_config);
      const auto& a = outcome.assessment;
      if (!(a.age_band && a.building_type && a.heating_observation &&
            a.window_type && a.lighting)) {
        throw ContextUnavailable(PromptId::X1);
      }
      payload = registry.render(
          PromptId::X1, {},
          stage_summary(a.raw_texts, *a.heating_type, *a.energy_source));
    } else {
      payload = registry.render(PromptId::X2,
                                manifest.group_uris(ImageGroup::Building));
    }
    auto completion = client.complete(payload, manifest.property_id);
    auto parsed = parse_epc_rating(completion.text);
    if (parsed.ok()) pairs.emplace_back(*parsed.value, it->second->epc);
  }
  return epc_rmse(pairs);
}

}  // namespace facade
