// facade-audit: builds sustainability data for a property from photographs
// via a chain of multimodal LLM prompts plus a deterministic heating rule
// base, and scores predictions against ground truth.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "facade/dataset.hpp"
#include "facade/evalsuite.hpp"
#include "facade/llm.hpp"
#include "facade/pipeline.hpp"
#include "facade/promptkit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct GlobalOptions {
  std::string model = "gpt-4o";
  std::string base_url = "https://api.openai.com/v1";
  std::string cache_dir;
  std::string prompts_dir = "prompts";
  std::optional<double> temperature;
};

facade::PipelineConfig make_config(const GlobalOptions& globals,
                                   const std::string& mock_dir) {
  facade::PipelineConfig config;
  config.llm.model_name = globals.model;
  config.llm.base_url = globals.base_url;
  config.llm.api_key = facade::api_key_from_env();
  config.llm.temperature = globals.temperature;
  config.cache_dir = globals.cache_dir;
  config.prompts_dir = globals.prompts_dir;
  if (!mock_dir.empty()) config.fixtures_dir = mock_dir;
  return config;
}

void require_key_or_mock(const facade::PipelineConfig& config) {
  if (!config.fixtures_dir && config.llm.api_key.empty()) {
    throw facade::AuthError(
        "live mode needs an API key; set FACADE_AUDIT_API_KEY (or "
        "OPENAI_API_KEY), or pass --mock <fixtures-dir>");
  }
}

const facade::PropertyManifest& find_property(
    const std::vector<facade::PropertyManifest>& manifests,
    const std::string& id) {
  for (const auto& m : manifests) {
    if (m.property_id == id) return m;
  }
  throw facade::SchemaError("property \"" + id + "\" not found in manifest");
}

void print_summary(const facade::PropertyAssessment& a) {
  auto show = [&](std::string_view name, const std::string& value) {
    std::cout << "  " << name << ": " << (value.empty() ? "-" : value) << "\n";
  };
  std::cout << "Assessment for " << a.property_id << "\n";
  show("age band", a.age_band ? std::string(to_string(*a.age_band)) : "");
  show("building type",
       a.building_type ? std::string(to_string(*a.building_type)) : "");
  show("main heating",
       a.heating_type ? std::string(to_string(*a.heating_type)) : "");
  show("energy source",
       a.energy_source ? std::string(to_string(*a.energy_source)) : "");
  show("window type",
       a.window_type ? std::string(to_string(*a.window_type)) : "");
  show("low-energy lighting",
       a.lighting ? std::to_string(static_cast<int>(a.lighting->percent_low_energy)) + "%"
                  : "");
  if (a.energy_estimate) {
    std::ostringstream e;
    e << a.energy_estimate->point_kwh_m2() << " kWh/m2 (range "
      << a.energy_estimate->low_kwh_m2 << "-" << a.energy_estimate->high_kwh_m2
      << ")";
    show("energy estimate", e.str());
  } else {
    show("energy estimate", "");
  }
  for (const auto& d : a.diagnostics) {
    std::cerr << "  diagnostic: " << to_string(d.prompt_id) << " "
              << to_string(d.reason) << "\n";
  }
  if (!a.recommendation_text.empty()) {
    std::cout << "\nRecommendation:\n" << a.recommendation_text << "\n";
  }
}

int cmd_assess(const GlobalOptions& globals, const std::string& manifest_path,
               const std::string& property_id, const std::string& mock_dir,
               const std::string& out_path) {
  auto config = make_config(globals, mock_dir);
  require_key_or_mock(config);
  auto registry = facade::PromptRegistry::load(config.prompts_dir);
  auto manifests = facade::load_manifest(manifest_path);
  const auto& manifest = find_property(manifests, property_id);
  auto client = facade::make_llm_client(config);

  auto outcome = facade::assess_property(manifest, registry, *client, config);
  print_summary(outcome.assessment);
  for (const auto& [stage, error] : outcome.stage_errors) {
    std::cerr << "  stage " << to_string(stage) << " failed: " << error << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::app | std::ios::binary);
    if (!out) throw facade::IoError("cannot write " + out_path);
    out << facade::assessment_to_json(outcome.assessment).dump() << "\n";
  }
  return outcome.wholly_failed() || !outcome.stage_errors.empty() ? kExitPartial
                                                                  : kExitOk;
}

int cmd_batch(const GlobalOptions& globals, const std::string& manifest_path,
              const std::string& mock_dir, const std::string& out_path,
              bool resume, int parallel, const std::string& stages_csv) {
  auto config = make_config(globals, mock_dir);
  require_key_or_mock(config);
  config.parallel_properties = parallel;
  if (!stages_csv.empty()) {
    config.stages.clear();
    std::stringstream ss(stages_csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto id = facade::prompt_id_from_string(name);
      if (!id) throw CLI::ValidationError("--stages", "unknown stage " + name);
      config.stages.insert(*id);
    }
  }
  auto registry = facade::PromptRegistry::load(config.prompts_dir);
  auto manifests = facade::load_manifest(manifest_path);
  auto client = facade::make_llm_client(config);

  auto result = facade::run_batch(manifests, registry, *client, config,
                                  out_path, resume);
  for (const auto& a : result.assessments) {
    std::cerr << "done: " << a.property_id << "\n";
  }
  for (const auto& [id, reason] : result.failures) {
    std::cerr << "failed: " << id << " (" << reason << ")\n";
  }
  if (result.skipped > 0) {
    std::cout << result.skipped << " skipped (cached)\n";
  }
  std::cout << result.assessments.size() << " assessed, "
            << result.failures.size() << " failed\n";
  return result.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_evaluate(const std::string& predictions_path,
                 const std::string& truth_path, const std::string& age_metric,
                 const std::string& format) {
  facade::EvaluateOptions options;
  options.age_mode = age_metric == "midpoint" ? facade::AgeMetricMode::Midpoint
                                              : facade::AgeMetricMode::Band;
  auto predictions = facade::read_assessments(predictions_path);
  auto truth = facade::load_ground_truth(truth_path);
  auto report = facade::evaluate(predictions, truth, options);
  if (format == "csv") {
    std::cout << facade::render_report_csv(report);
  } else {
    std::cout << facade::render_report_text(report);
  }
  return kExitOk;
}

int cmd_prompts(const GlobalOptions& globals, const std::string& id_name) {
  auto id = facade::prompt_id_from_string(id_name);
  if (!id) {
    std::cerr << "unknown prompt id: " << id_name << "\n";
    return kExitUsage;
  }
  auto registry = facade::PromptRegistry::load(globals.prompts_dir);
  if (!facade::prompt_is_verbatim(*id)) {
    std::cout << "[NON-VERBATIM] " << to_string(*id)
              << " is authored for this project, not transcribed source "
                 "material.\n\n";
  }
  std::cout << registry.template_text(*id);
  return kExitOk;
}

int cmd_epc_experiment(const GlobalOptions& globals, const std::string& mode,
                       const std::string& manifest_path,
                       const std::string& truth_path,
                       const std::string& mock_dir) {
  facade::EpcExperimentMode experiment_mode;
  if (mode == "text") {
    experiment_mode = facade::EpcExperimentMode::FromText;
  } else if (mode == "images") {
    experiment_mode = facade::EpcExperimentMode::FromImages;
  } else {
    std::cerr << "unknown mode: " << mode << " (expected text|images)\n";
    return kExitUsage;
  }
  auto config = make_config(globals, mock_dir);
  require_key_or_mock(config);
  auto registry = facade::PromptRegistry::load(config.prompts_dir);
  auto manifests = facade::load_manifest(manifest_path);
  auto truth = facade::load_ground_truth(truth_path);
  auto client = facade::make_llm_client(config);
  double rmse = facade::epc_direct_experiment(experiment_mode, manifests, truth,
                                              registry, *client, config);
  std::cout << "EPC RMSE (" << mode << "): " << rmse << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sustainability data generation from building photographs"};
  app.require_subcommand(1);

  GlobalOptions globals;
  double temperature_flag = -1.0;
  app.add_option("--model", globals.model, "Model name")->capture_default_str();
  app.add_option("--base-url", globals.base_url, "OpenAI-compatible endpoint")
      ->capture_default_str();
  app.add_option("--cache-dir", globals.cache_dir,
                 "Response cache directory (empty = no cache)");
  app.add_option("--prompts-dir", globals.prompts_dir,
                 "Directory holding the prompt templates")
      ->capture_default_str();
  auto* temp_opt = app.add_option("--temperature", temperature_flag,
                                  "Pin sampling temperature (default: provider default)");

  auto* assess = app.add_subcommand("assess", "Assess a single property");
  std::string manifest_path, property_id, mock_dir, out_path;
  assess->add_option("--manifest", manifest_path, "Property manifest (JSON)")
      ->required();
  assess->add_option("--property", property_id, "Property id")->required();
  assess->add_option("--mock", mock_dir, "Fixture dir: play back canned responses");
  assess->add_option("--out", out_path, "Append the assessment (JSON Lines)");

  auto* batch = app.add_subcommand("batch", "Assess every property in a manifest");
  std::string b_manifest, b_mock, b_out, b_stages;
  bool b_resume = false;
  int b_parallel = 4;
  batch->add_option("--manifest", b_manifest, "Property manifest (JSON)")->required();
  batch->add_option("--mock", b_mock, "Fixture dir: play back canned responses");
  batch->add_option("--out", b_out, "Output assessments (JSON Lines)")->required();
  batch->add_flag("--resume", b_resume, "Skip properties already in the output");
  batch->add_option("--parallel", b_parallel, "Concurrent properties")
      ->capture_default_str();
  batch->add_option("--stages", b_stages, "Comma-separated subset of P1..P7");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  std::string e_predictions, e_truth, e_age = "band", e_format = "text";
  evaluate->add_option("--predictions", e_predictions, "Assessments (JSON Lines)")
      ->required();
  evaluate->add_option("--truth", e_truth, "Ground truth (CSV)")->required();
  evaluate->add_option("--age-metric", e_age, "band|midpoint")
      ->check(CLI::IsMember({"band", "midpoint"}))
      ->capture_default_str();
  evaluate->add_option("--format", e_format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();

  auto* prompts = app.add_subcommand("prompts", "Inspect prompt templates");
  std::string p_action, p_id;
  prompts->add_option("action", p_action, "show")->required();
  prompts->add_option("id", p_id, "Prompt id (P1..P7, X1, X2)")->required();

  auto* epc = app.add_subcommand("epc-experiment", "Direct EPC rating estimation");
  std::string x_mode, x_manifest, x_truth, x_mock;
  epc->add_option("--mode", x_mode, "text|images")->required();
  epc->add_option("--manifest", x_manifest, "Property manifest (JSON)")->required();
  epc->add_option("--truth", x_truth, "Ground truth (CSV)")->required();
  epc->add_option("--mock", x_mock, "Fixture dir: play back canned responses");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (temp_opt->count() > 0) globals.temperature = temperature_flag;

  try {
    if (assess->parsed()) {
      return cmd_assess(globals, manifest_path, property_id, mock_dir, out_path);
    }
    if (batch->parsed()) {
      return cmd_batch(globals, b_manifest, b_mock, b_out, b_resume, b_parallel,
                       b_stages);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(e_predictions, e_truth, e_age, e_format);
    }
    if (prompts->parsed()) {
      if (p_action != "show") {
        std::cerr << "unknown action: " << p_action << "\n";
        return kExitUsage;
      }
      return cmd_prompts(globals, p_id);
    }
    if (epc->parsed()) {
      return cmd_epc_experiment(globals, x_mode, x_manifest, x_truth, x_mock);
    }
  } catch (const facade::AuthError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const facade::PromptError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const facade::DatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const facade::EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}
