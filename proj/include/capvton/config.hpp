#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capvton/backends.hpp"
#include "capvton/generate_skin.hpp"
#include "capvton/metrics/nor.hpp"
#include "capvton/metrics/ssim.hpp"
#include "capvton/tryon.hpp"
#include "json.hpp"

namespace capvton {

// One model role. kind is "stub", "external-process" (command template, see
// make_process_transport) or "http" (url). For the pose role, "sidecar" means
// precomputed keypoint files only. `options` holds stub parameters:
//   parser:      tolerance (0), schema (label schema file, VITON default)
//   inpainter:   base_tone ([180,140,120]), jitter (0)
//   synthesizer: mix (1.0), jitter (0)
struct BackendSpec {
  std::string kind = "stub";
  std::string command;
  std::string url;
  double timeout_s = 300.0;
  nlohmann::json options = nlohmann::json::object();
};

struct MethodSpec {
  std::string name;
  // "two_stage" (generate-skin then try-on) or "direct" (try-on only).
  std::string pipeline = "two_stage";
  EnsembleConfig ensemble;
};

struct MetricsConfig {
  metrics::NorParams nor;
  metrics::SsimParams ssim;
  // GridColorExtractor grid for FID features.
  int fid_grid = 4;
  // PyramidLayerExtractor depth for LPIPS.
  int lpips_levels = 3;
};

struct PipelineConfig {
  BackendSpec parser;
  BackendSpec pose;
  BackendSpec inpainter;
  // Synthesizer id -> backend. Defaults: "vitonhd" and "dresscode" stubs.
  std::map<std::string, BackendSpec> synthesizers;
  GenerateSkinConfig skin;
  EnsembleConfig ensemble;
  std::string pipeline = "two_stage";
  MetricsConfig metrics;
  // Evaluation sweep; empty means one method "capvton" from pipeline + ensemble.
  std::vector<MethodSpec> methods;

  PipelineConfig();
  // Every method's synthesizer and mask source must resolve.
  void validate() const;
  std::vector<MethodSpec> resolved_methods() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

// Environment overrides, applied by make_backends: CAPVTON_PARSER_ENDPOINT,
// CAPVTON_POSE_ENDPOINT, CAPVTON_INPAINTER_ENDPOINT and
// CAPVTON_SYNTH_<ID>_ENDPOINT (id upper-cased, other characters as '_'). An
// http:// or https:// value selects the http kind, anything else is a command
// template for external-process.
std::string endpoint_env_name(const std::string& role);
BackendSpec apply_env_override(BackendSpec spec, const std::string& role);

// Constructs one worker's backends. Parser and pose consult `registry` first.
BackendSet make_backends(const PipelineConfig& cfg,
                         std::shared_ptr<const SidecarRegistry> registry);

}  // namespace capvton
