#include "capvton/config.hpp"

#include <cctype>
#include <cstdlib>
#include <set>

#include "capvton/io.hpp"
#include "capvton/remote_backends.hpp"

namespace capvton {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kFormatError, "config: " + what); }

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) bad("unknown key '" + k + "' in " + where);
  }
}

BackendSpec backend_from_json(const json& j, const std::string& where) {
  only_keys(j, {"kind", "command", "url", "timeout_s", "options"}, where);
  BackendSpec b;
  b.kind = j.value("kind", b.kind);
  b.command = j.value("command", b.command);
  b.url = j.value("url", b.url);
  b.timeout_s = j.value("timeout_s", b.timeout_s);
  if (j.contains("options")) b.options = j["options"];
  if (b.kind != "stub" && b.kind != "external-process" && b.kind != "http" && b.kind != "sidecar") {
    bad(where + ": unknown backend kind '" + b.kind + "'");
  }
  if (b.kind == "sidecar" && where != "backends.pose") bad(where + ": 'sidecar' is only for pose");
  if (b.timeout_s <= 0) bad(where + ": timeout_s must be > 0");
  return b;
}

json to_json(const BackendSpec& b) {
  json j = {{"kind", b.kind}, {"timeout_s", b.timeout_s}, {"options", b.options}};
  if (!b.command.empty()) j["command"] = b.command;
  if (!b.url.empty()) j["url"] = b.url;
  return j;
}

std::unique_ptr<Transport> transport_for(const BackendSpec& b, const std::string& role) {
  if (b.kind == "external-process") {
    if (b.command.empty()) bad(role + ": external-process needs a command");
    return make_process_transport(b.command, b.timeout_s);
  }
  if (b.url.empty()) bad(role + ": http needs a url");
  return make_http_transport(b.url, b.timeout_s);
}

LabelSchema schema_option(const BackendSpec& b) {
  if (b.options.contains("schema")) return io::read_label_schema(b.options["schema"].get<std::string>());
  return LabelSchema::viton_default();
}

Rgb rgb_option(const json& o, const char* key, Rgb fallback) {
  if (!o.contains(key)) return fallback;
  const auto& a = o[key];
  if (!a.is_array() || a.size() != 3) bad(std::string(key) + " must be [r, g, b]");
  auto ch = [&](int i) {
    const int v = a[i].get<int>();
    if (v < 0 || v > 255) bad(std::string(key) + " channel out of range");
    return static_cast<std::uint8_t>(v);
  };
  return {ch(0), ch(1), ch(2)};
}

std::unique_ptr<TryOnBackend> make_synthesizer(const std::string& id, const BackendSpec& b) {
  if (b.kind == "stub") {
    return std::make_unique<StubTryOn>("stub-" + id, b.options.value("mix", 1.0),
                                       b.options.value("jitter", 0));
  }
  return std::make_unique<RemoteTryOn>(transport_for(b, "synthesizer " + id));
}

MethodSpec method_from_json(const json& j, const PipelineConfig& base) {
  only_keys(j, {"name", "pipeline", "ensemble"}, "methods[]");
  MethodSpec m;
  m.name = j.at("name").get<std::string>();
  m.pipeline = j.value("pipeline", base.pipeline);
  json ens = to_json(base.ensemble);
  if (j.contains("ensemble")) ens.merge_patch(j["ensemble"]);
  m.ensemble = ensemble_config_from_json(ens);
  return m;
}

}  // namespace

PipelineConfig::PipelineConfig() {
  pose.kind = "sidecar";
  synthesizers["vitonhd"] = BackendSpec{};
  BackendSpec dresscode;
  dresscode.options = {{"mix", 0.85}};
  synthesizers["dresscode"] = dresscode;
}

void PipelineConfig::validate() const {
  skin.validate();
  if (metrics.fid_grid < 1) bad("metrics.fid_grid must be >= 1");
  if (metrics.lpips_levels < 1) bad("metrics.lpips_levels must be >= 1");
  std::set<std::string> names;
  for (const auto& m : resolved_methods()) {
    if (m.name.empty()) bad("method name must not be empty");
    if (!names.insert(m.name).second) bad("duplicate method name '" + m.name + "'");
    if (m.pipeline != "two_stage" && m.pipeline != "direct") {
      bad("method " + m.name + ": pipeline must be two_stage or direct");
    }
    if (!synthesizers.count(m.ensemble.synth_source)) {
      bad("method " + m.name + ": synthesizer '" + m.ensemble.synth_source + "' is not configured");
    }
    resolve_mask_spec(m.ensemble, 1024);
  }
}

std::vector<MethodSpec> PipelineConfig::resolved_methods() const {
  if (!methods.empty()) return methods;
  return {MethodSpec{"capvton", pipeline, ensemble}};
}

PipelineConfig config_from_json(const json& j) {
  only_keys(j, {"backends", "generate_skin", "ensemble", "pipeline", "metrics", "methods"}, "config");
  PipelineConfig c;
  if (j.contains("backends")) {
    const auto& b = j["backends"];
    only_keys(b, {"parser", "pose", "inpainter", "synthesizers"}, "backends");
    if (b.contains("parser")) c.parser = backend_from_json(b["parser"], "backends.parser");
    if (b.contains("pose")) c.pose = backend_from_json(b["pose"], "backends.pose");
    if (b.contains("inpainter")) c.inpainter = backend_from_json(b["inpainter"], "backends.inpainter");
    if (b.contains("synthesizers")) {
      c.synthesizers.clear();
      for (const auto& [id, spec] : b["synthesizers"].items()) {
        c.synthesizers[id] = backend_from_json(spec, "backends.synthesizers." + id);
      }
    }
  }
  if (j.contains("generate_skin")) c.skin = generate_skin_config_from_json(j["generate_skin"]);
  if (j.contains("ensemble")) {
    only_keys(j["ensemble"], {"mask_source", "synth_source", "category", "seed", "limb_margin"},
              "ensemble");
    c.ensemble = ensemble_config_from_json(j["ensemble"]);
  }
  c.pipeline = j.value("pipeline", c.pipeline);
  if (j.contains("metrics")) {
    const auto& m = j["metrics"];
    only_keys(m, {"nor_threshold", "nor_corridor_radius", "ssim_window", "ssim_sigma", "fid_grid",
                  "lpips_levels"},
              "metrics");
    c.metrics.nor.threshold = m.value("nor_threshold", c.metrics.nor.threshold);
    c.metrics.nor.corridor_radius = m.value("nor_corridor_radius", c.metrics.nor.corridor_radius);
    c.metrics.ssim.window = m.value("ssim_window", c.metrics.ssim.window);
    c.metrics.ssim.sigma = m.value("ssim_sigma", c.metrics.ssim.sigma);
    c.metrics.fid_grid = m.value("fid_grid", c.metrics.fid_grid);
    c.metrics.lpips_levels = m.value("lpips_levels", c.metrics.lpips_levels);
  }
  if (j.contains("methods")) {
    for (const auto& m : j["methods"]) c.methods.push_back(method_from_json(m, c));
  }
  c.validate();
  return c;
}

json to_json(const PipelineConfig& c) {
  json synth = json::object();
  for (const auto& [id, spec] : c.synthesizers) synth[id] = to_json(spec);
  json methods = json::array();
  for (const auto& m : c.methods) {
    methods.push_back({{"name", m.name}, {"pipeline", m.pipeline}, {"ensemble", to_json(m.ensemble)}});
  }
  return {{"backends",
           {{"parser", to_json(c.parser)},
            {"pose", to_json(c.pose)},
            {"inpainter", to_json(c.inpainter)},
            {"synthesizers", synth}}},
          {"generate_skin", to_json(c.skin)},
          {"ensemble", to_json(c.ensemble)},
          {"pipeline", c.pipeline},
          {"metrics",
           {{"nor_threshold", c.metrics.nor.threshold},
            {"nor_corridor_radius", c.metrics.nor.corridor_radius},
            {"ssim_window", c.metrics.ssim.window},
            {"ssim_sigma", c.metrics.ssim.sigma},
            {"fid_grid", c.metrics.fid_grid},
            {"lpips_levels", c.metrics.lpips_levels}}},
          {"methods", methods}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
}

std::string endpoint_env_name(const std::string& role) {
  std::string out = "CAPVTON_";
  for (char ch : role) {
    out += std::isalnum(static_cast<unsigned char>(ch))
               ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
               : '_';
  }
  return out + "_ENDPOINT";
}

BackendSpec apply_env_override(BackendSpec spec, const std::string& role) {
  const char* v = std::getenv(endpoint_env_name(role).c_str());
  if (!v || !*v) return spec;
  const std::string value = v;
  if (value.rfind("http://", 0) == 0 || value.rfind("https://", 0) == 0) {
    spec.kind = "http";
    spec.url = value;
  } else {
    spec.kind = "external-process";
    spec.command = value;
  }
  return spec;
}

BackendSet make_backends(const PipelineConfig& cfg,
                         std::shared_ptr<const SidecarRegistry> registry) {
  BackendSet set;

  const BackendSpec parser = apply_env_override(cfg.parser, "parser");
  std::unique_ptr<ParserBackend> inner_parser;
  if (parser.kind == "stub") {
    inner_parser = std::make_unique<PaletteParser>(PaletteParser::fixture_palette(),
                                                   schema_option(parser),
                                                   parser.options.value("tolerance", 0));
  } else {
    inner_parser = std::make_unique<RemoteParser>(transport_for(parser, "parser"), schema_option(parser));
  }
  set.parser = std::make_unique<SidecarParser>(std::move(inner_parser), registry);

  const BackendSpec pose = apply_env_override(cfg.pose, "pose");
  std::unique_ptr<PoseBackend> inner_pose;
  if (pose.kind == "external-process" || pose.kind == "http") {
    inner_pose = std::make_unique<RemotePose>(transport_for(pose, "pose"));
  } else if (pose.kind == "stub") {
    bad("backends.pose: there is no stub pose estimator, use 'sidecar' keypoint files");
  }
  set.pose = std::make_unique<SidecarPose>(std::move(inner_pose), registry);

  const BackendSpec inpainter = apply_env_override(cfg.inpainter, "inpainter");
  if (inpainter.kind == "stub") {
    set.inpainter = std::make_unique<StubSkinInpainter>(
        rgb_option(inpainter.options, "base_tone", {180, 140, 120}),
        inpainter.options.value("jitter", 0));
  } else {
    set.inpainter = std::make_unique<RemoteInpainter>(transport_for(inpainter, "inpainter"));
  }

  for (const auto& [id, spec] : cfg.synthesizers) {
    set.synthesizers[id] = make_synthesizer(id, apply_env_override(spec, "synth_" + id));
  }
  return set;
}

}  // namespace capvton
