#include "capvton/eval/run.hpp"

#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

#include "capvton/eval/grid.hpp"
#include "capvton/eval/worker_pool.hpp"
#include "capvton/io.hpp"
#include "capvton/metrics/features.hpp"
#include "capvton/metrics/fid.hpp"
#include "capvton/metrics/lpips.hpp"
#include "capvton/metrics/ssim.hpp"

namespace capvton::eval {
namespace {

using json = nlohmann::json;

json warnings_json(const Warnings& ws) {
  json out = json::array();
  for (const auto& w : ws) out.push_back({{"code", to_string(w.code)}, {"message", w.message}});
  return out;
}

Warnings warnings_from_json(const json& j) {
  Warnings out;
  for (const auto& w : j) {
    out.push_back({parse_warning_code(w.at("code").get<std::string>()), w.at("message").get<std::string>()});
  }
  return out;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json nor_case_json(const metrics::NorCaseResult& r) {
  json arms = json::array();
  for (const auto& a : r.arms) {
    arms.push_back({{"side", a.side == Side::kRight ? "right" : "left"},
                    {"corridor_pixels", a.corridor_pixels},
                    {"skin_pixels", a.skin_pixels},
                    {"ratio", a.ratio}});
  }
  return {{"status", metrics::to_string(r.status)},
          {"source", metrics::to_string(r.source)},
          {"arms", arms},
          {"warnings", warnings_json(r.warnings)}};
}

struct MethodEntry {
  std::string name;
  bool external = false;
  MethodSpec spec;
  fs::path dir;
};

json method_json(const MethodEntry& m) {
  if (m.external) return {{"name", m.name}, {"kind", "external"}, {"dir", m.dir.string()}};
  return {{"name", m.name},
          {"kind", "pipeline"},
          {"pipeline", m.spec.pipeline},
          {"ensemble", to_json(m.spec.ensemble)}};
}

SleeveClass stage1_target(const DatasetItem& item, const GenerateSkinConfig& skin) {
  if (item.garment_sleeve && *item.garment_sleeve != SleeveClass::kLongSleeve) return *item.garment_sleeve;
  return skin.target_sleeve;
}

// Per-item metric values; shared by the live run and rescore so both agree bit for bit.
ItemScores score_item(const RasterImage& output, const RasterImage& person, bool paired,
                      const MetricSet& m, const MetricsConfig& mc,
                      const std::optional<metrics::NorCase>& nor_case) {
  ItemScores s;
  if (paired && m.ssim) s.ssim = metrics::ssim(output, person, mc.ssim);
  if (paired && m.lpips) {
    s.lpips = metrics::lpips(output, person, metrics::PyramidLayerExtractor(mc.lpips_levels));
  }
  if (nor_case) s.nor = metrics::classify_case(*nor_case, mc.nor);
  return s;
}

void replace_dir(const fs::path& tmp, const fs::path& final_dir) {
  const fs::path old = final_dir.parent_path() / ("." + final_dir.filename().string() + ".old");
  std::error_code ec;
  fs::remove_all(old, ec);
  if (fs::exists(final_dir)) fs::rename(final_dir, old);
  fs::rename(tmp, final_dir);
  fs::remove_all(old, ec);
}

std::optional<double> fid_of(const std::vector<RasterImage>& real, const std::vector<RasterImage>& gen,
                             int grid, Warnings& warnings, const std::string& where) {
  if (real.size() < 2 || gen.size() < 2) {
    warnings.push_back({WarningCode::kInsufficientSamples,
                        where + ": FID needs at least 2 real and 2 generated images"});
    return std::nullopt;
  }
  const metrics::GridColorExtractor ex(grid);
  metrics::StatsAccumulator a(ex.dim()), b(ex.dim());
  for (const auto& img : real) a.add(ex.extract(img));
  for (const auto& img : gen) b.add(ex.extract(img));
  return metrics::fid(a.finish(), b.finish());
}

// Aggregates records (already scored) into the report. Reads persisted
// outputs and person images for FID.
json build_report(const json& meta, const std::vector<RunRecord>& records, const fs::path& run_dir) {
  const MetricSet m = MetricSet::parse([&] {
    std::string csv;
    for (const auto& n : meta.at("metrics")) csv += (csv.empty() ? "" : ",") + n.get<std::string>();
    return csv;
  }());
  const PipelineConfig cfg = config_from_json(meta.at("config"));

  json report = {{"run", meta}};
  json counts = json::object();
  json scores = json::object();
  json warn = json::array();
  auto add_warnings = [&](const RunRecord& r, const Warnings& ws) {
    for (const auto& w : ws) {
      warn.push_back({{"method", r.method}, {"split", r.split}, {"item", r.item_id},
                      {"code", to_string(w.code)}, {"message", w.message}});
    }
  };

  for (const auto& mj : meta.at("methods")) {
    const std::string method = mj.at("name");
    json entry = json::object();
    std::vector<metrics::NorCaseResult> nor_cases;
    for (const auto& sj : meta.at("splits")) {
      const std::string split = sj;
      std::vector<const RunRecord*> recs;
      for (const auto& r : records) {
        if (r.method == method && r.split == split) recs.push_back(&r);
      }
      std::sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->order < b->order; });
      std::size_t ok = 0;
      for (auto* r : recs) {
        if (r->ok) ++ok;
        add_warnings(*r, r->warnings);
        if (!r->ok) {
          add_warnings(*r, {{WarningCode::kItemFailed, std::string(to_string(*r->error)) + ": " +
                                                           r->error_message}});
        }
        if (r->scores.nor) {
          nor_cases.push_back(*r->scores.nor);
          add_warnings(*r, r->scores.nor->warnings);
        }
      }
      counts[method][split] = {{"ok", ok}, {"failed", recs.size() - ok}};
      if (m.empty()) continue;

      json s = json::object();
      auto mean_of = [&](auto field) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto* r : recs) {
          if (auto v = field(*r)) sum += *v, ++n;
        }
        return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
      };
      if (split == "paired" && m.ssim) s["ssim"] = opt_json(mean_of([](const RunRecord& r) { return r.scores.ssim; }));
      if (split == "paired" && m.lpips) s["lpips"] = opt_json(mean_of([](const RunRecord& r) { return r.scores.lpips; }));
      if (m.fid) {
        std::vector<RasterImage> real, gen;
        for (auto* r : recs) {
          real.push_back(io::read_image(r->person));
          if (r->ok) gen.push_back(io::read_image(run_dir / r->dir / "output.png"));
        }
        Warnings fw;
        s["fid"] = opt_json(fid_of(real, gen, cfg.metrics.fid_grid, fw, method + "/" + split));
        for (const auto& w : fw) {
          warn.push_back({{"method", method}, {"split", split}, {"item", nullptr},
                          {"code", to_string(w.code)}, {"message", w.message}});
        }
      }
      entry[split] = s;
    }
    if (m.nor) entry["nor"] = nor_to_json(metrics::summarize(std::move(nor_cases)));
    if (!m.empty()) scores[method] = entry;
  }
  report["items"] = counts;
  if (!m.empty()) report["scores"] = scores;
  report["warnings"] = warn;
  return report;
}

std::string fmt(const json& v, const char* spec) {
  if (v.is_null()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v.get<double>());
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

MetricSet MetricSet::parse(std::string_view csv) {
  MetricSet m;
  std::stringstream ss{std::string(csv)};
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "fid") m.fid = true;
    else if (name == "ssim") m.ssim = true;
    else if (name == "lpips") m.lpips = true;
    else if (name == "nor") m.nor = true;
    else if (!name.empty()) throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
  }
  return m;
}

std::vector<std::string> MetricSet::names() const {
  std::vector<std::string> out;
  if (fid) out.push_back("fid");
  if (ssim) out.push_back("ssim");
  if (lpips) out.push_back("lpips");
  if (nor) out.push_back("nor");
  return out;
}

bool RunRecord::nor_case() const {
  return person_sleeve == SleeveClass::kLongSleeve && garment_sleeve &&
         *garment_sleeve != SleeveClass::kLongSleeve;
}

json to_json(const RunRecord& r) {
  auto sleeve = [](const std::optional<SleeveClass>& s) { return s ? json(to_string(*s)) : json(nullptr); };
  json j = {{"method", r.method},
            {"split", r.split},
            {"item", r.item_id},
            {"order", r.order},
            {"status", r.ok ? "ok" : "failed"},
            {"person", r.person.string()},
            {"garment", r.garment.string()},
            {"category", to_string(r.category)},
            {"person_sleeve", sleeve(r.person_sleeve)},
            {"garment_sleeve", sleeve(r.garment_sleeve)},
            {"dir", r.dir.generic_string()},
            {"manifest", r.manifest},
            {"metrics", {{"ssim", opt_json(r.scores.ssim)}, {"lpips", opt_json(r.scores.lpips)}}},
            {"nor", r.scores.nor ? nor_case_json(*r.scores.nor) : json(nullptr)},
            {"human_normal", r.human_normal ? json(*r.human_normal) : json(nullptr)},
            {"warnings", warnings_json(r.warnings)},
            {"wall_time_s", r.wall_time_s}};
  if (r.error) j["error"] = {{"code", to_string(*r.error)}, {"message", r.error_message}};
  return j;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.method = j.at("method");
  r.split = j.at("split");
  r.item_id = j.at("item");
  r.order = j.at("order");
  r.ok = j.at("status") == "ok";
  if (j.contains("error")) {
    r.error = parse_error_code(j["error"].at("code").get<std::string>());
    r.error_message = j["error"].at("message");
  }
  r.person = j.at("person").get<std::string>();
  r.garment = j.at("garment").get<std::string>();
  r.category = parse_category(j.at("category").get<std::string>());
  if (!j.at("person_sleeve").is_null()) r.person_sleeve = parse_sleeve(j["person_sleeve"].get<std::string>());
  if (!j.at("garment_sleeve").is_null()) r.garment_sleeve = parse_sleeve(j["garment_sleeve"].get<std::string>());
  r.dir = j.at("dir").get<std::string>();
  r.manifest = j.at("manifest");
  if (!j["metrics"]["ssim"].is_null()) r.scores.ssim = j["metrics"]["ssim"].get<double>();
  if (!j["metrics"]["lpips"].is_null()) r.scores.lpips = j["metrics"]["lpips"].get<double>();
  if (!j.at("human_normal").is_null()) r.human_normal = j["human_normal"].get<bool>();
  r.warnings = warnings_from_json(j.at("warnings"));
  r.wall_time_s = j.value("wall_time_s", 0.0);
  return r;
}

EvalResult run_eval(std::span<const DatasetIndex> splits, const PipelineConfig& cfg,
                    const EvalOptions& options) {
  cfg.validate();
  if (splits.empty()) throw Error(ErrorCode::kEmptyDataset, "no dataset split to evaluate");
  std::set<std::string> split_names;
  for (const auto& s : splits) {
    if (s.items.empty()) throw Error(ErrorCode::kEmptyDataset, "split has no items");
    if (!split_names.insert(std::string(to_string(s.pairing))).second) {
      throw Error(ErrorCode::kInvalidArgument, "each pairing may appear once per run");
    }
  }

  std::vector<MethodEntry> methods;
  for (const auto& m : cfg.resolved_methods()) methods.push_back({m.name, false, m, {}});
  for (const auto& e : options.external) methods.push_back({e.name, true, {}, e.dir});
  {
    std::set<std::string> names;
    for (const auto& m : methods) {
      if (!names.insert(m.name).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate method name '" + m.name + "'");
      }
    }
  }

  // Sidecars are registered up front; workers only read the registry.
  auto registry = std::make_shared<SidecarRegistry>();
  {
    std::set<fs::path> seen;
    for (const auto& s : splits) {
      for (const auto& item : s.items) {
        if (!seen.insert(item.person).second || (!item.parse && !item.pose)) continue;
        const RasterImage person = io::read_image(item.person);
        if (item.parse) registry->add_parse(person, *item.parse);
        if (item.pose) registry->add_pose(person, *item.pose);
      }
    }
  }

  json meta = {{"dataset", splits.front().root.string()},
               {"seed", splits.front().seed},
               {"splits", json::array()},
               {"metrics", options.metrics.names()},
               {"methods", json::array()},
               {"config", to_json(cfg)},
               {"size", json::object()}};
  for (const auto& s : splits) {
    meta["splits"].push_back(to_string(s.pairing));
    meta["size"][std::string(to_string(s.pairing))] = s.items.size();
  }
  for (const auto& m : methods) meta["methods"].push_back(method_json(m));

  struct Job {
    std::size_t method, split, item;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t s = 0; s < splits.size(); ++s) {
      for (std::size_t i = 0; i < splits[s].items.size(); ++i) jobs.push_back({m, s, i});
    }
  }

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  std::vector<BackendSet> sets;
  for (int w = 0; w < workers; ++w) sets.push_back(make_backends(cfg, registry));

  fs::create_directories(options.run_dir);
  std::vector<RunRecord> records(jobs.size());
  parallel_for(jobs.size(), workers, [&](int w, std::size_t j) {
    const auto t0 = std::chrono::steady_clock::now();
    const MethodEntry& method = methods[jobs[j].method];
    const DatasetIndex& split = splits[jobs[j].split];
    const DatasetItem& item = split.items[jobs[j].item];
    BackendSet& set = sets[w];

    RunRecord& rec = records[j];
    rec.method = method.name;
    rec.split = std::string(to_string(split.pairing));
    rec.item_id = item.id;
    rec.order = jobs[j].item;
    rec.person = item.person;
    rec.garment = item.garment;
    rec.category = item.category;
    rec.person_sleeve = item.person_sleeve;
    rec.garment_sleeve = item.garment_sleeve;
    rec.dir = fs::path("items") / method.name / rec.split / item.id;
    rec.human_normal = options.human_labels.lookup(method.name, item.id);

    const fs::path final_dir = options.run_dir / rec.dir;
    const fs::path tmp = final_dir.parent_path() / ("." + item.id + ".tmp");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp);
    try {
      const RasterImage person = io::read_image(item.person);
      RasterImage output;
      PoseSkeleton pose;
      if (method.external) {
        const fs::path src = method.dir / (item.id + ".png");
        output = io::read_image(src);
        pose = run_pose(*set.pose, person);
        rec.manifest = {{"pipeline", "external"}, {"source", src.string()}};
      } else {
        const RasterImage garment = io::read_image(item.garment);
        EnsembleConfig ens = method.spec.ensemble;
        ens.category = item.category;
        TryOnResult res;
        if (method.spec.pipeline == "direct") {
          res = tryon_direct(person, garment, ens, set);
        } else {
          GenerateSkinConfig skin = cfg.skin;
          skin.target_sleeve = stage1_target(item, cfg.skin);
          res = tryon(person, garment, ens, skin, set);
          io::write_png(tmp / "preinpainted.png", res.stage1->preinpainted);
          io::write_mask(tmp / "inpaint_mask.png", res.stage1->inpaint_mask);
        }
        io::write_mask(tmp / "agnostic_mask.png", res.agnostic_mask);
        output = std::move(res.output);
        pose = std::move(res.pose);
        rec.manifest = std::move(res.manifest);
        rec.warnings = std::move(res.warnings);
      }
      io::write_png(tmp / "output.png", output);
      io::write_pose(tmp / "pose.json", pose);

      std::optional<metrics::NorCase> nor_case;
      if (options.metrics.nor && rec.nor_case()) {
        nor_case = metrics::NorCase{output, pose, {}, *rec.garment_sleeve, rec.human_normal};
        if (!rec.human_normal) {
          nor_case->parse = run_parser(*set.parser, output);
          io::write_parse(tmp / "nor_parse.png", nor_case->parse);
        }
      }
      rec.scores = score_item(output, person, split.pairing == Pairing::kPaired, options.metrics,
                              cfg.metrics, nor_case);
      rec.ok = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.code();
      rec.error_message = e.what();
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_text_atomic(tmp / "record.json", to_json(rec).dump(2) + "\n");
    replace_dir(tmp, final_dir);
  });

  const auto ok = std::find_if(records.begin(), records.end(), [](const RunRecord& r) { return r.ok; });
  if (ok == records.end()) {
    throw Error(*records.front().error, "every item failed; first failure: " + records.front().error_message);
  }

  io::write_text_atomic(options.run_dir / "run.json", meta.dump(2) + "\n");
  json report = build_report(meta, records, options.run_dir);
  io::write_text_atomic(options.run_dir / "report.json", report.dump(2) + "\n");
  io::write_text_atomic(options.run_dir / "report.txt", render_report(report));

  if (options.write_grid) {
    for (std::size_t s = 0; s < splits.size(); ++s) {
      const std::string split = std::string(to_string(splits[s].pairing));
      std::vector<GridRow> rows;
      for (std::size_t i = 0; i < splits[s].items.size(); ++i) {
        const auto& item = splits[s].items[i];
        GridRow row{io::read_image(item.person), io::read_image(item.garment), {}};
        for (const auto& r : records) {
          if (r.split != split || r.order != i) continue;
          row.outputs.push_back(r.ok ? io::read_image(options.run_dir / r.dir / "output.png")
                                     : RasterImage(row.input.width(), row.input.height(), Rgb{128, 128, 128}));
        }
        rows.push_back(std::move(row));
      }
      io::write_png(options.run_dir / ("grid_" + split + ".png"), emit_grid(rows, options.grid_gutter));
    }
  }
  return {std::move(report), std::move(records)};
}

json rescore(const fs::path& run_dir) {
  const json meta = json::parse(io::read_text(run_dir / "run.json"));
  const PipelineConfig cfg = config_from_json(meta.at("config"));
  std::string csv;
  for (const auto& n : meta.at("metrics")) csv += (csv.empty() ? "" : ",") + n.get<std::string>();
  const MetricSet m = MetricSet::parse(csv);

  std::vector<RunRecord> records;
  for (const auto& mj : meta.at("methods")) {
    for (const auto& sj : meta.at("splits")) {
      const fs::path dir = run_dir / "items" / mj.at("name").get<std::string>() / sj.get<std::string>();
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> items;
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && e.path().filename().string()[0] != '.') items.push_back(e.path());
      }
      std::sort(items.begin(), items.end());
      for (const auto& item_dir : items) {
        RunRecord r = run_record_from_json(json::parse(io::read_text(item_dir / "record.json")));
        r.scores = {};
        if (r.ok) {
          const RasterImage output = io::read_image(item_dir / "output.png");
          const RasterImage person = io::read_image(r.person);
          std::optional<metrics::NorCase> nor_case;
          if (m.nor && r.nor_case()) {
            nor_case = metrics::NorCase{output, io::read_pose(item_dir / "pose.json"), {},
                                        *r.garment_sleeve, r.human_normal};
            if (!r.human_normal) nor_case->parse = io::read_parse(item_dir / "nor_parse.png");
          }
          r.scores = score_item(output, person, r.split == "paired", m, cfg.metrics, nor_case);
        }
        records.push_back(std::move(r));
      }
    }
  }
  return build_report(meta, records, run_dir);
}

json nor_to_json(const metrics::NorReport& r) {
  std::size_t human = 0;
  for (const auto& c : r.cases) human += c.source == metrics::NorSource::kHuman;
  return {{"normal", r.normal},
          {"evaluated", r.evaluated},
          {"excluded", r.excluded},
          {"human_labeled", human},
          {"rate", opt_json(r.rate)}};
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

std::string render_report(const json& report) {
  std::ostringstream out;
  const json& run = report.at("run");
  std::string splits, metrics_list;
  for (const auto& s : run.at("splits")) splits += (splits.empty() ? "" : ",") + s.get<std::string>();
  for (const auto& s : run.at("metrics")) metrics_list += (metrics_list.empty() ? "" : ",") + s.get<std::string>();
  out << "dataset: " << run.at("dataset").get<std::string>() << "\n"
      << "splits:  " << splits << "\n"
      << "metrics: " << (metrics_list.empty() ? "(none)" : metrics_list) << "\n\n";

  std::size_t width = 6;
  for (const auto& m : run.at("methods")) width = std::max(width, m.at("name").get<std::string>().size());
  width += 2;

  out << pad("method", width, false) << pad("ok", 4, true) << pad("failed", 8, true) << "\n";
  for (const auto& m : run.at("methods")) {
    const std::string name = m.at("name");
    std::size_t ok = 0, failed = 0;
    for (const auto& [split, c] : report.at("items").at(name).items()) {
      ok += c.at("ok").get<std::size_t>();
      failed += c.at("failed").get<std::size_t>();
    }
    out << pad(name, width, false) << pad(std::to_string(ok), 4, true)
        << pad(std::to_string(failed), 8, true) << "\n";
  }

  if (!report.contains("scores")) return out.str();
  const json& scores = report["scores"];
  auto cell = [&](const std::string& method, const char* split, const char* key, const char* spec) {
    const json& e = scores.at(method);
    if (!e.contains(split) || !e[split].contains(key)) return std::string("-");
    return fmt(e[split][key], spec);
  };
  out << "\n"
      << pad("method", width, false) << pad("paired FID", 12, true) << pad("SSIM", 9, true)
      << pad("LPIPS", 9, true) << pad("unpaired FID", 14, true) << "\n";
  for (const auto& m : run.at("methods")) {
    const std::string name = m.at("name");
    out << pad(name, width, false) << pad(cell(name, "paired", "fid", "%.4f"), 12, true)
        << pad(cell(name, "paired", "ssim", "%.4f"), 9, true)
        << pad(cell(name, "paired", "lpips", "%.4f"), 9, true)
        << pad(cell(name, "unpaired", "fid", "%.4f"), 14, true) << "\n";
  }

  bool any_nor = false;
  for (const auto& m : run.at("methods")) any_nor |= scores.at(m.at("name").get<std::string>()).contains("nor");
  if (any_nor) {
    out << "\nnormal output rate (long-sleeve inputs)\n"
        << pad("method", width, false) << pad("normal", 8, true) << pad("evaluated", 11, true)
        << pad("excluded", 10, true) << pad("rate", 8, true) << "\n";
    for (const auto& m : run.at("methods")) {
      const std::string name = m.at("name");
      const json& n = scores.at(name).at("nor");
      out << pad(name, width, false) << pad(std::to_string(n.at("normal").get<std::size_t>()), 8, true)
          << pad(std::to_string(n.at("evaluated").get<std::size_t>()), 11, true)
          << pad(std::to_string(n.at("excluded").get<std::size_t>()), 10, true)
          << pad(n.at("rate").is_null() ? "-" : format_percent(n["rate"].get<double>()), 8, true)
          << "\n";
    }
  }
  return out.str();
}

}  // namespace capvton::eval
