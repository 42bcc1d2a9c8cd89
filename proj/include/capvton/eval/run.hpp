#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capvton/config.hpp"
#include "capvton/eval/dataset.hpp"
#include "capvton/metrics/nor.hpp"
#include "json.hpp"

namespace capvton::eval {

struct MetricSet {
  bool fid = false;
  bool ssim = false;
  bool lpips = false;
  bool nor = false;

  // Comma-separated subset of fid,ssim,lpips,nor; "" is the empty set.
  static MetricSet parse(std::string_view csv);
  static MetricSet all() { return {true, true, true, true}; }
  std::vector<std::string> names() const;
  bool empty() const { return !fid && !ssim && !lpips && !nor; }
};

// Outputs of a model run elsewhere: <dir>/<item id>.png, scored like the
// pipeline's own methods.
struct ExternalMethod {
  std::string name;
  fs::path dir;
};

struct EvalOptions {
  fs::path run_dir;
  MetricSet metrics = MetricSet::all();
  int workers = 1;
  std::vector<ExternalMethod> external;
  HumanLabels human_labels;
  bool write_grid = true;
  int grid_gutter = 4;
};

struct ItemScores {
  std::optional<double> ssim;
  std::optional<double> lpips;
  std::optional<metrics::NorCaseResult> nor;
};

// One (method, split, item) outcome, persisted as items/<method>/<split>/<id>/record.json
// next to output.png and the intermediates.
struct RunRecord {
  std::string method;
  std::string split;
  std::string item_id;
  std::size_t order = 0;
  bool ok = false;
  std::optional<ErrorCode> error;
  std::string error_message;
  fs::path person;
  fs::path garment;
  GarmentCategory category = GarmentCategory::kUpper;
  std::optional<SleeveClass> person_sleeve;
  std::optional<SleeveClass> garment_sleeve;
  // Relative to the run directory.
  fs::path dir;
  nlohmann::json manifest;
  ItemScores scores;
  std::optional<bool> human_normal;
  Warnings warnings;
  double wall_time_s = 0.0;

  // Long-sleeve person dressed in a short-sleeve or sleeveless garment.
  bool nor_case() const;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

struct EvalResult {
  nlohmann::json report;
  std::vector<RunRecord> records;
};

// Runs every configured method (plus external ones) over every split, writes
// per-item records, run.json, report.json, report.txt and grid_<split>.png
// under options.run_dir. Item failures are recorded and skipped; the run
// itself fails only when no item succeeds.
EvalResult run_eval(std::span<const DatasetIndex> splits, const PipelineConfig& cfg,
                    const EvalOptions& options);

// Recomputes the report purely from a run directory's persisted outputs.
nlohmann::json rescore(const fs::path& run_dir);

// Text rendering: a paired FID/SSIM/LPIPS plus unpaired FID table per method,
// then the normal output rate per method.
std::string render_report(const nlohmann::json& report);

nlohmann::json nor_to_json(const metrics::NorReport& r);
// 0.925 -> "92.5%".
std::string format_percent(double fraction);

}  // namespace capvton::eval
