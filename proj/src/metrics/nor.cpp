#include "capvton/metrics/nor.hpp"

#include <algorithm>
#include <cmath>

#include "capvton/masking.hpp"

namespace capvton::metrics {

std::string_view to_string(NorStatus s) {
  switch (s) {
    case NorStatus::kNormal: return "normal";
    case NorStatus::kAbnormal: return "abnormal";
    case NorStatus::kExcluded: return "excluded";
  }
  return "unknown";
}

std::string_view to_string(NorSource s) { return s == NorSource::kHuman ? "human" : "automated"; }

NorCaseResult classify_case(const NorCase& c, const NorParams& params) {
  if (c.reference == SleeveClass::kLongSleeve) {
    throw Error(ErrorCode::kInvalidArgument, "normal output rate needs a short or sleeveless reference");
  }
  NorCaseResult out;
  if (c.human_normal) {
    out.source = NorSource::kHuman;
    out.status = *c.human_normal ? NorStatus::kNormal : NorStatus::kAbnormal;
    return out;
  }
  require_same_size(c.output.size(), c.parse.size(), "NOR output/parse");

  BinaryMask body = mask_invert(c.parse.mask_of({labels::kBackground}));
  const BinaryMask skin = detect_skin(c.output, body, params.skin_box);
  for (Side side : {Side::kRight, Side::kLeft}) {
    const ArmJoints j = arm_joints(side);
    const auto elbow = c.pose.position(j.elbow);
    const auto wrist = c.pose.position(j.wrist);
    if (!elbow || !wrist) continue;
    const double forearm = std::hypot(wrist->x - elbow->x, wrist->y - elbow->y);
    const double radius =
        params.corridor_radius > 0.0 ? params.corridor_radius : std::max(1.0, forearm / 4.0);
    BinaryMask corridor = rasterize_capsule(c.output.size(), *elbow, *wrist, radius);
    if (c.reference == SleeveClass::kSleeveless) {
      if (auto shoulder = c.pose.position(j.shoulder)) {
        const Point2 mid{(shoulder->x + elbow->x) / 2, (shoulder->y + elbow->y) / 2};
        corridor = mask_union(corridor, rasterize_capsule(c.output.size(), mid, *elbow, radius));
      }
    }
    corridor = mask_intersect(corridor, body);
    ArmExposure arm{side, corridor.count(), mask_intersect(corridor, skin).count(), 0.0};
    if (arm.corridor_pixels == 0) continue;
    arm.ratio = static_cast<double>(arm.skin_pixels) / static_cast<double>(arm.corridor_pixels);
    out.arms.push_back(arm);
  }
  if (out.arms.empty()) {
    out.status = NorStatus::kExcluded;
    out.warnings.push_back({WarningCode::kDegeneratePose,
                            "no visible forearm (elbow and wrist) to judge the sleeve"});
    return out;
  }
  const bool normal = std::all_of(out.arms.begin(), out.arms.end(),
                                  [&](const ArmExposure& a) { return a.ratio >= params.threshold; });
  out.status = normal ? NorStatus::kNormal : NorStatus::kAbnormal;
  return out;
}

NorReport summarize(std::vector<NorCaseResult> cases) {
  NorReport r;
  r.cases = std::move(cases);
  for (const auto& c : r.cases) {
    switch (c.status) {
      case NorStatus::kNormal: ++r.normal, ++r.evaluated; break;
      case NorStatus::kAbnormal: ++r.evaluated; break;
      case NorStatus::kExcluded: ++r.excluded; break;
    }
    append(r.warnings, c.warnings);
  }
  if (r.evaluated > 0) {
    r.rate = static_cast<double>(r.normal) / static_cast<double>(r.evaluated);
  }
  return r;
}

NorReport normal_output_rate(std::span<const NorCase> cases, const NorParams& params) {
  std::vector<NorCaseResult> results;
  results.reserve(cases.size());
  for (const auto& c : cases) results.push_back(classify_case(c, params));
  return summarize(std::move(results));
}

}  // namespace capvton::metrics
