#include "capvton/pose.hpp"

#include <cmath>
#include <string>

#include "capvton/error.hpp"

namespace capvton {

std::string_view joint_name(Joint j) {
  static constexpr std::array<std::string_view, kJointCount> kNames = {
      "nose",       "neck",      "right_shoulder", "right_elbow", "right_wrist",
      "left_shoulder", "left_elbow", "left_wrist",  "right_hip",   "right_knee",
      "right_ankle", "left_hip",  "left_knee",      "left_ankle",  "right_eye",
      "left_eye",   "right_ear", "left_ear"};
  return kNames[static_cast<int>(j)];
}

PoseSkeleton::PoseSkeleton(const std::array<Keypoint, kJointCount>& keypoints)
    : keypoints_(keypoints) {
  for (int i = 0; i < kJointCount; ++i) {
    auto& k = keypoints_[i];
    if (!std::isfinite(k.x) || !std::isfinite(k.y) || !std::isfinite(k.confidence) ||
        k.confidence < 0.0 || k.confidence > 1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "keypoint " + std::string(joint_name(static_cast<Joint>(i))) +
                      " has invalid coordinates or confidence outside [0,1]");
    }
    if (k.confidence == 0.0) k.x = k.y = 0.0;
  }
}

PoseSkeleton PoseSkeleton::from_flat(std::span<const double> values) {
  if (values.size() != kJointCount * 3) {
    throw Error(ErrorCode::kFormatError, "pose needs " + std::to_string(kJointCount * 3) +
                                             " numbers, got " + std::to_string(values.size()));
  }
  std::array<Keypoint, kJointCount> kps{};
  for (int i = 0; i < kJointCount; ++i) {
    kps[i] = {values[3 * i], values[3 * i + 1], values[3 * i + 2]};
  }
  return PoseSkeleton(kps);
}

std::array<double, kJointCount * 3> PoseSkeleton::to_flat() const {
  std::array<double, kJointCount * 3> out{};
  for (int i = 0; i < kJointCount; ++i) {
    out[3 * i] = keypoints_[i].x;
    out[3 * i + 1] = keypoints_[i].y;
    out[3 * i + 2] = keypoints_[i].confidence;
  }
  return out;
}

}  // namespace capvton
