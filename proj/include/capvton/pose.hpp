#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace capvton {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// COCO-18 joint order, as written by OpenPose's COCO model.
enum class Joint : int {
  kNose = 0,
  kNeck,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
  kRightEye,
  kLeftEye,
  kRightEar,
  kLeftEar,
};

inline constexpr int kJointCount = 18;

std::string_view joint_name(Joint j);

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  bool operator==(const Keypoint&) const = default;
};

class PoseSkeleton {
 public:
  PoseSkeleton() = default;
  explicit PoseSkeleton(const std::array<Keypoint, kJointCount>& keypoints);
  // x, y, confidence triplets, 54 numbers.
  static PoseSkeleton from_flat(std::span<const double> values);

  const Keypoint& keypoint(Joint j) const { return keypoints_[static_cast<int>(j)]; }
  bool visible(Joint j) const { return keypoint(j).confidence > 0.0; }
  // Coordinates of a zero-confidence joint are never exposed.
  std::optional<Point2> position(Joint j) const {
    if (!visible(j)) return std::nullopt;
    return Point2{keypoint(j).x, keypoint(j).y};
  }

  std::array<double, kJointCount * 3> to_flat() const;
  const std::array<Keypoint, kJointCount>& keypoints() const { return keypoints_; }

  bool operator==(const PoseSkeleton&) const = default;

 private:
  std::array<Keypoint, kJointCount> keypoints_{};
};

enum class Side { kRight, kLeft };

struct ArmJoints {
  Joint shoulder;
  Joint elbow;
  Joint wrist;
};

constexpr ArmJoints arm_joints(Side side) {
  return side == Side::kRight
             ? ArmJoints{Joint::kRightShoulder, Joint::kRightElbow, Joint::kRightWrist}
             : ArmJoints{Joint::kLeftShoulder, Joint::kLeftElbow, Joint::kLeftWrist};
}

}  // namespace capvton
