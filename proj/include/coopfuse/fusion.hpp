// Copyright 2026 the coopfuse authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COOPFUSE_FUSION_HPP
#define COOPFUSE_FUSION_HPP

#include <optional>
#include <utility>

#include "coopfuse/codec.hpp"
#include "coopfuse/geometry.hpp"
#include "coopfuse/pointcloud.hpp"

namespace coopfuse {

struct FusedCloud {
  PointCloud cloud;  // receiver LiDAR frame
  std::size_t receiver_count = 0;
  std::size_t transmitter_count = 0;
  RelativeTransform transform_used;
};

/// Maps points from the LiDAR sensor frame to the vehicle body frame
/// (install rotation, then install translation).
inline PointCloud apply_install_extrinsic(const PointCloud& cloud,
                                          const VehiclePose& pose) {
  const Mat3 rotation = rotation_matrix(pose.install_rotation);
  PointCloud out = cloud;
  for (Point& p : out.points) {
    const Vec3 mapped =
        transform_point(rotation, pose.install_translation, p.position());
    p.x = static_cast<float>(mapped.x());
    p.y = static_cast<float>(mapped.y());
    p.z = static_cast<float>(mapped.z());
  }
  return out;
}

/// Merges the transmitter's package into the receiver's frame: decode the
/// payload, map every transmitter point through the relative pose (which
/// folds in both install extrinsics), and take the union with the
/// receiver's own points. Optional voxel dedup as a final pass.
inline FusedCloud fuse(const PointCloud& receiver_cloud,
                       const VehiclePose& receiver_pose,
                       const ExchangePackage& pkg,
                       std::optional<double> dedup_leaf = std::nullopt) {
  const RelativeTransform rel = relative_pose(receiver_pose, pkg.pose);
  const PointCloud transmitter_cloud =
      decode_points(pkg.payload, receiver_cloud.beam_count);

  FusedCloud fused;
  fused.receiver_count = receiver_cloud.size();
  fused.transmitter_count = transmitter_cloud.size();
  fused.transform_used = rel;
  fused.cloud.beam_count = receiver_cloud.beam_count;
  fused.cloud.frame_id = receiver_cloud.frame_id;
  fused.cloud.points = receiver_cloud.points;
  fused.cloud.points.reserve(receiver_cloud.size() + transmitter_cloud.size());
  for (const Point& p : transmitter_cloud.points) {
    const Vec3 mapped =
        transform_point(rel.rotation, rel.translation, p.position());
    fused.cloud.points.push_back(Point{static_cast<float>(mapped.x()),
                                       static_cast<float>(mapped.y()),
                                       static_cast<float>(mapped.z()),
                                       p.reflectance});
  }
  if (dedup_leaf) fused.cloud = voxel_downsample(fused.cloud, *dedup_leaf);
  return fused;
}

struct TwoVehicleEmulation {
  PointCloud receiver_cloud;
  VehiclePose receiver_pose;
  ExchangePackage package;
};

/// Treats two frames of one moving vehicle as a transmitter/receiver pair:
/// the earlier frame is wrapped as the transmitter's package, the later
/// frame is the receiver input.
inline TwoVehicleEmulation emulate_two_vehicle_from_sequence(
    const PointCloud& frame_t1, const VehiclePose& pose_t1,
    const PointCloud& frame_t2, const VehiclePose& pose_t2,
    std::uint64_t sender_id = 1, std::int64_t timestamp_us = 0) {
  TwoVehicleEmulation out;
  out.receiver_cloud = frame_t2;
  out.receiver_pose = pose_t2;
  out.package =
      make_package(sender_id, timestamp_us, pose_t1, FullFrame{}, frame_t1);
  return out;
}

}  // namespace coopfuse

#endif  // COOPFUSE_FUSION_HPP
