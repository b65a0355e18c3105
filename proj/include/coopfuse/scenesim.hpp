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

#ifndef COOPFUSE_SCENESIM_HPP
#define COOPFUSE_SCENESIM_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "coopfuse/detect.hpp"
#include "coopfuse/geometry.hpp"
#include "coopfuse/pointcloud.hpp"

namespace coopfuse {

// Synthetic world used as the verification oracle: oriented boxes over an
// optional flat ground plane, scanned by an ideal spinning LiDAR.

struct SceneBox {
  int id = 0;
  std::string label = "car";  // "car" boxes are detection truth
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();  // length, width, height
  double yaw = 0.0;
  float reflectance = 0.5f;
};

struct Scene {
  std::vector<SceneBox> objects;
  bool has_ground = true;
  double ground_height = 0.0;
  float ground_reflectance = 0.1f;
  double extent = 200.0;
};

struct SensorModel {
  int beams = 16;
  double elevation_min_deg = -15.0;
  double elevation_max_deg = 15.0;
  double azimuth_step_deg = 0.2;
  double max_range = 100.0;
  double range_noise_sigma = 0.0;
  VehiclePose pose;

  static SensorModel for_beam_count(int beam_count) {
    const auto [lo, hi] = elevation_span_deg(beam_count);
    SensorModel s;
    s.beams = beam_count;
    s.elevation_min_deg = lo;
    s.elevation_max_deg = hi;
    return s;
  }
};

// All synthetic worlds share one geodetic anchor. At the equator the
// tangent-plane mapping is invertible to numerical precision, which keeps
// world-frame oracles consistent with the ENU math in relative_pose.
inline const GeodeticCoord kSceneOrigin{0.0, 0.0, 0.0};

/// VehiclePose whose body sits at (east, north, 0) in the shared world
/// frame with the LiDAR mounted sensor_height above it.
inline VehiclePose make_vehicle_pose(double east, double north, double yaw,
                                     double sensor_height = 1.8) {
  constexpr double deg = std::numbers::pi / 180.0;
  VehiclePose pose;
  pose.gps = GeodeticCoord(north / kWgs84EquatorialRadius / deg,
                           east / kWgs84EquatorialRadius / deg, 0.0);
  pose.imu = EulerAngles(yaw, 0.0, 0.0);
  pose.install_translation = Vec3(0.0, 0.0, sensor_height);
  return pose;
}

struct WorldTransform {
  Mat3 rotation = Mat3::Identity();  // sensor -> world
  Vec3 translation = Vec3::Zero();   // sensor origin in world
};

/// Sensor-to-world transform of a pose, in the shared scene frame.
inline WorldTransform sensor_to_world(const VehiclePose& pose) {
  const Mat3 body = rotation_matrix(pose.imu);
  WorldTransform w;
  w.rotation = body * rotation_matrix(pose.install_rotation);
  w.translation =
      geodetic_to_enu(kSceneOrigin, pose.gps) + body * pose.install_translation;
  return w;
}

namespace detail {

/// Slab-method intersection of ray o + t*d with an oriented box; returns
/// the entry distance, or +inf when the ray misses.
inline double ray_box_distance(const Vec3& origin, const Vec3& dir,
                               const SceneBox& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  // Into the box frame (rotate by -yaw about z).
  const Vec3 rel = origin - box.center;
  const Vec3 o(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(), rel.z());
  const Vec3 d(c * dir.x() + s * dir.y(), -s * dir.x() + c * dir.y(), dir.z());

  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double half = box.size[axis] / 2.0;
    if (std::abs(d[axis]) < 1e-12) {
      if (std::abs(o[axis]) > half)
        return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-half - o[axis]) / d[axis];
    double t1 = (half - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  return t_near > 1e-9 ? t_near : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// One ray per (beam, azimuth step); the first surface hit within max_range
/// yields a point in the sensor frame. Deterministic for a fixed seed.
inline PointCloud simulate_scan(const Scene& scene, const SensorModel& sensor,
                                std::uint64_t seed = 0) {
  constexpr double deg = std::numbers::pi / 180.0;
  const WorldTransform world = sensor_to_world(sensor.pose);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  PointCloud cloud;
  cloud.beam_count = sensor.beams;
  const int azimuth_steps =
      static_cast<int>(std::lround(360.0 / sensor.azimuth_step_deg));

  for (int beam = 0; beam < sensor.beams; ++beam) {
    const double elev =
        sensor.beams == 1
            ? (sensor.elevation_min_deg + sensor.elevation_max_deg) / 2.0 * deg
            : (sensor.elevation_min_deg +
               (sensor.elevation_max_deg - sensor.elevation_min_deg) * beam /
                   (sensor.beams - 1)) *
                  deg;
    const double ce = std::cos(elev), se = std::sin(elev);
    for (int step = 0; step < azimuth_steps; ++step) {
      const double az = step * sensor.azimuth_step_deg * deg;
      const Vec3 dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
      const Vec3 dir = world.rotation * dir_sensor;

      double best = std::numeric_limits<double>::infinity();
      float reflectance = 0.f;
      for (const SceneBox& box : scene.objects) {
        const double t = detail::ray_box_distance(world.translation, dir, box);
        if (t < best) {
          best = t;
          reflectance = box.reflectance;
        }
      }
      if (scene.has_ground && dir.z() < -1e-12) {
        const double t = (scene.ground_height - world.translation.z()) / dir.z();
        if (t > 1e-9 && t < best) {
          best = t;
          reflectance = scene.ground_reflectance;
        }
      }
      if (!(best <= sensor.max_range)) continue;
      double range = best;
      if (sensor.range_noise_sigma > 0.0)
        range += sensor.range_noise_sigma * noise(rng);
      const Vec3 p = range * dir_sensor;
      cloud.points.push_back(Point{static_cast<float>(p.x()),
                                   static_cast<float>(p.y()),
                                   static_cast<float>(p.z()), reflectance});
    }
  }
  return cloud;
}

/// Distance from a world-frame point to the nearest scene surface (box
/// faces inflated tangentially by `margin`, plus the ground plane).
inline double distance_to_surface(const Scene& scene, const Vec3& world_point,
                                  double margin = 0.02) {
  double best = std::numeric_limits<double>::infinity();
  if (scene.has_ground)
    best = std::abs(world_point.z() - scene.ground_height);
  for (const SceneBox& box : scene.objects) {
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec3 rel = world_point - box.center;
    const Vec3 q(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(),
                 rel.z());
    for (int axis = 0; axis < 3; ++axis) {
      for (int sign = -1; sign <= 1; sign += 2) {
        const double normal = q[axis] - sign * box.size[axis] / 2.0;
        double tangential_sq = 0.0;
        for (int other = 0; other < 3; ++other) {
          if (other == axis) continue;
          const double excess =
              std::max(0.0, std::abs(q[other]) - box.size[other] / 2.0 - margin);
          tangential_sq += excess * excess;
        }
        best = std::min(best, std::sqrt(normal * normal + tangential_sq));
      }
    }
  }
  return best;
}

/// Ground-truth boxes of "car" objects expressed in a sensor's frame.
/// Valid for sensors without pitch/roll, which holds for all generated
/// scenarios.
inline std::vector<DetectionBox> truth_boxes_in_sensor_frame(
    const Scene& scene, const VehiclePose& pose) {
  const WorldTransform world = sensor_to_world(pose);
  std::vector<DetectionBox> out;
  for (const SceneBox& box : scene.objects) {
    if (box.label != "car") continue;
    DetectionBox t;
    t.center = world.rotation.transpose() * (box.center - world.translation);
    t.size = box.size;
    t.yaw = normalize_angle(box.yaw - pose.imu.yaw - pose.install_rotation.yaw);
    t.score = 1.0;
    t.band = distance_band(t.center.norm());
    out.push_back(t);
  }
  return out;
}

enum class OcclusionVariant {
  None,    // no occluder: easy, both vehicles see the target
  Single,  // wall blocks vehicle A only: moderate
  Both     // target too distant for either single shot: hard
};

struct OcclusionScenario {
  Scene scene;
  VehiclePose pose_a;  // receiver
  VehiclePose pose_b;  // transmitter
  int hidden_object_id = 0;
};

/// Two-vehicle scenario around a target car. Depending on the variant the
/// target is visible to both vehicles, occluded from A by a wall, or placed
/// far enough that neither single scan clears the detector's cluster-size
/// threshold while the fused cloud does.
inline OcclusionScenario make_occlusion_scenario(
    std::uint64_t seed, OcclusionVariant variant = OcclusionVariant::Single) {
  std::mt19937_64 rng(seed ^ 0x5eedc0de);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  OcclusionScenario sc;
  sc.scene.has_ground = true;
  sc.pose_a = make_vehicle_pose(0.0, 0.0, 0.0);
  sc.pose_b = make_vehicle_pose(0.0, 9.0 + 2.0 * unit(rng), 0.0);

  const Vec3 car_size(4.5, 1.8, 1.5);
  int next_id = 1;

  // The target car.
  SceneBox target;
  target.id = next_id++;
  target.label = "car";
  if (variant == OcclusionVariant::Both) {
    // Distant target: each single scan returns too few points to cluster.
    // Diagonal yaw keeps two faces visible; a pure broadside at this range
    // degenerates to a one-face sliver that cannot anchor a box fit.
    target.center = Vec3(44.0 + 2.0 * unit(rng), 4.0 + 2.0 * unit(rng), 0.75);
    target.yaw = std::numbers::pi / 4 + 0.15 * (unit(rng) - 0.5);
  } else if (variant == OcclusionVariant::Single) {
    target.center =
        Vec3(14.0 + 4.0 * unit(rng), -1.0 + 2.0 * unit(rng), 0.75);
    target.yaw = 0.35 * (unit(rng) - 0.5);
  } else {
    // Laterally offset so both vehicles see two faces; a head-on view
    // yields a single-face sliver that the box fit cannot anchor. The yaw
    // band stays clear of both sight-line bearings for the same reason.
    target.center =
        Vec3(14.0 + 4.0 * unit(rng), 2.5 + 2.0 * unit(rng), 0.75);
    target.yaw = -0.15 + 0.1 * (unit(rng) - 0.5);
  }
  target.size = car_size;
  sc.hidden_object_id = target.id;
  sc.scene.objects.push_back(target);

  if (variant == OcclusionVariant::Single) {
    SceneBox wall;
    wall.id = next_id++;
    wall.label = "wall";
    wall.center = Vec3(target.center.x() / 2.0, target.center.y(), 1.5);
    wall.size = Vec3(0.3, 7.0, 3.0);
    wall.yaw = 0.0;
    wall.reflectance = 0.3f;
    sc.scene.objects.push_back(wall);
  }

  // Companion cars visible to both vehicles (easy objects).
  SceneBox left;
  left.id = next_id++;
  left.label = "car";
  left.center = Vec3(11.0 + 3.0 * unit(rng), -6.5 - 1.5 * unit(rng), 0.75);
  left.size = car_size;
  left.yaw = 0.2 * (unit(rng) - 0.5);
  sc.scene.objects.push_back(left);

  SceneBox ahead;
  ahead.id = next_id++;
  ahead.label = "car";
  ahead.center = Vec3(20.0 + 3.0 * unit(rng), 13.0 + 1.5 * unit(rng), 0.75);
  ahead.size = car_size;
  ahead.yaw = 0.2 * (unit(rng) - 0.5);
  sc.scene.objects.push_back(ahead);

  return sc;
}

}  // namespace coopfuse

#endif  // COOPFUSE_SCENESIM_HPP
