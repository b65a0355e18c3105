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

#ifndef COOPFUSE_JSON_IO_HPP
#define COOPFUSE_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "coopfuse/detect.hpp"
#include "coopfuse/geometry.hpp"
#include "coopfuse/harness.hpp"
#include "coopfuse/scenesim.hpp"

namespace coopfuse {

using Json = nlohmann::json;

// Pose file schema (angles in degrees at the file boundary):
// {
//   "gps": {"latitude_deg": .., "longitude_deg": .., "altitude_m": ..},
//   "imu_deg": {"yaw": .., "pitch": .., "roll": ..},
//   "install": {"translation_m": [x, y, z],
//               "rotation_deg": {"yaw": .., "pitch": .., "roll": ..}}
// }

inline Json euler_to_json_deg(const EulerAngles& e) {
  constexpr double to_deg = 180.0 / std::numbers::pi;
  return {{"yaw", e.yaw * to_deg},
          {"pitch", e.pitch * to_deg},
          {"roll", e.roll * to_deg}};
}

inline EulerAngles euler_from_json_deg(const Json& j) {
  constexpr double to_rad = std::numbers::pi / 180.0;
  return EulerAngles(j.at("yaw").get<double>() * to_rad,
                     j.at("pitch").get<double>() * to_rad,
                     j.at("roll").get<double>() * to_rad);
}

inline Json pose_to_json(const VehiclePose& pose) {
  return {{"gps",
           {{"latitude_deg", pose.gps.latitude_deg},
            {"longitude_deg", pose.gps.longitude_deg},
            {"altitude_m", pose.gps.altitude_m}}},
          {"imu_deg", euler_to_json_deg(pose.imu)},
          {"install",
           {{"translation_m",
             {pose.install_translation.x(), pose.install_translation.y(),
              pose.install_translation.z()}},
            {"rotation_deg", euler_to_json_deg(pose.install_rotation)}}}};
}

inline VehiclePose pose_from_json(const Json& j) {
  VehiclePose pose;
  const Json& gps = j.at("gps");
  pose.gps = GeodeticCoord(gps.at("latitude_deg").get<double>(),
                           gps.at("longitude_deg").get<double>(),
                           gps.at("altitude_m").get<double>());
  pose.imu = euler_from_json_deg(j.at("imu_deg"));
  if (j.contains("install")) {
    const Json& install = j.at("install");
    const auto t = install.at("translation_m");
    pose.install_translation = Vec3(t.at(0).get<double>(),
                                    t.at(1).get<double>(),
                                    t.at(2).get<double>());
    pose.install_rotation = euler_from_json_deg(install.at("rotation_deg"));
  }
  return pose;
}

// Scene file schema:
// {
//   "ground": {"present": true, "height_m": 0.0},
//   "objects": [{"id": 1, "label": "car", "center_m": [x, y, z],
//                "size_m": [l, w, h], "yaw_deg": .., "reflectance": ..}],
//   "poses": {"a": <pose>, "b": <pose>},        (optional)
//   "sensor": {"beams": 64, "azimuth_step_deg": 0.2, "max_range_m": 100}
//              (optional)
// }

inline Json scene_to_json(const Scene& scene) {
  constexpr double to_deg = 180.0 / std::numbers::pi;
  Json objects = Json::array();
  for (const SceneBox& box : scene.objects)
    objects.push_back({{"id", box.id},
                       {"label", box.label},
                       {"center_m", {box.center.x(), box.center.y(), box.center.z()}},
                       {"size_m", {box.size.x(), box.size.y(), box.size.z()}},
                       {"yaw_deg", box.yaw * to_deg},
                       {"reflectance", box.reflectance}});
  return {{"ground",
           {{"present", scene.has_ground}, {"height_m", scene.ground_height}}},
          {"objects", objects}};
}

inline Scene scene_from_json(const Json& j) {
  constexpr double to_rad = std::numbers::pi / 180.0;
  Scene scene;
  if (j.contains("ground")) {
    scene.has_ground = j.at("ground").value("present", true);
    scene.ground_height = j.at("ground").value("height_m", 0.0);
  }
  for (const Json& o : j.at("objects")) {
    SceneBox box;
    box.id = o.value("id", 0);
    box.label = o.value("label", "car");
    const auto& c = o.at("center_m");
    box.center = Vec3(c.at(0).get<double>(), c.at(1).get<double>(),
                      c.at(2).get<double>());
    const auto& s = o.at("size_m");
    box.size = Vec3(s.at(0).get<double>(), s.at(1).get<double>(),
                    s.at(2).get<double>());
    box.yaw = o.value("yaw_deg", 0.0) * to_rad;
    box.reflectance = o.value("reflectance", 0.5f);
    scene.objects.push_back(box);
  }
  return scene;
}

inline Json detection_to_json(const DetectionBox& box) {
  return {{"center_m", {box.center.x(), box.center.y(), box.center.z()}},
          {"size_m", {box.size.x(), box.size.y(), box.size.z()}},
          {"yaw_rad", box.yaw},
          {"score", box.score},
          {"distance_band", to_string(box.band)},
          {"point_count", box.point_count}};
}

/// JSON-lines report: one detection box per line.
inline std::string detections_to_jsonl(const std::vector<DetectionBox>& boxes) {
  std::string out;
  for (const DetectionBox& box : boxes) {
    out += detection_to_json(box).dump();
    out += '\n';
  }
  return out;
}

inline Json experiment_report_to_json(const ExperimentReport& report) {
  Json objects = Json::array();
  for (const ObjectRecord& rec : report.objects)
    objects.push_back({{"truth_id", rec.truth_id},
                       {"detected_a", rec.detected_a},
                       {"detected_b", rec.detected_b},
                       {"detected_fused", rec.detected_fused},
                       {"score_a", rec.score_a},
                       {"score_b", rec.score_b},
                       {"score_fused", rec.score_fused},
                       {"improvement", rec.improvement()},
                       {"difficulty", to_string(rec.difficulty)},
                       {"distance_band", to_string(rec.band)}});
  return {{"objects", objects},
          {"detections_a", report.detections_a},
          {"detections_b", report.detections_b},
          {"detections_fused", report.detections_fused}};
}

inline std::string experiment_objects_csv(
    const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "scenario,truth_id,detected_a,detected_b,detected_fused,"
         "score_a,score_b,score_fused,improvement,difficulty,distance_band\n";
  for (std::size_t i = 0; i < reports.size(); ++i)
    for (const ObjectRecord& rec : reports[i].objects)
      out << i << ',' << rec.truth_id << ',' << rec.detected_a << ','
          << rec.detected_b << ',' << rec.detected_fused << ',' << rec.score_a
          << ',' << rec.score_b << ',' << rec.score_fused << ','
          << rec.improvement() << ',' << to_string(rec.difficulty) << ','
          << to_string(rec.band) << '\n';
  return out.str();
}

}  // namespace coopfuse

#endif  // COOPFUSE_JSON_IO_HPP
