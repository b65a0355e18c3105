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

#ifndef COOPFUSE_HARNESS_HPP
#define COOPFUSE_HARNESS_HPP

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coopfuse/detect.hpp"
#include "coopfuse/fusion.hpp"
#include "coopfuse/scenesim.hpp"

namespace coopfuse {

struct ObjectRecord {
  int truth_id = 0;
  bool detected_a = false;
  bool detected_b = false;
  bool detected_fused = false;
  double score_a = 0.0;  // 0 when undetected
  double score_b = 0.0;
  double score_fused = 0.0;
  Difficulty difficulty = Difficulty::Hard;
  DistanceBand band = DistanceBand::Near;

  /// fused score minus the best single-shot score (0 for misses).
  double improvement() const {
    return score_fused - std::max(score_a, score_b);
  }
};

struct ExperimentReport {
  std::vector<ObjectRecord> objects;
  std::size_t detections_a = 0;
  std::size_t detections_b = 0;
  std::size_t detections_fused = 0;
};

struct HarnessConfig {
  SensorModel sensor = SensorModel::for_beam_count(64);
  DetectorParams detector{
      .ground_height_tolerance = 0.2,
      .cluster_distance = 0.5,
      .min_cluster_points = 200,
      .expected_density = 250.0,
  };
  double iou_threshold = 0.3;
  std::optional<double> dedup_leaf;  // off by default
};

/// Scans the scene from both poses, runs the detector on scan A, scan B,
/// and the fused cloud, and matches each condition against the scene's
/// ground-truth cars. `reported_pose_b` lets the transmitter advertise a
/// skewed GPS reading while still being scanned from its true pose.
inline ExperimentReport run_two_vehicle_experiment(
    const Scene& scene, const VehiclePose& pose_a, const VehiclePose& pose_b,
    const HarnessConfig& cfg = {},
    const std::optional<VehiclePose>& reported_pose_b = std::nullopt) {
  SensorModel sensor_a = cfg.sensor;
  sensor_a.pose = pose_a;
  SensorModel sensor_b = cfg.sensor;
  sensor_b.pose = pose_b;

  const PointCloud scan_a = simulate_scan(scene, sensor_a);
  const PointCloud scan_b = simulate_scan(scene, sensor_b);
  const ExchangePackage pkg = make_package(
      2, 0, reported_pose_b.value_or(pose_b), FullFrame{}, scan_b);
  const FusedCloud fused = fuse(scan_a, pose_a, pkg, cfg.dedup_leaf);

  const auto boxes_a = detect(scan_a, cfg.detector);
  const auto boxes_b = detect(scan_b, cfg.detector);
  const auto boxes_fused = detect(fused.cloud, cfg.detector);

  const auto truth_a = truth_boxes_in_sensor_frame(scene, pose_a);
  const auto truth_b = truth_boxes_in_sensor_frame(scene, pose_b);

  const auto match_a = match_detections(boxes_a, truth_a, cfg.iou_threshold);
  const auto match_b = match_detections(boxes_b, truth_b, cfg.iou_threshold);
  const auto match_f = match_detections(boxes_fused, truth_a, cfg.iou_threshold);

  // Truth index -> car id, in scene order.
  std::vector<int> car_ids;
  for (const SceneBox& box : scene.objects)
    if (box.label == "car") car_ids.push_back(box.id);

  ExperimentReport report;
  report.detections_a = boxes_a.size();
  report.detections_b = boxes_b.size();
  report.detections_fused = boxes_fused.size();
  report.objects.resize(car_ids.size());
  for (std::size_t t = 0; t < car_ids.size(); ++t) {
    ObjectRecord& rec = report.objects[t];
    rec.truth_id = car_ids[t];
    rec.band = truth_a[t].band;
  }
  for (const Match& m : match_a) {
    report.objects[m.truth_index].detected_a = true;
    report.objects[m.truth_index].score_a = boxes_a[m.detection_index].score;
  }
  for (const Match& m : match_b) {
    report.objects[m.truth_index].detected_b = true;
    report.objects[m.truth_index].score_b = boxes_b[m.detection_index].score;
  }
  for (const Match& m : match_f) {
    report.objects[m.truth_index].detected_fused = true;
    report.objects[m.truth_index].score_fused =
        boxes_fused[m.detection_index].score;
  }
  for (ObjectRecord& rec : report.objects)
    rec.difficulty = classify_difficulty(rec.detected_a, rec.detected_b);
  return report;
}

struct CdfPoint {
  double improvement;
  double cumulative_probability;
};

/// Empirical CDF of score improvement per difficulty class.
inline std::map<Difficulty, std::vector<CdfPoint>> improvement_cdf(
    const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) throw InvalidParameterError("no reports");
  std::map<Difficulty, std::vector<double>> samples;
  for (const auto& report : reports)
    for (const auto& rec : report.objects)
      samples[rec.difficulty].push_back(rec.improvement());

  std::map<Difficulty, std::vector<CdfPoint>> out;
  for (auto& [difficulty, values] : samples) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> cdf;
    cdf.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      cdf.push_back({values[i],
                     static_cast<double>(i + 1) / values.size()});
    out[difficulty] = std::move(cdf);
  }
  return out;
}

inline std::string improvement_cdf_csv(
    const std::map<Difficulty, std::vector<CdfPoint>>& cdf) {
  std::ostringstream out;
  out << "difficulty,improvement,cumulative_probability\n";
  for (const auto& [difficulty, points] : cdf)
    for (const CdfPoint& p : points)
      out << to_string(difficulty) << ',' << p.improvement << ','
          << p.cumulative_probability << '\n';
  return out.str();
}

inline double median_improvement(const std::vector<ExperimentReport>& reports,
                                 Difficulty difficulty) {
  std::vector<double> values;
  for (const auto& report : reports)
    for (const auto& rec : report.objects)
      if (rec.difficulty == difficulty) values.push_back(rec.improvement());
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

struct DriftCase {
  std::string label;
  double dx = 0.0;
  double dy = 0.0;
  ExperimentReport report;
  std::set<int> matched_truth_ids;  // in the fused condition
  bool matches_baseline = false;
};

struct DriftReport {
  double max_drift = 0.1;
  DriftCase baseline;
  std::vector<DriftCase> cases;
};

inline VehiclePose offset_gps(const VehiclePose& pose, double dx_east,
                              double dy_north) {
  constexpr double deg = std::numbers::pi / 180.0;
  VehiclePose out = pose;
  const double radius = kWgs84EquatorialRadius + pose.gps.altitude_m;
  out.gps = GeodeticCoord(
      pose.gps.latitude_deg + dy_north / radius / deg,
      pose.gps.longitude_deg +
          dx_east / (radius * std::cos(pose.gps.latitude_deg * deg)) / deg,
      pose.gps.altitude_m);
  return out;
}

/// GPS-robustness protocol: rerun the experiment with the transmitter GPS
/// skewed to the +/-max corner on both axes, each single axis, and double
/// the maximum on both axes.
inline DriftReport gps_drift_suite(const Scene& scene,
                                   const VehiclePose& pose_a,
                                   const VehiclePose& pose_b,
                                   double max_drift = 0.10,
                                   const HarnessConfig& cfg = {}) {
  if (!(max_drift > 0)) throw InvalidParameterError("max_drift must be > 0");

  auto run_case = [&](const std::string& label, double dx,
                      double dy) -> DriftCase {
    DriftCase c;
    c.label = label;
    c.dx = dx;
    c.dy = dy;
    c.report = run_two_vehicle_experiment(scene, pose_a, pose_b, cfg,
                                     offset_gps(pose_b, dx, dy));
    for (const auto& rec : c.report.objects)
      if (rec.detected_fused) c.matched_truth_ids.insert(rec.truth_id);
    return c;
  };

  DriftReport report;
  report.max_drift = max_drift;
  report.baseline = run_case("baseline", 0.0, 0.0);
  report.baseline.matches_baseline = true;

  const double m = max_drift;
  const std::vector<std::tuple<std::string, double, double>> cases = {
      {"both_axes_max_pp", m, m},    {"both_axes_max_pm", m, -m},
      {"both_axes_max_mp", -m, m},   {"both_axes_max_mm", -m, -m},
      {"x_only_p", m, 0.0},          {"x_only_m", -m, 0.0},
      {"y_only_p", 0.0, m},          {"y_only_m", 0.0, -m},
      {"double_max_pp", 2 * m, 2 * m}, {"double_max_pm", 2 * m, -2 * m},
      {"double_max_mp", -2 * m, 2 * m}, {"double_max_mm", -2 * m, -2 * m},
  };
  for (const auto& [label, dx, dy] : cases) {
    DriftCase c = run_case(label, dx, dy);
    c.matches_baseline =
        c.matched_truth_ids == report.baseline.matched_truth_ids;
    report.cases.push_back(std::move(c));
  }
  return report;
}

inline std::string drift_report_csv(const DriftReport& report) {
  std::ostringstream out;
  out << "case,dx,dy,fused_matched,matches_baseline\n";
  auto row = [&out](const DriftCase& c) {
    out << c.label << ',' << c.dx << ',' << c.dy << ','
        << c.matched_truth_ids.size() << ','
        << (c.matches_baseline ? "true" : "false") << '\n';
  };
  row(report.baseline);
  for (const auto& c : report.cases) row(c);
  return out.str();
}

struct TimingResult {
  double single_ms = 0.0;
  double fused_ms = 0.0;
};

/// Median wall-clock detector cost on a single-shot cloud versus a fused
/// one. Single-threaded by construction.
inline TimingResult timing_benchmark(const PointCloud& single,
                                     const PointCloud& fused,
                                     const DetectorParams& params,
                                     int repetitions = 30) {
  if (repetitions < 10)
    throw InvalidParameterError("need at least 10 repetitions");
  auto median_of = [&](const PointCloud& cloud) {
    std::vector<double> times;
    times.reserve(repetitions);
    for (int i = 0; i < repetitions; ++i) {
      const auto start = std::chrono::steady_clock::now();
      volatile std::size_t sink = detect(cloud, params).size();
      (void)sink;
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  };
  return {median_of(single), median_of(fused)};
}

}  // namespace coopfuse

#endif  // COOPFUSE_HARNESS_HPP
