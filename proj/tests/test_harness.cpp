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

#include <catch2/catch_amalgamated.hpp>

#include "coopfuse/harness.hpp"

using namespace coopfuse;

namespace {

const ObjectRecord* record_for(const ExperimentReport& report, int truth_id) {
  for (const auto& rec : report.objects)
    if (rec.truth_id == truth_id) return &rec;
  return nullptr;
}

}  // namespace

TEST_CASE("occluded target is recovered in the fused cloud") {
  const OcclusionScenario sc =
      make_occlusion_scenario(1, OcclusionVariant::Single);
  const ExperimentReport report =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b);
  const ObjectRecord* hidden = record_for(report, sc.hidden_object_id);
  REQUIRE(hidden != nullptr);
  CHECK_FALSE(hidden->detected_a);
  CHECK(hidden->detected_b);
  CHECK(hidden->detected_fused);
  CHECK(hidden->difficulty == Difficulty::Moderate);
  // The fused score can dip slightly below B's own: the receiver frame
  // puts the target at a different range, which rescales the expected
  // density. Only a solid fused detection is required here.
  CHECK(hidden->score_fused > 0.5);
}

TEST_CASE("unobstructed target is easy and fusion does not lose it") {
  const OcclusionScenario sc =
      make_occlusion_scenario(2, OcclusionVariant::None);
  const ExperimentReport report =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b);
  const ObjectRecord* target = record_for(report, sc.hidden_object_id);
  REQUIRE(target != nullptr);
  CHECK(target->detected_a);
  CHECK(target->detected_b);
  CHECK(target->detected_fused);
  CHECK(target->difficulty == Difficulty::Easy);
  CHECK(report.detections_fused >= report.detections_a);
  CHECK(report.detections_fused >= report.detections_b);
}

TEST_CASE("distant target is hard and only the fused cloud clears it") {
  const OcclusionScenario sc =
      make_occlusion_scenario(3, OcclusionVariant::Both);
  const ExperimentReport report =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b);
  const ObjectRecord* target = record_for(report, sc.hidden_object_id);
  REQUIRE(target != nullptr);
  CHECK_FALSE(target->detected_a);
  CHECK_FALSE(target->detected_b);
  CHECK(target->detected_fused);
  CHECK(target->difficulty == Difficulty::Hard);
  // Both singles miss, so the improvement is the fused score itself.
  CHECK(target->improvement() == target->score_fused);
  CHECK(target->improvement() > 0.0);
}

TEST_CASE("improvement_cdf is a monotone step function ending at 1") {
  std::vector<ExperimentReport> reports;
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const OcclusionScenario sc = make_occlusion_scenario(seed);
    reports.push_back(run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b));
  }
  const auto cdf = improvement_cdf(reports);
  REQUIRE(!cdf.empty());
  for (const auto& [difficulty, points] : cdf) {
    REQUIRE(!points.empty());
    for (std::size_t i = 1; i < points.size(); ++i) {
      CHECK(points[i].improvement >= points[i - 1].improvement);
      CHECK(points[i].cumulative_probability >
            points[i - 1].cumulative_probability);
    }
    CHECK(points.back().cumulative_probability == Catch::Approx(1.0));
  }
  CHECK_THROWS_AS(improvement_cdf({}), InvalidParameterError);
}

TEST_CASE("improvement_cdf of a hand-built report") {
  ExperimentReport report;
  ObjectRecord rec;
  rec.detected_a = rec.detected_b = rec.detected_fused = true;
  rec.score_a = 0.4;
  rec.score_b = 0.6;
  rec.score_fused = 0.9;
  rec.difficulty = Difficulty::Easy;
  report.objects = {rec};
  const auto cdf = improvement_cdf({report});
  REQUIRE(cdf.count(Difficulty::Easy) == 1);
  REQUIRE(cdf.at(Difficulty::Easy).size() == 1);
  CHECK(cdf.at(Difficulty::Easy)[0].improvement ==
        Catch::Approx(0.3));  // 0.9 - max(0.4, 0.6)
  CHECK(cdf.at(Difficulty::Easy)[0].cumulative_probability == 1.0);
}

TEST_CASE("median_improvement on known samples") {
  auto make_report = [](double improvement, Difficulty d) {
    ExperimentReport r;
    ObjectRecord rec;
    rec.detected_fused = true;
    rec.score_fused = improvement;
    rec.difficulty = d;
    r.objects = {rec};
    return r;
  };
  const std::vector<ExperimentReport> reports = {
      make_report(0.1, Difficulty::Hard), make_report(0.5, Difficulty::Hard),
      make_report(0.9, Difficulty::Hard), make_report(0.2, Difficulty::Easy)};
  CHECK(median_improvement(reports, Difficulty::Hard) == Catch::Approx(0.5));
  CHECK(median_improvement(reports, Difficulty::Easy) == Catch::Approx(0.2));
  CHECK(median_improvement(reports, Difficulty::Moderate) == 0.0);
}

TEST_CASE("zero drift is exactly the baseline") {
  const OcclusionScenario sc = make_occlusion_scenario(4);
  const VehiclePose no_offset = offset_gps(sc.pose_b, 0.0, 0.0);
  CHECK(no_offset.gps == sc.pose_b.gps);

  const ExperimentReport base =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b);
  const ExperimentReport same =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b, {}, no_offset);
  REQUIRE(base.objects.size() == same.objects.size());
  for (std::size_t i = 0; i < base.objects.size(); ++i) {
    CHECK(base.objects[i].detected_fused == same.objects[i].detected_fused);
    CHECK(base.objects[i].score_fused == same.objects[i].score_fused);
  }
}

TEST_CASE("offset_gps moves the reported position by the requested meters") {
  const VehiclePose pose = make_vehicle_pose(5.0, 7.0, 0.3);
  const VehiclePose moved = offset_gps(pose, 0.1, -0.2);
  const Vec3 delta = geodetic_to_enu(pose.gps, moved.gps);
  CHECK(delta.x() == Catch::Approx(0.1).margin(1e-6));
  CHECK(delta.y() == Catch::Approx(-0.2).margin(1e-6));
  CHECK(delta.z() == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("gps drift suite structure and in-bound stability") {
  const OcclusionScenario sc = make_occlusion_scenario(5);
  const DriftReport report =
      gps_drift_suite(sc.scene, sc.pose_a, sc.pose_b, 0.10);
  CHECK(report.baseline.matches_baseline);
  CHECK(!report.baseline.matched_truth_ids.empty());
  REQUIRE(report.cases.size() == 12);

  for (const auto& c : report.cases) {
    const double drift = std::max(std::abs(c.dx), std::abs(c.dy));
    if (drift <= report.max_drift + 1e-12) {
      INFO("case " << c.label);
      CHECK(c.matches_baseline);
    }
  }
  // The doubled-drift family is reported but carries no assertion.
  std::size_t doubled = 0;
  for (const auto& c : report.cases)
    if (std::max(std::abs(c.dx), std::abs(c.dy)) > report.max_drift + 1e-12)
      ++doubled;
  CHECK(doubled == 4);

  CHECK_THROWS_AS(gps_drift_suite(sc.scene, sc.pose_a, sc.pose_b, 0.0),
                  InvalidParameterError);
}

TEST_CASE("drift report CSV shape") {
  const OcclusionScenario sc = make_occlusion_scenario(6);
  const DriftReport report =
      gps_drift_suite(sc.scene, sc.pose_a, sc.pose_b, 0.10);
  const std::string csv = drift_report_csv(report);
  CHECK(csv.find("case,dx,dy,fused_matched,matches_baseline") == 0);
  // Header + baseline + 12 cases.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
  CHECK(csv.find("baseline,0,0") != std::string::npos);
  CHECK(csv.find("double_max_pp,0.2,0.2") != std::string::npos);
}

TEST_CASE("timing_benchmark rejects too few repetitions") {
  CHECK_THROWS_AS(
      timing_benchmark(PointCloud{}, PointCloud{}, DetectorParams{}, 5),
      InvalidParameterError);
}

TEST_CASE("difficulty classes partition the objects") {
  const OcclusionScenario sc = make_occlusion_scenario(7);
  const ExperimentReport report =
      run_two_vehicle_experiment(sc.scene, sc.pose_a, sc.pose_b);
  for (const auto& rec : report.objects) {
    CHECK(rec.difficulty ==
          classify_difficulty(rec.detected_a, rec.detected_b));
    if (!rec.detected_a) CHECK(rec.score_a == 0.0);
    if (!rec.detected_b) CHECK(rec.score_b == 0.0);
    if (!rec.detected_fused) CHECK(rec.score_fused == 0.0);
  }
}
