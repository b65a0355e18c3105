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

#include <random>

#include "coopfuse/fusion.hpp"
#include "coopfuse/scenesim.hpp"

using namespace coopfuse;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> c(-40.f, 40.f);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.push_back(Point{c(rng), c(rng), c(rng) / 10.f, 0.5f});
  return cloud;
}

Scene simple_world() {
  Scene scene;
  scene.has_ground = true;
  SceneBox car;
  car.id = 1;
  car.center = Vec3(12.0, 3.0, 0.75);
  car.size = Vec3(4.5, 1.8, 1.5);
  car.yaw = 0.4;
  scene.objects.push_back(car);
  SceneBox wall;
  wall.id = 2;
  wall.label = "wall";
  wall.center = Vec3(-8.0, -10.0, 1.5);
  wall.size = Vec3(12.0, 0.4, 3.0);
  wall.yaw = -0.3;
  scene.objects.push_back(wall);
  return scene;
}

}  // namespace

TEST_CASE("apply_install_extrinsic") {
  PointCloud cloud;
  cloud.points = {Point{1.f, 0.f, 0.f, 0.2f}};

  VehiclePose zero;
  CHECK(apply_install_extrinsic(cloud, zero).points == cloud.points);

  VehiclePose lifted;
  lifted.install_translation = Vec3(0, 0, 2);
  CHECK(apply_install_extrinsic(cloud, lifted).points[0].z ==
        Catch::Approx(2.f));

  VehiclePose turned;
  turned.install_rotation = EulerAngles(std::numbers::pi / 2, 0, 0);
  turned.install_translation = Vec3(1, 0, 0);
  const Point p = apply_install_extrinsic(cloud, turned).points[0];
  CHECK(p.x == Catch::Approx(1.f).margin(1e-6));
  CHECK(p.y == Catch::Approx(1.f).margin(1e-6));
}

TEST_CASE("fuse with identical poses concatenates") {
  const PointCloud a = random_cloud(300, 1);
  const PointCloud b = random_cloud(200, 2);
  VehiclePose pose;  // both at the origin
  const ExchangePackage pkg = make_package(2, 0, pose, FullFrame{}, b);
  const FusedCloud fused = fuse(a, pose, pkg);
  CHECK(fused.cloud.size() == a.size() + b.size());
  CHECK(fused.receiver_count == a.size());
  CHECK(fused.transmitter_count == b.size());
  CHECK((fused.transform_used.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(fused.transform_used.translation.norm() < 1e-9);
}

TEST_CASE("fuse pure translation places transmitter origin ahead") {
  PointCloud a;  // empty receiver
  PointCloud b;
  b.points = {Point{0.f, 0.f, 0.f, 0.f}};
  const VehiclePose receiver = make_vehicle_pose(0, 0, 0, 0.0);
  const VehiclePose transmitter = make_vehicle_pose(10, 0, 0, 0.0);
  const ExchangePackage pkg = make_package(2, 0, transmitter, FullFrame{}, b);
  const FusedCloud fused = fuse(a, receiver, pkg);
  REQUIRE(fused.cloud.size() == 1);
  CHECK(fused.cloud.points[0].x == Catch::Approx(10.f).margin(0.006));
  CHECK(fused.cloud.points[0].y == Catch::Approx(0.f).margin(0.006));
}

TEST_CASE("fuse opposing transmitter maps points toward the receiver") {
  PointCloud b;
  b.points = {Point{1.f, 0.f, 0.f, 0.f}};
  const VehiclePose receiver = make_vehicle_pose(0, 0, 0, 0.0);
  const VehiclePose transmitter =
      make_vehicle_pose(20, 0, std::numbers::pi, 0.0);
  const ExchangePackage pkg = make_package(2, 0, transmitter, FullFrame{}, b);
  const FusedCloud fused = fuse(PointCloud{}, receiver, pkg);
  REQUIRE(fused.cloud.size() == 1);
  CHECK(fused.cloud.points[0].x == Catch::Approx(19.f).margin(0.006));
  CHECK(std::abs(fused.cloud.points[0].y) < 0.006f);
}

TEST_CASE("fuse cardinality with dedup off over random pose pairs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> offset(-50, 50), yaw(-3.1, 3.1);
  for (int i = 0; i < 20; ++i) {
    const PointCloud a = random_cloud(100 + i, 100 + i);
    const PointCloud b = random_cloud(150 + i, 200 + i);
    const VehiclePose pa = make_vehicle_pose(offset(rng), offset(rng), yaw(rng));
    const VehiclePose pb = make_vehicle_pose(offset(rng), offset(rng), yaw(rng));
    const ExchangePackage pkg = make_package(2, 0, pb, FullFrame{}, b);
    CHECK(fuse(a, pa, pkg).cloud.size() == a.size() + b.size());
  }
}

TEST_CASE("self fusion deduplicates back to the original count") {
  // Codec bypassed: build the package payload from exact points so
  // quantization cannot split voxels.
  PointCloud a = random_cloud(400, 5);
  for (Point& p : a.points) {  // snap to the centimeter grid
    p.x = std::round(p.x * 100.f) / 100.f;
    p.y = std::round(p.y * 100.f) / 100.f;
    p.z = std::round(p.z * 100.f) / 100.f;
  }
  VehiclePose pose;
  const ExchangePackage pkg = make_package(2, 0, pose, FullFrame{}, a);
  const FusedCloud fused = fuse(a, pose, pkg, 0.01);
  const PointCloud direct = voxel_downsample(a, 0.01);
  CHECK(fused.cloud.size() == direct.size());
}

TEST_CASE("fused scene geometry matches the ray-cast world") {
  const Scene scene = simple_world();
  const VehiclePose pose_a = make_vehicle_pose(0, 0, 0.1);
  const VehiclePose pose_b = make_vehicle_pose(5, 14, -0.6);

  SensorModel sensor = SensorModel::for_beam_count(16);
  sensor.max_range = 60.0;
  sensor.pose = pose_a;
  const PointCloud scan_a = simulate_scan(scene, sensor);
  sensor.pose = pose_b;
  const PointCloud scan_b = simulate_scan(scene, sensor);
  REQUIRE(scan_a.size() > 1000);
  REQUIRE(scan_b.size() > 1000);

  const ExchangePackage pkg = make_package(2, 0, pose_b, FullFrame{}, scan_b);
  const FusedCloud fused = fuse(scan_a, pose_a, pkg);
  CHECK(fused.cloud.size() == scan_a.size() + scan_b.size());

  const WorldTransform world = sensor_to_world(pose_a);
  double worst = 0.0;
  for (const Point& p : fused.cloud.points) {
    const Vec3 w = world.rotation * p.position() + world.translation;
    worst = std::max(worst, distance_to_surface(scene, w));
  }
  // Per-axis quantization is 0.005 m; on a face rotated by yaw 0.4 the
  // component normal to the face reaches 0.005 * (cos 0.4 + sin 0.4).
  CHECK(worst < 0.005 * (std::cos(0.4) + std::sin(0.4)) + 0.0005);
}

TEST_CASE("world geometry symmetry between fusion directions") {
  const Scene scene = simple_world();
  const VehiclePose pose_a = make_vehicle_pose(0, 0, 0.0);
  const VehiclePose pose_b = make_vehicle_pose(-6, 10, 1.2);

  SensorModel sensor = SensorModel::for_beam_count(16);
  sensor.pose = pose_a;
  const PointCloud scan_a = simulate_scan(scene, sensor);
  sensor.pose = pose_b;
  const PointCloud scan_b = simulate_scan(scene, sensor);

  const FusedCloud ab =
      fuse(scan_a, pose_a, make_package(2, 0, pose_b, FullFrame{}, scan_b));
  const FusedCloud ba =
      fuse(scan_b, pose_b, make_package(1, 0, pose_a, FullFrame{}, scan_a));

  // Both fused sets, mapped to the world frame, lie on the same true
  // surfaces within twice the quantization error.
  const WorldTransform wa = sensor_to_world(pose_a);
  const WorldTransform wb = sensor_to_world(pose_b);
  for (const Point& p : ab.cloud.points) {
    const Vec3 w = wa.rotation * p.position() + wa.translation;
    CHECK(distance_to_surface(scene, w) < 0.010);
  }
  for (const Point& p : ba.cloud.points) {
    const Vec3 w = wb.rotation * p.position() + wb.translation;
    CHECK(distance_to_surface(scene, w) < 0.010);
  }
}

TEST_CASE("two-vehicle emulation from a sequence") {
  const PointCloud frame = random_cloud(250, 12);
  const VehiclePose pose = make_vehicle_pose(0, 0, 0);

  // Identical frames and poses double the count before dedup.
  const auto emu = emulate_two_vehicle_from_sequence(frame, pose, frame, pose);
  const FusedCloud fused = fuse(emu.receiver_cloud, emu.receiver_pose, emu.package);
  CHECK(fused.cloud.size() == 2 * frame.size());
}

TEST_CASE("sequence emulation maps static points onto their later-frame positions") {
  // Rigid synthetic scene scanned from two positions of one vehicle.
  const Scene scene = simple_world();
  const VehiclePose pose_t1 = make_vehicle_pose(0, 0, 0);
  const VehiclePose pose_t2 = make_vehicle_pose(5, 0, 0);  // 5 m forward

  SensorModel sensor = SensorModel::for_beam_count(16);
  sensor.pose = pose_t1;
  const PointCloud frame_t1 = simulate_scan(scene, sensor);
  sensor.pose = pose_t2;
  const PointCloud frame_t2 = simulate_scan(scene, sensor);

  const auto emu =
      emulate_two_vehicle_from_sequence(frame_t1, pose_t1, frame_t2, pose_t2);
  const FusedCloud fused = fuse(emu.receiver_cloud, emu.receiver_pose, emu.package);

  const WorldTransform world = sensor_to_world(pose_t2);
  for (const Point& p : fused.cloud.points) {
    const Vec3 w = world.rotation * p.position() + world.translation;
    CHECK(distance_to_surface(scene, w) < 0.1);
  }
}

TEST_CASE("small yaw drift displaces points by at most range times angle") {
  PointCloud b;
  b.points = {Point{30.f, 0.f, 0.f, 0.f}, Point{0.f, 15.f, 0.f, 0.f}};
  const VehiclePose receiver = make_vehicle_pose(0, 0, 0, 0.0);
  const VehiclePose truth = make_vehicle_pose(0, 0, 0, 0.0);
  VehiclePose drifted = truth;
  drifted.imu = EulerAngles(0.01, 0, 0);

  const FusedCloud base =
      fuse(PointCloud{}, receiver, make_package(2, 0, truth, FullFrame{}, b));
  const FusedCloud skew =
      fuse(PointCloud{}, receiver, make_package(2, 0, drifted, FullFrame{}, b));
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const double range = b.points[i].range();
    const double moved =
        (base.cloud.points[i].position() - skew.cloud.points[i].position())
            .norm();
    CHECK(moved <= range * 0.01 + 0.011);  // quantization on both sides
  }
}
