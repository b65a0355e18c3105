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

#include <cmath>
#include <random>

#include "coopfuse/geometry.hpp"

using namespace coopfuse;

namespace {

// Independent 3x3 oracle on plain arrays: builds the axis rotations and the
// triple product without touching Eigen or the implementation path.
using M3 = std::array<std::array<double, 3>, 3>;

M3 oracle_mul(const M3& a, const M3& b) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

M3 oracle_rz(double a) {
  return {{{std::cos(a), -std::sin(a), 0}, {std::sin(a), std::cos(a), 0}, {0, 0, 1}}};
}
M3 oracle_ry(double b) {
  return {{{std::cos(b), 0, std::sin(b)}, {0, 1, 0}, {-std::sin(b), 0, std::cos(b)}}};
}
M3 oracle_rx(double g) {
  return {{{1, 0, 0}, {0, std::cos(g), -std::sin(g)}, {0, std::sin(g), std::cos(g)}}};
}

M3 oracle_rotation(double yaw, double pitch, double roll) {
  return oracle_mul(oracle_rz(yaw), oracle_mul(oracle_ry(pitch), oracle_rx(roll)));
}

double max_abs_diff(const Mat3& m, const M3& o) {
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(m(i, j) - o[i][j]));
  return worst;
}

}  // namespace

TEST_CASE("euler angles normalize and reject non-finite") {
  const EulerAngles a(3 * std::numbers::pi, 0, 0);
  CHECK(a.yaw == Catch::Approx(std::numbers::pi));
  const EulerAngles b(-std::numbers::pi, 0, 0);  // wraps to +pi
  CHECK(b.yaw == Catch::Approx(std::numbers::pi));
  CHECK_THROWS_AS(EulerAngles(std::nan(""), 0, 0), InvalidAngleError);
  CHECK_THROWS_AS(EulerAngles(0, std::numeric_limits<double>::infinity(), 0),
                  InvalidAngleError);
}

TEST_CASE("rotation_matrix identity and quarter turn") {
  CHECK(rotation_matrix(EulerAngles(0, 0, 0)).isApprox(Mat3::Identity(), 1e-15));

  const Mat3 r = rotation_matrix(EulerAngles(std::numbers::pi / 2, 0, 0));
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rotation_matrix matches the explicit triple-product oracle") {
  const Mat3 r = rotation_matrix(EulerAngles(0.3, -0.2, 0.7));
  CHECK(max_abs_diff(r, oracle_rotation(0.3, -0.2, 0.7)) < 1e-12);
}

TEST_CASE("rotation_matrix orthonormality over random triples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const double yaw = angle(rng), pitch = angle(rng), roll = angle(rng);
    const Mat3 r = rotation_matrix(EulerAngles(yaw, pitch, roll));
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    CHECK(max_abs_diff(r, oracle_rotation(yaw, pitch, roll)) < 1e-12);
  }
}

TEST_CASE("inverse factor order composes to identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const double yaw = angle(rng), pitch = angle(rng), roll = angle(rng);
    const Mat3 r = rotation_matrix(EulerAngles(yaw, pitch, roll));
    // Rx(-roll) Ry(-pitch) Rz(-yaw), built by the oracle.
    const M3 inv = oracle_mul(
        oracle_rx(-roll), oracle_mul(oracle_ry(-pitch), oracle_rz(-yaw)));
    Mat3 inv_m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) inv_m(a, b) = inv[a][b];
    CHECK(((r * inv_m) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("transform_point basics") {
  CHECK(transform_point(Mat3::Identity(), Vec3::Zero(), Vec3(4, 5, 6))
            .isApprox(Vec3(4, 5, 6)));
  CHECK(transform_point(Mat3::Identity(), Vec3(1, 2, 3), Vec3::Zero())
            .isApprox(Vec3(1, 2, 3)));
  const Mat3 r = rotation_matrix(EulerAngles(std::numbers::pi / 2, 0, 0));
  CHECK(transform_point(r, Vec3(10, 0, 0), Vec3(1, 0, 0))
            .isApprox(Vec3(10, 1, 0), 1e-12));
}

TEST_CASE("transform_point is invertible") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> coord(-100, 100);
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = rotation_matrix(EulerAngles(angle(rng), angle(rng), angle(rng)));
    const Vec3 d(coord(rng), coord(rng), coord(rng));
    const Vec3 p(coord(rng), coord(rng), coord(rng));
    const Vec3 mapped = transform_point(r, d, p);
    const Vec3 back = transform_point(r.transpose(), -(r.transpose() * d), mapped);
    CHECK((back - p).norm() < 1e-9);
  }
}

TEST_CASE("geodetic_to_enu") {
  const GeodeticCoord origin(0.0, 0.0, 0.0);
  CHECK(geodetic_to_enu(origin, origin).isApprox(Vec3::Zero()));

  // 1e-5 degrees of latitude at the equator, WGS-84 arc.
  const GeodeticCoord north(1e-5, 0.0, 0.0);
  const Vec3 enu = geodetic_to_enu(origin, north);
  CHECK(enu.x() == Catch::Approx(0.0).margin(1e-9));
  CHECK(enu.y() == Catch::Approx(1.1132).margin(0.001));

  const GeodeticCoord up(0.0, 0.0, 10.0);
  CHECK(geodetic_to_enu(origin, up).isApprox(Vec3(0, 0, 10)));

  CHECK_THROWS_AS(GeodeticCoord(91.0, 0, 0), InvalidCoordinateError);
  CHECK_THROWS_AS(GeodeticCoord(0, 181.0, 0), InvalidCoordinateError);
}

TEST_CASE("relative_pose of identical poses is the identity") {
  VehiclePose pose;
  pose.gps = GeodeticCoord(40.0, -83.0, 210.0);
  pose.imu = EulerAngles(0.4, 0.02, -0.01);
  pose.install_translation = Vec3(1.2, 0.0, 1.9);
  pose.install_rotation = EulerAngles(0.01, 0.0, 0.0);
  const RelativeTransform rel = relative_pose(pose, pose);
  CHECK((rel.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rel.translation.norm() < 1e-9);
}

TEST_CASE("relative_pose axis-aligned offset") {
  VehiclePose receiver;
  receiver.gps = GeodeticCoord(0.0, 0.0, 0.0);
  receiver.imu = EulerAngles(0, 0, 0);
  VehiclePose transmitter = receiver;
  // 10 m east at the equator.
  constexpr double deg = std::numbers::pi / 180.0;
  transmitter.gps =
      GeodeticCoord(0.0, 10.0 / kWgs84EquatorialRadius / deg, 0.0);
  const RelativeTransform rel = relative_pose(receiver, transmitter);
  CHECK((rel.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rel.translation - Vec3(10, 0, 0)).norm() < 1e-6);
}

TEST_CASE("relative_pose with opposing headings") {
  VehiclePose receiver;
  receiver.gps = GeodeticCoord(0.0, 0.0, 0.0);
  VehiclePose transmitter = receiver;
  constexpr double deg = std::numbers::pi / 180.0;
  transmitter.gps =
      GeodeticCoord(0.0, 20.0 / kWgs84EquatorialRadius / deg, 0.0);
  transmitter.imu = EulerAngles(std::numbers::pi, 0, 0);

  const RelativeTransform rel = relative_pose(receiver, transmitter);
  const Mat3 expected = rotation_matrix(EulerAngles(std::numbers::pi, 0, 0));
  CHECK((rel.rotation - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rel.translation - Vec3(20, 0, 0)).norm() < 1e-6);
  // A point one meter ahead of the transmitter lands one meter short of it
  // in the receiver frame.
  const Vec3 mapped = transform_point(rel.rotation, rel.translation, Vec3(1, 0, 0));
  CHECK((mapped - Vec3(19, 0, 0)).norm() < 1e-6);
}
