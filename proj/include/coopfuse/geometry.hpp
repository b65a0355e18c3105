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

#ifndef COOPFUSE_GEOMETRY_HPP
#define COOPFUSE_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopfuse {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct InvalidAngleError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidCoordinateError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

/// Yaw/pitch/roll attitude in radians, each normalized to (-pi, pi].
struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  EulerAngles() = default;
  EulerAngles(double yaw_, double pitch_, double roll_) {
    if (!std::isfinite(yaw_) || !std::isfinite(pitch_) || !std::isfinite(roll_))
      throw InvalidAngleError("euler angles must be finite");
    yaw = normalize_angle(yaw_);
    pitch = normalize_angle(pitch_);
    roll = normalize_angle(roll_);
  }

  bool operator==(const EulerAngles&) const = default;
};

/// Geographic position in degrees (lat/lon) and meters (altitude).
struct GeodeticCoord {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;

  GeodeticCoord() = default;
  GeodeticCoord(double lat, double lon, double alt)
      : latitude_deg(lat), longitude_deg(lon), altitude_m(alt) {
    if (!std::isfinite(lat) || !std::isfinite(lon) || !std::isfinite(alt))
      throw InvalidCoordinateError("geodetic coordinate must be finite");
    if (std::abs(lat) > 90.0) throw InvalidCoordinateError("|latitude| > 90");
    if (std::abs(lon) > 180.0) throw InvalidCoordinateError("|longitude| > 180");
  }

  bool operator==(const GeodeticCoord&) const = default;
};

inline Mat3 rotation_about_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0.0,
       std::sin(a),  std::cos(a), 0.0,
               0.0,          0.0, 1.0;
  return r;
}

inline Mat3 rotation_about_y(double b) {
  Mat3 r;
  r <<  std::cos(b), 0.0, std::sin(b),
                0.0, 1.0,         0.0,
       -std::sin(b), 0.0, std::cos(b);
  return r;
}

inline Mat3 rotation_about_x(double g) {
  Mat3 r;
  r << 1.0,         0.0,          0.0,
       0.0, std::cos(g), -std::sin(g),
       0.0, std::sin(g),  std::cos(g);
  return r;
}

/// Attitude rotation as the product Rz(yaw) * Ry(pitch) * Rx(roll),
/// applied to column vectors in the world frame.
inline Mat3 rotation_matrix(const EulerAngles& angles) {
  return rotation_about_z(angles.yaw) * rotation_about_y(angles.pitch) *
         rotation_about_x(angles.roll);
}

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  const Mat3 gram = r.transpose() * r - Mat3::Identity();
  return gram.cwiseAbs().maxCoeff() < tol &&
         std::abs(r.determinant() - 1.0) < tol;
}

/// R * p + d
inline Vec3 transform_point(const Mat3& rotation, const Vec3& translation,
                            const Vec3& p) {
  return rotation * p + translation;
}

inline constexpr double kWgs84EquatorialRadius = 6378137.0;

/// East-North-Up offset of `point` on the local tangent plane at `origin`.
/// Small-angle spherical projection; adequate below ~1 km separation.
inline Vec3 geodetic_to_enu(const GeodeticCoord& origin,
                            const GeodeticCoord& point) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double radius = kWgs84EquatorialRadius + origin.altitude_m;
  const double east = (point.longitude_deg - origin.longitude_deg) * deg *
                      radius * std::cos(origin.latitude_deg * deg);
  const double north = (point.latitude_deg - origin.latitude_deg) * deg * radius;
  const double up = point.altitude_m - origin.altitude_m;
  return {east, north, up};
}

/// GPS fix, IMU attitude, and the LiDAR mounting extrinsic of one vehicle.
/// Yaw is measured counterclockwise from East in the ENU tangent plane.
struct VehiclePose {
  GeodeticCoord gps;
  EulerAngles imu;
  Vec3 install_translation = Vec3::Zero();
  EulerAngles install_rotation;
};

struct RelativeTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Transform taking points in the transmitter's LiDAR frame to the
/// receiver's LiDAR frame. Folds in the IMU attitude difference, the GPS
/// offset, and both vehicles' installation extrinsics.
inline RelativeTransform relative_pose(const VehiclePose& receiver,
                                       const VehiclePose& transmitter) {
  const Mat3 r_recv_body = rotation_matrix(receiver.imu);
  const Mat3 r_trans_body = rotation_matrix(transmitter.imu);
  const Mat3 r_recv_install = rotation_matrix(receiver.install_rotation);
  const Mat3 r_trans_install = rotation_matrix(transmitter.install_rotation);

  const Vec3 enu_offset = geodetic_to_enu(receiver.gps, transmitter.gps);

  RelativeTransform out;
  out.rotation = r_recv_install.transpose() * r_recv_body.transpose() *
                 r_trans_body * r_trans_install;
  // Transmitter LiDAR center expressed in the receiver LiDAR frame.
  const Vec3 trans_lidar_enu =
      enu_offset + r_trans_body * transmitter.install_translation;
  out.translation =
      r_recv_install.transpose() *
      (r_recv_body.transpose() * trans_lidar_enu - receiver.install_translation);
  return out;
}

}  // namespace coopfuse

#endif  // COOPFUSE_GEOMETRY_HPP
