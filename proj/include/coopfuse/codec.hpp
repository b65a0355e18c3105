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

#ifndef COOPFUSE_CODEC_HPP
#define COOPFUSE_CODEC_HPP

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopfuse/geometry.hpp"
#include "coopfuse/pointcloud.hpp"
#include "coopfuse/roi.hpp"

namespace coopfuse {

// V2V exchange package wire format.
//
// Fixed 128-byte little-endian header, payload directly after:
//
//   offset  size  field
//        0     4  magic "COOP"
//        4     2  version (u16, currently 1)
//        6     2  flags (u16, reserved, 0)
//        8     8  sender_id (u64)
//       16     8  timestamp, microseconds since epoch (i64)
//       24     8  gps latitude, degrees (f64)
//       32     8  gps longitude, degrees (f64)
//       40     8  gps altitude, meters (f64)
//       48     8  imu yaw, radians (f64)
//       56     8  imu pitch, radians (f64)
//       64     8  imu roll, radians (f64)
//       72    12  install translation x,y,z meters (3 x f32)
//       84    12  install rotation yaw,pitch,roll radians (3 x f32)
//       96     1  roi tag (u8): 0 full frame, 1 fov sector, 2 forward
//                 cone, 3 box region
//       97    19  roi parameters (see below), zero padded
//      116     4  point_count (u32)
//      120     8  reserved, zero
//
// Roi parameters: sector = center f32 + width f32; cone = half angle f32 +
// max range f32; box = min/max corners as 6 x i16 signed centimeters.
//
// Payload: point_count records of 7 bytes each — x, y, z as signed 16-bit
// centimeters (little-endian), reflectance as u8 (value * 255, rounded).

inline constexpr std::size_t kHeaderSize = 128;
inline constexpr std::size_t kPointRecordSize = 7;
inline constexpr std::uint16_t kWireVersion = 1;

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuantizationRangeError : CodecError {
  using CodecError::CodecError;
};
struct MalformedPayloadError : CodecError {
  using CodecError::CodecError;
};
struct BadMagicError : CodecError {
  using CodecError::CodecError;
};
struct UnknownVersionError : CodecError {
  using CodecError::CodecError;
};
struct PayloadMismatchError : CodecError {
  using CodecError::CodecError;
};

struct ExchangePackage {
  std::uint64_t sender_id = 0;
  std::int64_t timestamp_us = 0;
  VehiclePose pose;
  RoiSpec roi = FullFrame{};
  std::vector<std::uint8_t> payload;  // encoded point records

  std::uint32_t point_count() const {
    return static_cast<std::uint32_t>(payload.size() / kPointRecordSize);
  }
  std::size_t wire_size() const { return kHeaderSize + payload.size(); }
};

namespace wire {

// Little-endian primitive access. memcpy keeps this alignment-safe; the
// build targets little-endian hosts (KITTI and the wire format both are).
template <typename T>
inline void put(std::vector<std::uint8_t>& buf, std::size_t offset, T value) {
  std::memcpy(buf.data() + offset, &value, sizeof(T));
}

template <typename T>
inline T get(const std::uint8_t* buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf + offset, sizeof(T));
  return value;
}

inline std::int16_t quantize_cm(float meters, std::size_t index) {
  const long cm = std::lround(static_cast<double>(meters) * 100.0);
  if (cm < -32767 || cm > 32767)
    throw QuantizationRangeError("coordinate out of quantizable range at point " +
                                 std::to_string(index));
  return static_cast<std::int16_t>(cm);
}

}  // namespace wire

/// 7 bytes per point: x, y, z as signed 16-bit centimeters, reflectance as
/// an 8-bit fraction. Requires |coordinate| <= 327.67 m.
inline std::vector<std::uint8_t> encode_points(const PointCloud& cloud) {
  std::vector<std::uint8_t> out(cloud.points.size() * kPointRecordSize);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point& p = cloud.points[i];
    const std::int16_t q[3] = {wire::quantize_cm(p.x, i),
                               wire::quantize_cm(p.y, i),
                               wire::quantize_cm(p.z, i)};
    std::memcpy(out.data() + i * kPointRecordSize, q, 6);
    const float r = std::clamp(p.reflectance, 0.f, 1.f);
    out[i * kPointRecordSize + 6] =
        static_cast<std::uint8_t>(std::lround(r * 255.f));
  }
  return out;
}

/// Inverse of encode_points; per-axis error is at most half a centimeter.
inline PointCloud decode_points(const std::uint8_t* data, std::size_t size,
                                int beam_count = 16) {
  if (size % kPointRecordSize != 0)
    throw MalformedPayloadError("payload length not divisible by 7");
  PointCloud cloud;
  cloud.beam_count = beam_count;
  cloud.points.resize(size / kPointRecordSize);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    std::int16_t q[3];
    std::memcpy(q, data + i * kPointRecordSize, 6);
    cloud.points[i] = Point{q[0] / 100.f, q[1] / 100.f, q[2] / 100.f,
                            data[i * kPointRecordSize + 6] / 255.f};
  }
  return cloud;
}

inline PointCloud decode_points(const std::vector<std::uint8_t>& payload,
                                int beam_count = 16) {
  return decode_points(payload.data(), payload.size(), beam_count);
}

namespace wire {

inline void put_roi(std::vector<std::uint8_t>& buf, std::size_t offset,
                    const RoiSpec& roi) {
  if (std::holds_alternative<FullFrame>(roi)) {
    buf[offset] = 0;
  } else if (const auto* s = std::get_if<FovSector>(&roi)) {
    buf[offset] = 1;
    put(buf, offset + 1, s->center_azimuth_rad);
    put(buf, offset + 5, s->width_rad);
  } else if (const auto* c = std::get_if<ForwardCone>(&roi)) {
    buf[offset] = 2;
    put(buf, offset + 1, c->half_angle_rad);
    put(buf, offset + 5, c->max_range_m);
  } else {
    const auto& b = std::get<BoxRegion>(roi);
    buf[offset] = 3;
    for (int i = 0; i < 3; ++i)
      put(buf, offset + 1 + 2 * i, quantize_cm(b.min_corner[i], 0));
    for (int i = 0; i < 3; ++i)
      put(buf, offset + 7 + 2 * i, quantize_cm(b.max_corner[i], 0));
  }
}

inline RoiSpec get_roi(const std::uint8_t* buf, std::size_t offset) {
  switch (buf[offset]) {
    case 0:
      return FullFrame{};
    case 1:
      return FovSector{get<float>(buf, offset + 1), get<float>(buf, offset + 5)};
    case 2:
      return ForwardCone{get<float>(buf, offset + 1),
                         get<float>(buf, offset + 5)};
    case 3: {
      BoxRegion b;
      for (int i = 0; i < 3; ++i)
        b.min_corner[i] = get<std::int16_t>(buf, offset + 1 + 2 * i) / 100.f;
      for (int i = 0; i < 3; ++i)
        b.max_corner[i] = get<std::int16_t>(buf, offset + 7 + 2 * i) / 100.f;
      return b;
    }
    default:
      throw MalformedPayloadError("unknown roi tag");
  }
}

}  // namespace wire

inline std::vector<std::uint8_t> serialize_package(const ExchangePackage& pkg) {
  std::vector<std::uint8_t> buf(kHeaderSize + pkg.payload.size(), 0);
  std::memcpy(buf.data(), "COOP", 4);
  wire::put(buf, 4, kWireVersion);
  wire::put(buf, 6, std::uint16_t{0});
  wire::put(buf, 8, pkg.sender_id);
  wire::put(buf, 16, pkg.timestamp_us);
  wire::put(buf, 24, pkg.pose.gps.latitude_deg);
  wire::put(buf, 32, pkg.pose.gps.longitude_deg);
  wire::put(buf, 40, pkg.pose.gps.altitude_m);
  wire::put(buf, 48, pkg.pose.imu.yaw);
  wire::put(buf, 56, pkg.pose.imu.pitch);
  wire::put(buf, 64, pkg.pose.imu.roll);
  for (int i = 0; i < 3; ++i)
    wire::put(buf, 72 + 4 * i,
              static_cast<float>(pkg.pose.install_translation[i]));
  wire::put(buf, 84, static_cast<float>(pkg.pose.install_rotation.yaw));
  wire::put(buf, 88, static_cast<float>(pkg.pose.install_rotation.pitch));
  wire::put(buf, 92, static_cast<float>(pkg.pose.install_rotation.roll));
  wire::put_roi(buf, 96, pkg.roi);
  wire::put(buf, 116, pkg.point_count());
  std::memcpy(buf.data() + kHeaderSize, pkg.payload.data(), pkg.payload.size());
  return buf;
}

inline ExchangePackage parse_package(const std::uint8_t* data,
                                     std::size_t size) {
  if (size < kHeaderSize)
    throw MalformedPayloadError("package shorter than header");
  if (std::memcmp(data, "COOP", 4) != 0)
    throw BadMagicError("bad package magic");
  const auto version = wire::get<std::uint16_t>(data, 4);
  if (version != kWireVersion)
    throw UnknownVersionError("unknown wire version " + std::to_string(version));

  ExchangePackage pkg;
  pkg.sender_id = wire::get<std::uint64_t>(data, 8);
  pkg.timestamp_us = wire::get<std::int64_t>(data, 16);
  pkg.pose.gps = GeodeticCoord(wire::get<double>(data, 24),
                               wire::get<double>(data, 32),
                               wire::get<double>(data, 40));
  pkg.pose.imu = EulerAngles(wire::get<double>(data, 48),
                             wire::get<double>(data, 56),
                             wire::get<double>(data, 64));
  for (int i = 0; i < 3; ++i)
    pkg.pose.install_translation[i] = wire::get<float>(data, 72 + 4 * i);
  pkg.pose.install_rotation =
      EulerAngles(wire::get<float>(data, 84), wire::get<float>(data, 88),
                  wire::get<float>(data, 92));
  pkg.roi = wire::get_roi(data, 96);

  const auto point_count = wire::get<std::uint32_t>(data, 116);
  const std::size_t payload_size = size - kHeaderSize;
  if (payload_size != static_cast<std::size_t>(point_count) * kPointRecordSize)
    throw PayloadMismatchError("point_count inconsistent with payload length");
  pkg.payload.assign(data + kHeaderSize, data + size);
  return pkg;
}

inline ExchangePackage parse_package(const std::vector<std::uint8_t>& bytes) {
  return parse_package(bytes.data(), bytes.size());
}

inline ExchangePackage make_package(std::uint64_t sender_id,
                                    std::int64_t timestamp_us,
                                    const VehiclePose& pose,
                                    const RoiSpec& roi,
                                    const PointCloud& cloud) {
  ExchangePackage pkg;
  pkg.sender_id = sender_id;
  pkg.timestamp_us = timestamp_us;
  pkg.pose = pose;
  pkg.roi = roi;
  pkg.payload = encode_points(extract_roi(cloud, roi));
  return pkg;
}

}  // namespace coopfuse

#endif  // COOPFUSE_CODEC_HPP
