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

#ifndef COOPFUSE_POINTCLOUD_HPP
#define COOPFUSE_POINTCLOUD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopfuse/geometry.hpp"

namespace coopfuse {

struct MalformedFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Point {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;
  float reflectance = 0.f;

  Vec3 position() const { return {x, y, z}; }
  float range() const { return std::sqrt(x * x + y * y + z * z); }

  bool operator==(const Point&) const = default;
};

struct PointCloud {
  std::vector<Point> points;
  int beam_count = 16;  // one of 16, 32, 64
  std::string frame_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Spherical range-image projection of a cloud. Cells hold the nearest
/// return per (elevation, azimuth) bin.
struct RangeImage {
  struct Cell {
    float range = 0.f;
    float reflectance = 0.f;
  };
  int rows = 0;
  int cols = 0;
  std::vector<std::optional<Cell>> cells;
  std::size_t skipped_points = 0;  // zero-norm inputs

  const std::optional<Cell>& at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
  std::optional<Cell>& at(int row, int col) {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
  std::size_t occupied_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(),
                      [](const auto& c) { return c.has_value(); }));
  }
};

/// Elevation span in degrees for the supported Velodyne-class sensors.
inline std::pair<double, double> elevation_span_deg(int beam_count) {
  switch (beam_count) {
    case 16: return {-15.0, 15.0};
    case 32: return {-30.67, 10.67};
    case 64: return {-24.8, 2.0};
    default:
      throw InvalidParameterError("unsupported beam count");
  }
}

/// Decodes the KITTI velodyne layout: consecutive little-endian float32
/// quadruples (x, y, z, reflectance), no header. Reflectance outside [0,1]
/// is clamped; the clamp count is reported via `clamped` when non-null.
inline PointCloud read_kitti_bin(const std::uint8_t* data, std::size_t size,
                                 int beam_count = 16,
                                 std::size_t* clamped = nullptr) {
  if (size % 16 != 0)
    throw MalformedFileError("kitti bin length not divisible by 16");
  PointCloud cloud;
  cloud.beam_count = beam_count;
  cloud.points.resize(size / 16);
  std::size_t clamp_count = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    float v[4];
    std::memcpy(v, data + i * 16, 16);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]) ||
        !std::isfinite(v[3]))
      throw MalformedFileError("non-finite float at point index " +
                               std::to_string(i));
    float r = v[3];
    if (r < 0.f || r > 1.f) {
      r = std::clamp(r, 0.f, 1.f);
      ++clamp_count;
    }
    cloud.points[i] = Point{v[0], v[1], v[2], r};
  }
  if (clamped) *clamped = clamp_count;
  return cloud;
}

inline PointCloud read_kitti_bin(const std::vector<std::uint8_t>& bytes,
                                 int beam_count = 16,
                                 std::size_t* clamped = nullptr) {
  return read_kitti_bin(bytes.data(), bytes.size(), beam_count, clamped);
}

/// Inverse of read_kitti_bin; same byte layout.
inline std::vector<std::uint8_t> write_kitti_bin(const PointCloud& cloud) {
  std::vector<std::uint8_t> out(cloud.points.size() * 16);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const float v[4] = {cloud.points[i].x, cloud.points[i].y, cloud.points[i].z,
                        cloud.points[i].reflectance};
    std::memcpy(out.data() + i * 16, v, 16);
  }
  return out;
}

namespace detail {

struct VoxelKey {
  std::int32_t ix, iy, iz;
  auto operator<=>(const VoxelKey&) const = default;
};

inline VoxelKey voxel_key(const Point& p, double leaf) {
  return {static_cast<std::int32_t>(std::floor(p.x / leaf)),
          static_cast<std::int32_t>(std::floor(p.y / leaf)),
          static_cast<std::int32_t>(std::floor(p.z / leaf))};
}

}  // namespace detail

/// Replaces every occupied leaf^3 voxel by the centroid of its points.
/// Output is ordered by voxel index, so the result is deterministic.
inline PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) throw InvalidParameterError("leaf must be > 0");
  struct Accum {
    double x = 0, y = 0, z = 0, r = 0;
    std::size_t n = 0;
  };
  std::map<detail::VoxelKey, Accum> voxels;
  for (const Point& p : cloud.points) {
    Accum& a = voxels[detail::voxel_key(p, leaf)];
    a.x += p.x;
    a.y += p.y;
    a.z += p.z;
    a.r += p.reflectance;
    ++a.n;
  }
  PointCloud out;
  out.beam_count = cloud.beam_count;
  out.frame_id = cloud.frame_id;
  out.points.reserve(voxels.size());
  for (const auto& [key, a] : voxels) {
    const double n = static_cast<double>(a.n);
    out.points.push_back(Point{static_cast<float>(a.x / n),
                               static_cast<float>(a.y / n),
                               static_cast<float>(a.z / n),
                               static_cast<float>(a.r / n)});
  }
  return out;
}

/// Projects a cloud onto an elevation/azimuth grid. Azimuth is atan2(y, x)
/// mapped over the full circle; elevation asin(z/|p|) mapped over the
/// sensor's span. Nearest return wins per cell; zero-norm points are
/// skipped and counted.
inline RangeImage spherical_project(const PointCloud& cloud, int rows,
                                    int cols) {
  if (rows < 1 || cols < 1)
    throw InvalidParameterError("rows and cols must be >= 1");
  RangeImage img;
  img.rows = rows;
  img.cols = cols;
  img.cells.assign(static_cast<std::size_t>(rows) * cols, std::nullopt);

  const auto [elev_lo_deg, elev_hi_deg] = elevation_span_deg(cloud.beam_count);
  const double elev_lo = elev_lo_deg * std::numbers::pi / 180.0;
  const double elev_hi = elev_hi_deg * std::numbers::pi / 180.0;
  const double two_pi = 2.0 * std::numbers::pi;

  for (const Point& p : cloud.points) {
    const double range = p.range();
    if (range <= 0.0) {
      ++img.skipped_points;
      continue;
    }
    double azimuth = std::atan2(p.y, p.x);
    if (azimuth < 0.0) azimuth += two_pi;
    int col = static_cast<int>(azimuth / two_pi * cols);
    col = std::clamp(col, 0, cols - 1);

    const double elevation = std::asin(std::clamp(p.z / range, -1.0, 1.0));
    const double frac = (elevation - elev_lo) / (elev_hi - elev_lo);
    int row = static_cast<int>(frac * rows);
    row = std::clamp(row, 0, rows - 1);

    auto& cell = img.at(row, col);
    if (!cell || range < cell->range)
      cell = RangeImage::Cell{static_cast<float>(range), p.reflectance};
  }
  return img;
}

}  // namespace coopfuse

#endif  // COOPFUSE_POINTCLOUD_HPP
