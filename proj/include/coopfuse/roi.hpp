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

#ifndef COOPFUSE_ROI_HPP
#define COOPFUSE_ROI_HPP

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <variant>
#include <vector>

#include "coopfuse/pointcloud.hpp"

namespace coopfuse {

// Region-of-interest selectors. Azimuth convention matches the geometry
// module: counterclockwise from +x (East). Points exactly on a boundary
// are kept.

struct FullFrame {
  bool operator==(const FullFrame&) const = default;
};

struct FovSector {
  float center_azimuth_rad = 0.f;
  float width_rad = 0.f;  // (0, 2*pi]
  bool operator==(const FovSector&) const = default;
};

struct ForwardCone {
  float half_angle_rad = 0.f;  // (0, pi], measured from +x in 3D
  float max_range_m = 0.f;
  bool operator==(const ForwardCone&) const = default;
};

struct BoxRegion {
  Eigen::Vector3f min_corner = Eigen::Vector3f::Zero();
  Eigen::Vector3f max_corner = Eigen::Vector3f::Zero();
  bool operator==(const BoxRegion& o) const {
    return min_corner == o.min_corner && max_corner == o.max_corner;
  }
};

using RoiSpec = std::variant<FullFrame, FovSector, ForwardCone, BoxRegion>;

inline void validate_roi(const RoiSpec& spec) {
  if (const auto* s = std::get_if<FovSector>(&spec)) {
    if (!(s->width_rad > 0.f) || s->width_rad > 2.f * std::numbers::pi_v<float> + 1e-6f)
      throw InvalidParameterError("fov sector width must be in (0, 2*pi]");
  } else if (const auto* c = std::get_if<ForwardCone>(&spec)) {
    if (!(c->half_angle_rad > 0.f) || c->half_angle_rad > std::numbers::pi_v<float>)
      throw InvalidParameterError("cone half angle must be in (0, pi]");
    if (!(c->max_range_m > 0.f))
      throw InvalidParameterError("cone max range must be > 0");
  } else if (const auto* b = std::get_if<BoxRegion>(&spec)) {
    for (int i = 0; i < 3; ++i)
      if (!(b->min_corner[i] < b->max_corner[i]))
        throw InvalidParameterError("box min must be < max per axis");
  }
}

/// Retains exactly the points inside the region. FullFrame is the identity.
inline PointCloud extract_roi(const PointCloud& cloud, const RoiSpec& spec) {
  validate_roi(spec);
  if (std::holds_alternative<FullFrame>(spec)) return cloud;

  PointCloud out;
  out.beam_count = cloud.beam_count;
  out.frame_id = cloud.frame_id;
  auto keep = [&spec](const Point& p) -> bool {
    if (const auto* s = std::get_if<FovSector>(&spec)) {
      const double azimuth = std::atan2(p.y, p.x);
      const double offset = normalize_angle(azimuth - s->center_azimuth_rad);
      return std::abs(offset) <= s->width_rad / 2.0 + 1e-12;
    }
    if (const auto* c = std::get_if<ForwardCone>(&spec)) {
      const double range = p.range();
      if (range > c->max_range_m) return false;
      if (range == 0.0) return true;
      const double angle = std::acos(std::clamp(p.x / range, -1.0, 1.0));
      return angle <= c->half_angle_rad + 1e-12;
    }
    const auto& b = std::get<BoxRegion>(spec);
    return p.x >= b.min_corner.x() && p.x <= b.max_corner.x() &&
           p.y >= b.min_corner.y() && p.y <= b.max_corner.y() &&
           p.z >= b.min_corner.z() && p.z <= b.max_corner.z();
  };
  for (const Point& p : cloud.points)
    if (keep(p)) out.points.push_back(p);
  return out;
}

namespace detail {

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = static_cast<std::uint32_t>(k.ix);
    h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k.iy);
    h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k.iz);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Voxel occupancy accumulated over several mapping passes of the same
/// area; voxels seen in most passes are treated as static background.
struct StaticMap {
  double leaf = 0.2;
  std::size_t frames_observed = 0;
  std::unordered_map<detail::VoxelKey, std::uint32_t, detail::VoxelKeyHash>
      counts;

  bool empty() const { return counts.empty(); }

  double fraction_at(const Point& p) const {
    if (frames_observed == 0) return 0.0;
    const auto it = counts.find(detail::voxel_key(p, leaf));
    if (it == counts.end()) return 0.0;
    return static_cast<double>(it->second) / frames_observed;
  }
};

inline StaticMap build_static_map(const std::vector<PointCloud>& frames,
                                  double leaf = 0.2) {
  if (!(leaf > 0.0)) throw InvalidParameterError("leaf must be > 0");
  StaticMap map;
  map.leaf = leaf;
  map.frames_observed = frames.size();
  for (const PointCloud& frame : frames) {
    // Count each voxel at most once per frame.
    std::unordered_map<detail::VoxelKey, bool, detail::VoxelKeyHash> seen;
    for (const Point& p : frame.points) seen[detail::voxel_key(p, leaf)] = true;
    for (const auto& [key, _] : seen) ++map.counts[key];
  }
  return map;
}

/// Drops points whose voxel was observed in at least `min_fraction` of the
/// mapping frames. An empty map leaves the cloud unchanged.
inline PointCloud background_subtract(const PointCloud& cloud,
                                      const StaticMap& map,
                                      double min_fraction = 0.8) {
  if (!(min_fraction > 0.0) || min_fraction > 1.0)
    throw InvalidParameterError("min_fraction must be in (0, 1]");
  if (map.empty()) return cloud;
  PointCloud out;
  out.beam_count = cloud.beam_count;
  out.frame_id = cloud.frame_id;
  for (const Point& p : cloud.points)
    if (map.fraction_at(p) < min_fraction) out.points.push_back(p);
  return out;
}

}  // namespace coopfuse

#endif  // COOPFUSE_ROI_HPP
