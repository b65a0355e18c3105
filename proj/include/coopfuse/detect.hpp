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

#ifndef COOPFUSE_DETECT_HPP
#define COOPFUSE_DETECT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "coopfuse/pointcloud.hpp"
#include "coopfuse/roi.hpp"

namespace coopfuse {

enum class DistanceBand { Near, Medium, Far };
enum class Difficulty { Easy, Moderate, Hard };

inline const char* to_string(DistanceBand b) {
  switch (b) {
    case DistanceBand::Near: return "near";
    case DistanceBand::Medium: return "medium";
    default: return "far";
  }
}

inline const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    default: return "hard";
  }
}

/// near < 10 m, far > 25 m; the boundaries themselves fall into medium.
inline DistanceBand distance_band(double range_m) {
  if (range_m < 0.0) throw InvalidParameterError("range must be >= 0");
  if (range_m < 10.0) return DistanceBand::Near;
  if (range_m <= 25.0) return DistanceBand::Medium;
  return DistanceBand::Far;
}

/// easy: detected by both single shots; moderate: by exactly one;
/// hard: by neither.
inline Difficulty classify_difficulty(bool detected_by_a, bool detected_by_b) {
  if (detected_by_a && detected_by_b) return Difficulty::Easy;
  if (detected_by_a || detected_by_b) return Difficulty::Moderate;
  return Difficulty::Hard;
}

struct DetectionBox {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();  // length, width, height
  double yaw = 0.0;
  double score = 0.0;
  DistanceBand band = DistanceBand::Near;
  std::size_t point_count = 0;
};

struct DetectorParams {
  double ground_height_tolerance = 0.2;  // meters above the fitted plane
  double cluster_distance = 0.5;         // single-linkage threshold
  std::size_t min_cluster_points = 40;
  double expected_density = 82.0;  // points per m^2 on a surface at 10 m

  void validate() const {
    if (!(ground_height_tolerance > 0) || !(cluster_distance > 0) ||
        min_cluster_points == 0 || !(expected_density > 0))
      throw InvalidParameterError("detector params must be positive");
  }

  /// Density implied by a 0.2 deg azimuth step and the beam layout of the
  /// given sensor, evaluated at 10 m.
  static double density_for_beam_count(int beam_count) {
    const auto [lo, hi] = elevation_span_deg(beam_count);
    const double elev_step_rad =
        (hi - lo) / (beam_count - 1) * std::numbers::pi / 180.0;
    const double az_step_rad = 0.2 * std::numbers::pi / 180.0;
    return 1.0 / (10.0 * az_step_rad * 10.0 * elev_step_rad);
  }
};

namespace detail {

// Union-find over point indices.
struct DisjointSet {
  std::vector<std::uint32_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct GridKeyHash {
  std::size_t operator()(const std::array<std::int32_t, 3>& k) const {
    std::uint64_t h = static_cast<std::uint32_t>(k[0]);
    h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k[1]);
    h = h * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k[2]);
    return static_cast<std::size_t>(h);
  }
};

inline float sq_dist(const Point& a, const Point& b) {
  const float dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Single-linkage clustering at `distance` via a uniform grid.
inline std::vector<std::vector<std::uint32_t>> cluster_points(
    const std::vector<Point>& points, double distance) {
  using Key = std::array<std::int32_t, 3>;
  std::unordered_map<Key, std::vector<std::uint32_t>, GridKeyHash> grid;
  const double inv = 1.0 / distance;
  auto key_of = [inv](const Point& p) -> Key {
    return {static_cast<std::int32_t>(std::floor(p.x * inv)),
            static_cast<std::int32_t>(std::floor(p.y * inv)),
            static_cast<std::int32_t>(std::floor(p.z * inv))};
  };
  for (std::uint32_t i = 0; i < points.size(); ++i)
    grid[key_of(points[i])].push_back(i);

  DisjointSet ds(points.size());
  const float d2 = static_cast<float>(distance * distance);
  for (const auto& [key, cell] : grid) {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const Key nkey = {key[0] + dx, key[1] + dy, key[2] + dz};
          if (nkey < key) continue;  // each cell pair once
          const auto it = grid.find(nkey);
          if (it == grid.end()) continue;
          const auto& other = it->second;
          for (std::uint32_t i : cell) {
            for (std::uint32_t j : other) {
              if (&cell == &other && j <= i) continue;
              if (ds.find(i) == ds.find(j)) continue;
              if (sq_dist(points[i], points[j]) <= d2) ds.unite(i, j);
            }
          }
        }
  }

  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_root;
  for (std::uint32_t i = 0; i < points.size(); ++i)
    by_root[ds.find(i)].push_back(i);
  std::vector<std::vector<std::uint32_t>> clusters;
  clusters.reserve(by_root.size());
  for (auto& [root, members] : by_root) clusters.push_back(std::move(members));
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

inline std::vector<Eigen::Vector2d> convex_hull(
    std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) -
           (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

struct BevRect {
  Eigen::Vector2d center;
  double length, width, yaw;
};

/// Minimum-perimeter bounding rectangle of the hull, yaw-aligned to one of
/// the hull edges. Perimeter, not area: a single-view car cluster is an
/// L-shape of two faces, and the area objective ties between the
/// face-aligned rectangle and one aligned with the L's hypotenuse, letting
/// quantization jitter pick a skewed fit. Perimeter prefers the faces.
inline BevRect min_perimeter_rect(const std::vector<Eigen::Vector2d>& hull) {
  BevRect best{Eigen::Vector2d::Zero(), 0, 0, 0};
  if (hull.empty()) return best;
  if (hull.size() == 1) return {hull[0], 0, 0, 0};

  double best_cost = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d edge = hull[(i + 1) % n] - hull[i];
    const double len = edge.norm();
    if (len < 1e-12) continue;
    const Eigen::Vector2d u = edge / len;
    const Eigen::Vector2d v(-u.y(), u.x());
    double lo_u = 1e300, hi_u = -1e300, lo_v = 1e300, hi_v = -1e300;
    for (const auto& p : hull) {
      const double pu = p.dot(u), pv = p.dot(v);
      lo_u = std::min(lo_u, pu);
      hi_u = std::max(hi_u, pu);
      lo_v = std::min(lo_v, pv);
      hi_v = std::max(hi_v, pv);
    }
    const double a = hi_u - lo_u, b = hi_v - lo_v;
    const double cost = a + b;
    if (cost < best_cost) {
      best_cost = cost;
      const Eigen::Vector2d c_uv((lo_u + hi_u) / 2, (lo_v + hi_v) / 2);
      best.center = c_uv.x() * u + c_uv.y() * v;
      if (a >= b) {
        best.length = a;
        best.width = b;
        best.yaw = std::atan2(u.y(), u.x());
      } else {
        best.length = b;
        best.width = a;
        best.yaw = std::atan2(v.y(), v.x());
      }
    }
  }
  // Rectangle yaw is only meaningful modulo pi.
  best.yaw = normalize_angle(best.yaw);
  if (best.yaw > std::numbers::pi / 2) best.yaw -= std::numbers::pi;
  if (best.yaw <= -std::numbers::pi / 2) best.yaw += std::numbers::pi;
  return best;
}

inline std::array<Eigen::Vector2d, 4> rect_corners(const DetectionBox& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double hl = b.size.x() / 2, hw = b.size.y() / 2;
  std::array<Eigen::Vector2d, 4> out;
  // Counter-clockwise, as required by the clip inside-test.
  const double lx[4] = {hl, hl, -hl, -hl};
  const double wy[4] = {-hw, hw, hw, -hw};
  for (int i = 0; i < 4; ++i)
    out[i] = {b.center.x() + c * lx[i] - s * wy[i],
              b.center.y() + s * lx[i] + c * wy[i]};
  return out;
}

inline double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return std::abs(a) / 2;
}

// Sutherland-Hodgman clip of a convex polygon against a convex clip rect.
inline std::vector<Eigen::Vector2d> clip_convex(
    std::vector<Eigen::Vector2d> poly,
    const std::array<Eigen::Vector2d, 4>& clip) {
  for (int i = 0; i < 4 && !poly.empty(); ++i) {
    const Eigen::Vector2d a = clip[i];
    const Eigen::Vector2d b = clip[(i + 1) % 4];
    const Eigen::Vector2d edge = b - a;
    auto inside = [&](const Eigen::Vector2d& p) {
      return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x()) >= -1e-12;
    };
    std::vector<Eigen::Vector2d> out;
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Eigen::Vector2d& p = poly[j];
      const Eigen::Vector2d& q = poly[(j + 1) % poly.size()];
      const bool pin = inside(p), qin = inside(q);
      if (pin) out.push_back(p);
      if (pin != qin) {
        // Solve cross(edge, p + t(q-p) - a) = 0 for t.
        const double denom = edge.x() * (q.y() - p.y()) - edge.y() * (q.x() - p.x());
        if (std::abs(denom) > 1e-300) {
          const double t =
              (edge.x() * (a.y() - p.y()) - edge.y() * (a.x() - p.x())) / denom;
          out.push_back(p + t * (q - p));
        }
      }
    }
    poly = std::move(out);
  }
  return poly;
}

}  // namespace detail

/// Bird's-eye-view IoU of two oriented boxes.
inline double bev_iou(const DetectionBox& a, const DetectionBox& b) {
  const auto ca = detail::rect_corners(a);
  const auto cb = detail::rect_corners(b);
  std::vector<Eigen::Vector2d> poly(ca.begin(), ca.end());
  const double inter = detail::polygon_area(detail::clip_convex(poly, cb));
  const double area_a = a.size.x() * a.size.y();
  const double area_b = b.size.x() * b.size.y();
  const double uni = area_a + area_b - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Geometric baseline detector: fixed-height ground removal, single-linkage
/// clustering, yaw-aligned minimum-area box fit, density-ratio score.
/// Deterministic and invariant to input point order.
inline std::vector<DetectionBox> detect(const PointCloud& cloud,
                                        const DetectorParams& params) {
  params.validate();
  if (cloud.empty()) return {};

  // Canonical order for permutation invariance.
  std::vector<Point> pts = cloud.points;
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return std::tie(a.x, a.y, a.z, a.reflectance) <
           std::tie(b.x, b.y, b.z, b.reflectance);
  });

  // Ground plane at the low-z percentile; strip everything within
  // tolerance of it.
  std::vector<float> zs(pts.size());
  std::transform(pts.begin(), pts.end(), zs.begin(),
                 [](const Point& p) { return p.z; });
  std::sort(zs.begin(), zs.end());
  const float z_ground = zs[static_cast<std::size_t>(
      static_cast<double>(zs.size() - 1) * 0.02)];
  std::vector<Point> above;
  above.reserve(pts.size());
  for (const Point& p : pts)
    if (p.z > z_ground + params.ground_height_tolerance) above.push_back(p);
  if (above.empty()) return {};

  const auto clusters = detail::cluster_points(above, params.cluster_distance);

  std::vector<DetectionBox> boxes;
  for (const auto& members : clusters) {
    if (members.size() < params.min_cluster_points) continue;
    std::vector<Eigen::Vector2d> bev;
    bev.reserve(members.size());
    float z_lo = std::numeric_limits<float>::max();
    float z_hi = std::numeric_limits<float>::lowest();
    for (std::uint32_t i : members) {
      bev.emplace_back(above[i].x, above[i].y);
      z_lo = std::min(z_lo, above[i].z);
      z_hi = std::max(z_hi, above[i].z);
    }
    const auto rect = detail::min_perimeter_rect(detail::convex_hull(bev));
    DetectionBox box;
    box.center = {rect.center.x(), rect.center.y(), (z_lo + z_hi) / 2.0};
    box.size = {std::max(rect.length, 0.01), std::max(rect.width, 0.01),
                std::max(static_cast<double>(z_hi - z_lo), 0.01)};
    box.yaw = rect.yaw;
    box.point_count = members.size();

    const double range = std::max(box.center.norm(), 1.0);
    constexpr double kReferenceCarSideArea = 6.75;  // 4.5 m x 1.5 m
    const double expected = params.expected_density * kReferenceCarSideArea *
                            (10.0 / range) * (10.0 / range);
    box.score = std::min(1.0, static_cast<double>(members.size()) / expected);
    box.band = distance_band(range);
    boxes.push_back(box);
  }
  std::sort(boxes.begin(), boxes.end(),
            [](const DetectionBox& a, const DetectionBox& b) {
              return std::tie(a.center.x(), a.center.y(), a.center.z()) <
                     std::tie(b.center.x(), b.center.y(), b.center.z());
            });
  return boxes;
}

struct Match {
  std::size_t detection_index;
  std::size_t truth_index;
  double iou;
};

/// Greedy highest-IoU-first matching on BEV rectangles; every detection and
/// every truth box is used at most once.
inline std::vector<Match> match_detections(
    const std::vector<DetectionBox>& detections,
    const std::vector<DetectionBox>& truth, double iou_threshold) {
  if (!(iou_threshold > 0.0) || !(iou_threshold < 1.0))
    throw InvalidParameterError("iou_threshold must be in (0, 1)");
  std::vector<Match> candidates;
  for (std::size_t d = 0; d < detections.size(); ++d)
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double iou = bev_iou(detections[d], truth[t]);
      if (iou >= iou_threshold) candidates.push_back({d, t, iou});
    }
  std::sort(candidates.begin(), candidates.end(),
            [](const Match& a, const Match& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              return std::tie(a.detection_index, a.truth_index) <
                     std::tie(b.detection_index, b.truth_index);
            });
  std::vector<bool> det_used(detections.size(), false);
  std::vector<bool> truth_used(truth.size(), false);
  std::vector<Match> matches;
  for (const Match& m : candidates) {
    if (det_used[m.detection_index] || truth_used[m.truth_index]) continue;
    det_used[m.detection_index] = true;
    truth_used[m.truth_index] = true;
    matches.push_back(m);
  }
  return matches;
}

}  // namespace coopfuse

#endif  // COOPFUSE_DETECT_HPP
