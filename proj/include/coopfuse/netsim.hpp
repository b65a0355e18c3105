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

#ifndef COOPFUSE_NETSIM_HPP
#define COOPFUSE_NETSIM_HPP

#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coopfuse/codec.hpp"
#include "coopfuse/roi.hpp"

namespace coopfuse {

/// DSRC-class broadcast channel. 6 Mbps is the nominal rate; up to 27 Mbps
/// is configurable.
struct ChannelModel {
  double bandwidth_bps = 6e6;
  double latency_s = 0.002;
  double loss_rate = 0.0;

  void validate() const {
    if (!(bandwidth_bps > 0) || latency_s < 0 || loss_rate < 0 ||
        loss_rate >= 1)
      throw InvalidParameterError("invalid channel parameters");
  }
};

/// latency + serialization time of the message on the shared channel.
inline double transmission_time(std::uint64_t message_bytes,
                                const ChannelModel& channel) {
  channel.validate();
  return channel.latency_s +
         8.0 * static_cast<double>(message_bytes) / channel.bandwidth_bps;
}

/// The three ROI exchange situations: opposite lanes (full frames both
/// ways), junction (120 degree sector both ways), following (forward cone,
/// transmitter to receiver only).
enum class ExchangeScenario { OppositeLanes, Junction, Following };

inline RoiSpec roi_for_scenario(ExchangeScenario scenario) {
  switch (scenario) {
    case ExchangeScenario::OppositeLanes:
      return FullFrame{};
    case ExchangeScenario::Junction:
      return FovSector{0.f, 2.f * std::numbers::pi_v<float> / 3.f};
    default:
      return ForwardCone{std::numbers::pi_v<float> / 3.f, 50.f};
  }
}

inline bool is_bidirectional(ExchangeScenario scenario) {
  return scenario != ExchangeScenario::Following;
}

struct TrafficReport {
  struct Entry {
    int second = 0;
    int vehicle = 0;  // 0 = A, 1 = B
    std::uint64_t bytes = 0;
    double airtime_s = 0.0;
    bool delivered = true;
  };
  std::vector<Entry> messages;

  std::uint64_t cumulative_bytes() const {
    std::uint64_t total = 0;
    for (const auto& m : messages) total += m.bytes;
    return total;
  }
  std::uint64_t bytes_for_vehicle(int vehicle) const {
    std::uint64_t total = 0;
    for (const auto& m : messages)
      if (m.vehicle == vehicle) total += m.bytes;
    return total;
  }
};

struct TruncatedRunError : std::runtime_error {
  TrafficReport partial;
  explicit TruncatedRunError(TrafficReport report)
      : std::runtime_error("frame source exhausted before window end"),
        partial(std::move(report)) {}
};

/// Discrete-time exchange: at every sample tick each sending vehicle
/// applies the scenario ROI to its current frame, encodes a package, and
/// puts it on the air. Lost messages (seeded) still consume airtime.
inline TrafficReport simulate_exchange(ExchangeScenario scenario,
                                       const std::vector<PointCloud>& frames_a,
                                       const std::vector<PointCloud>& frames_b,
                                       double sample_rate_hz,
                                       const ChannelModel& channel,
                                       double window_s,
                                       std::uint64_t seed = 0) {
  if (!(sample_rate_hz > 0)) throw InvalidParameterError("sample rate must be > 0");
  if (!(window_s > 0)) throw InvalidParameterError("window must be > 0");
  channel.validate();

  const RoiSpec roi = roi_for_scenario(scenario);
  const int ticks = static_cast<int>(std::lround(window_s * sample_rate_hz));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrafficReport report;
  for (int tick = 0; tick < ticks; ++tick) {
    const int second = static_cast<int>(tick / sample_rate_hz);
    const std::size_t idx = static_cast<std::size_t>(tick);
    const bool b_sends = is_bidirectional(scenario);
    if (idx >= frames_a.size() || (b_sends && idx >= frames_b.size()))
      throw TruncatedRunError(std::move(report));

    auto send = [&](int vehicle, const PointCloud& frame) {
      const PointCloud selected = extract_roi(frame, roi);
      const std::uint64_t bytes =
          kHeaderSize + selected.size() * kPointRecordSize;
      TrafficReport::Entry entry;
      entry.second = second;
      entry.vehicle = vehicle;
      entry.bytes = bytes;
      entry.airtime_s = transmission_time(bytes, channel);
      entry.delivered = !(channel.loss_rate > 0 && unit(rng) < channel.loss_rate);
      report.messages.push_back(entry);
    };
    // A transmits in every scenario (in Following, A is the lead vehicle
    // feeding the follower).
    send(0, frames_a[idx]);
    if (b_sends) send(1, frames_b[idx]);
  }
  return report;
}

struct Feasibility {
  bool feasible = true;
  double worst_second_utilization = 0.0;
};

/// Feasible iff the summed airtime of every wall-clock second fits in one
/// second of channel time, both directions combined.
inline Feasibility feasibility_check(const TrafficReport& report,
                                     const ChannelModel& channel) {
  channel.validate();
  std::vector<double> per_second;
  for (const auto& m : report.messages) {
    if (per_second.size() <= static_cast<std::size_t>(m.second))
      per_second.resize(m.second + 1, 0.0);
    per_second[m.second] += m.airtime_s;
  }
  Feasibility out;
  for (double airtime : per_second)
    out.worst_second_utilization =
        std::max(out.worst_second_utilization, airtime);
  out.feasible = out.worst_second_utilization <= 1.0;
  return out;
}

/// CSV mirroring the per-second traffic bars: second, vehicle, bytes,
/// airtime_ms; one trailing feasibility line.
inline std::string traffic_report_csv(const TrafficReport& report,
                                      const ChannelModel& channel) {
  std::ostringstream out;
  out << "second,vehicle,bytes,airtime_ms\n";
  // Aggregate per (second, vehicle).
  struct Cell {
    std::uint64_t bytes = 0;
    double airtime = 0;
  };
  std::map<std::pair<int, int>, Cell> cells;
  for (const auto& m : report.messages) {
    auto& c = cells[{m.second, m.vehicle}];
    c.bytes += m.bytes;
    c.airtime += m.airtime_s;
  }
  for (const auto& [key, c] : cells)
    out << key.first << ',' << (key.second == 0 ? 'A' : 'B') << ',' << c.bytes
        << ',' << c.airtime * 1000.0 << '\n';
  const Feasibility f = feasibility_check(report, channel);
  out << "feasible," << (f.feasible ? "true" : "false")
      << ",worst_second_utilization," << f.worst_second_utilization << '\n';
  return out.str();
}

}  // namespace coopfuse

#endif  // COOPFUSE_NETSIM_HPP
