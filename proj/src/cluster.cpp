// SPDX-License-Identifier: Apache-2.0
#include "mensa/cluster.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace mensa {

namespace {

constexpr double kKB = 1024.0;
constexpr double kMB = 1024.0 * 1024.0;

const std::array<ClusterRange, 5> kRanges = {{
    // id, footprint lo/hi,     intensity lo/hi, MACs lo/hi
    {1, 1 * kKB, 100 * kKB, 780, 20000, 30e6, 200e6},
    {2, 100 * kKB, 500 * kKB, 81, 400, 20e6, 100e6},
    {3, 0.9 * kMB, 18 * kMB, 0, 2, 0.1e6, 10e6},
    {4, 0.5 * kMB, 2.5 * kMB, 25, 64, 5e6, 25e6},
    {5, 1 * kKB, 100 * kKB, 49, 600, 0.5e6, 5e6},
}};

struct Centroid {
  double fp, ai, mac;  // log10 of geometric range midpoints
};

Centroid centroid_of(const ClusterRange& r) {
  // The intensity axis is clamped at 1, matching the distance metric.
  Centroid c;
  const double ai_lo = std::max(r.param_intensity_lo, 1.0);
  const double ai_hi = std::max(r.param_intensity_hi, 1.0);
  c.fp = 0.5 * (std::log10(r.param_bytes_lo) + std::log10(r.param_bytes_hi));
  c.ai = 0.5 * (std::log10(ai_lo) + std::log10(ai_hi));
  c.mac = 0.5 * (std::log10(r.mac_lo) + std::log10(r.mac_hi));
  return c;
}

double centroid_distance(const LayerProfile& p, const ClusterRange& r) {
  const Centroid c = centroid_of(r);
  const double fp = std::log10(static_cast<double>(p.param_bytes));
  const double ai = std::log10(std::max(p.param_intensity.as_double(), 1.0));
  const double mac = std::log10(static_cast<double>(p.mac_count));
  const double dfp = fp - c.fp;
  const double dai = ai - c.ai;
  const double dmac = mac - c.mac;
  return std::sqrt(dfp * dfp + dai * dai + dmac * dmac);
}

}  // namespace

bool ClusterRange::contains(const LayerProfile& p) const {
  const double fp = static_cast<double>(p.param_bytes);
  const double ai = p.param_intensity.as_double();
  const double mac = static_cast<double>(p.mac_count);
  return fp >= param_bytes_lo && fp <= param_bytes_hi && ai >= param_intensity_lo &&
         ai <= param_intensity_hi && mac >= mac_lo && mac <= mac_hi;
}

const std::array<ClusterRange, 5>& builtin_cluster_ranges() { return kRanges; }

const char* match_name(MatchKind m) {
  return m == MatchKind::ExactRange ? "exact-range" : "nearest-fallback";
}

std::pair<int, double> nearest_cluster(const LayerProfile& p,
                                       std::span<const ClusterRange> ranges) {
  if (p.mac_count < 1 || p.param_bytes < 1)
    throw ModelError("nearest_cluster requires mac_count >= 1 and param_bytes >= 1");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const ClusterRange& r : ranges) {
    const double d = centroid_distance(p, r);
    if (d < best_d || (d == best_d && r.id < best)) {
      best = r.id;
      best_d = d;
    }
  }
  return {best, best_d};
}

ClusterAssignment classify(const LayerProfile& p,
                           std::span<const ClusterRange> ranges) {
  if (p.mac_count < 1) throw ModelError("classify requires mac_count >= 1");
  ClusterAssignment a;
  a.unit_id = p.unit_id;

  const ClusterRange* match = nullptr;
  double match_d = std::numeric_limits<double>::infinity();
  for (const ClusterRange& r : ranges) {
    if (!r.contains(p)) continue;
    const double d = centroid_distance(p, r);
    if (!match || d < match_d || (d == match_d && r.id < match->id)) {
      match = &r;
      match_d = d;
    }
  }
  if (match) {
    a.cluster = match->id;
    a.matched = MatchKind::ExactRange;
    a.distance = 0;
    return a;
  }
  const auto [id, d] = nearest_cluster(p, ranges);
  a.cluster = id;
  a.matched = MatchKind::NearestFallback;
  a.distance = d;
  return a;
}

ClusterStats cluster_stats(std::span<const ClusterAssignment> assignments,
                           std::span<const LayerProfile> profiles) {
  std::unordered_map<int, const LayerProfile*> by_id;
  for (const LayerProfile& p : profiles) by_id[p.unit_id] = &p;

  ClusterStats s;
  for (const ClusterAssignment& a : assignments) {
    if (a.cluster < 1 || a.cluster > 5)
      throw InvariantError("cluster id out of range");
    const auto it = by_id.find(a.unit_id);
    if (it == by_id.end())
      throw ModelError("assignment for unknown unit " + std::to_string(a.unit_id));
    const size_t c = static_cast<size_t>(a.cluster);
    s.count[c]++;
    s.param_bytes[c] += it->second->param_bytes;
    s.macs[c] += it->second->mac_count;
  }
  for (size_t c = 1; c <= 5; ++c)
    if (s.param_bytes[c] > 0) s.mean_intensity[c] = Rational::of(s.macs[c], s.param_bytes[c]);
  return s;
}

}  // namespace mensa
