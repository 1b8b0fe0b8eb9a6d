// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "mensa/common.hpp"
#include "mensa/profile.hpp"

namespace mensa {

// One of the five built-in layer clusters. Ranges are inclusive; footprint
// bounds use binary kilobytes/megabytes.
struct ClusterRange {
  int id = 0;
  double param_bytes_lo = 0, param_bytes_hi = 0;
  double param_intensity_lo = 0, param_intensity_hi = 0;
  double mac_lo = 0, mac_hi = 0;

  bool contains(const LayerProfile& p) const;
};

const std::array<ClusterRange, 5>& builtin_cluster_ranges();

enum class MatchKind { ExactRange, NearestFallback };

const char* match_name(MatchKind m);

struct ClusterAssignment {
  int unit_id = 0;
  int cluster = 0;
  MatchKind matched = MatchKind::ExactRange;
  double distance = 0;  // 0 iff exact-range
};

// Log10-space Euclidean distance against the cluster's centroid, over
// (param_bytes, max(param_intensity, 1), mac_count). Centroids are the
// geometric midpoints of the ranges.
std::pair<int, double> nearest_cluster(const LayerProfile& p,
                                       std::span<const ClusterRange> ranges);

// Total classification: exact range match when unique (several matches are
// broken by centroid distance, then lowest id), nearest centroid otherwise.
ClusterAssignment classify(const LayerProfile& p,
                           std::span<const ClusterRange> ranges);

inline ClusterAssignment classify(const LayerProfile& p) {
  return classify(p, builtin_cluster_ranges());
}

struct ClusterStats {
  // Index 0 unused; clusters are 1..5.
  std::array<u64, 6> count{};
  std::array<u64, 6> param_bytes{};
  std::array<u64, 6> macs{};
  // Aggregate intensity per cluster: sum(macs) / sum(param_bytes), exact.
  std::array<Rational, 6> mean_intensity{};
};

ClusterStats cluster_stats(std::span<const ClusterAssignment> assignments,
                           std::span<const LayerProfile> profiles);

}  // namespace mensa
