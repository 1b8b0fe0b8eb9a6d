// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mensa/accel.hpp"
#include "mensa/cluster.hpp"
#include "mensa/common.hpp"
#include "mensa/graph.hpp"
#include "mensa/profile.hpp"

namespace mensa {

enum class MapPhase { Phase1, Remapped };

struct Mapping {
  std::map<int, std::string> accel_of;  // unit id -> accelerator name
  std::map<int, MapPhase> phase_of;

  const std::string& at(int unit_id) const;
  bool total_over(const LayerGraph& g) const;
};

// Phase 1: ideal accelerator per unit in isolation, cluster routing table.
// Units whose kind the routed dataflow cannot execute fall back to the
// compatible accelerator with the lowest estimated unit latency.
Mapping phase1_map(std::span<const LayerProfile> profiles,
                   std::span<const ClusterAssignment> assignments,
                   const Platform& platform);

// DRAM-synchronized activation hand-off: write through DRAM at the source
// bandwidth, read back at the destination bandwidth. Zero when src == dst.
// Returns (seconds, joules).
std::pair<double, double> transfer_cost(u64 bytes, const AcceleratorConfig& src,
                                        const AcceleratorConfig& dst,
                                        const TechnologyTable& t);

// Phase 2: one pass over cross-accelerator edges in consumer topological
// order; the consumer moves to the producer's accelerator when that beats
// staying put plus the transfer. cost = latency + lambda * energy.
Mapping phase2_adjust(const Mapping& phase1, const LayerGraph& g,
                      std::span<const LayerProfile> profiles,
                      const Platform& platform, double lambda = 0.0);

// Estimated latency of one unit on one accelerator with a cold full
// parameter fetch; infinity when the dataflow cannot run the unit.
double estimate_unit_latency(const LayerProfile& p, const AcceleratorConfig& a,
                             u32 psum_width = 4);

double estimate_unit_energy(const LayerProfile& p, const AcceleratorConfig& a,
                            const TechnologyTable& t);

}  // namespace mensa
