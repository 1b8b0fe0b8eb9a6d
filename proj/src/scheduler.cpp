// SPDX-License-Identifier: Apache-2.0
#include "mensa/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

#include "mensa/dataflow.hpp"
#include "mensa/energy.hpp"
#include "mensa/sim.hpp"

namespace mensa {

const std::string& Mapping::at(int unit_id) const {
  const auto it = accel_of.find(unit_id);
  if (it == accel_of.end())
    throw ModelError("mapping is not total: unit " + std::to_string(unit_id) +
                     " is unmapped");
  return it->second;
}

bool Mapping::total_over(const LayerGraph& g) const {
  return std::all_of(g.layers.begin(), g.layers.end(),
                     [this](const Layer& l) { return accel_of.count(l.id) > 0; });
}

double estimate_unit_latency(const LayerProfile& p, const AcceleratorConfig& a,
                             u32 psum_width) {
  if (!dataflow_accepts(a.dataflow, p.kind))
    return std::numeric_limits<double>::infinity();
  return unit_latency(dataflow_cost(p, a, full_fetch(p), psum_width), a);
}

double estimate_unit_energy(const LayerProfile& p, const AcceleratorConfig& a,
                            const TechnologyTable& t) {
  if (!dataflow_accepts(a.dataflow, p.kind))
    return std::numeric_limits<double>::infinity();
  return layer_energy(dataflow_cost(p, a, full_fetch(p), t.psum_width), p.mac_count,
                      a, t)
      .total;
}

Mapping phase1_map(std::span<const LayerProfile> profiles,
                   std::span<const ClusterAssignment> assignments,
                   const Platform& platform) {
  std::unordered_map<int, int> cluster_of;
  for (const auto& a : assignments) cluster_of[a.unit_id] = a.cluster;

  Mapping m;
  for (const auto& p : profiles) {
    const auto cit = cluster_of.find(p.unit_id);
    if (cit == cluster_of.end())
      throw ModelError("unit " + std::to_string(p.unit_id) + " has no cluster");
    const auto rit = platform.routing.find(cit->second);
    if (rit == platform.routing.end())
      throw ModelError("routing table missing cluster " + std::to_string(cit->second));

    const AcceleratorConfig& routed = platform.accel(rit->second);
    std::string chosen = routed.name;
    if (!dataflow_accepts(routed.dataflow, p.kind)) {
      // Routed target cannot execute this kind; best compatible accelerator
      // by estimated latency, platform order breaking ties.
      double best = std::numeric_limits<double>::infinity();
      chosen.clear();
      for (const auto& a : platform.accelerators) {
        const double lat = estimate_unit_latency(p, a, platform.tech.psum_width);
        if (lat < best) {
          best = lat;
          chosen = a.name;
        }
      }
      if (chosen.empty())
        throw ModelError("no accelerator in platform '" + platform.name +
                         "' can execute unit " + std::to_string(p.unit_id));
    }
    m.accel_of[p.unit_id] = chosen;
    m.phase_of[p.unit_id] = MapPhase::Phase1;
  }
  return m;
}

std::pair<double, double> transfer_cost(u64 bytes, const AcceleratorConfig& src,
                                        const AcceleratorConfig& dst,
                                        const TechnologyTable& t) {
  if (src.name == dst.name || bytes == 0) return {0.0, 0.0};
  const double b = static_cast<double>(bytes);
  const double seconds = b / src.dram_bandwidth + b / dst.dram_bandwidth;
  double joules = 2.0 * b * t.e_dram;
  if (src.placement == Placement::OnChip) joules += b * t.e_offchip_link;
  if (dst.placement == Placement::OnChip) joules += b * t.e_offchip_link;
  return {seconds, joules};
}

Mapping phase2_adjust(const Mapping& phase1, const LayerGraph& g,
                      std::span<const LayerProfile> profiles,
                      const Platform& platform, double lambda) {
  std::unordered_map<int, const LayerProfile*> prof;
  for (const auto& p : profiles) prof[p.unit_id] = &p;

  const std::vector<int> topo = topological_order(g);
  std::unordered_map<int, size_t> topo_index;
  for (size_t i = 0; i < topo.size(); ++i) topo_index[topo[i]] = i;

  // Edges in consumer topological order, producers earliest-first.
  std::vector<Edge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    if (topo_index[a.dst] != topo_index[b.dst])
      return topo_index[a.dst] < topo_index[b.dst];
    return topo_index[a.src] < topo_index[b.src];
  });

  Mapping m = phase1;
  std::set<int> remapped;
  for (const Edge& e : edges) {
    const std::string& src_accel = m.at(e.src);
    const std::string& dst_accel = m.at(e.dst);
    if (src_accel == dst_accel) continue;
    if (remapped.count(e.dst)) continue;  // a unit moves at most once

    const LayerProfile& p = *prof.at(e.dst);
    const AcceleratorConfig& keep_on = platform.accel(dst_accel);
    const AcceleratorConfig& move_to = platform.accel(src_accel);

    const auto [xfer_s, xfer_j] = transfer_cost(e.act_bytes, move_to, keep_on, platform.tech);
    const double cost_keep =
        estimate_unit_latency(p, keep_on, platform.tech.psum_width) + xfer_s +
        lambda * (estimate_unit_energy(p, keep_on, platform.tech) + xfer_j);
    const double cost_move =
        estimate_unit_latency(p, move_to, platform.tech.psum_width) +
        lambda * estimate_unit_energy(p, move_to, platform.tech);

    if (cost_move < cost_keep) {
      m.accel_of[e.dst] = src_accel;
      m.phase_of[e.dst] = MapPhase::Remapped;
      remapped.insert(e.dst);
    }
  }
  return m;
}

}  // namespace mensa
