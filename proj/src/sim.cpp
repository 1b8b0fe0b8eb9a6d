// SPDX-License-Identifier: Apache-2.0
#include "mensa/sim.hpp"

#include <algorithm>
#include <unordered_map>

#include "mensa/cluster.hpp"
#include "mensa/profile.hpp"

namespace mensa {

double unit_latency(const DataflowCost& c, const AcceleratorConfig& a) {
  const double compute_s = static_cast<double>(c.compute_cycles) / a.frequency_hz;
  const double memory_s =
      static_cast<double>(c.dram_total_bytes()) / a.dram_bandwidth;
  return std::max(compute_s, memory_s);
}

SimReport simulate(const LayerGraph& g, const Mapping& mapping,
                   const Platform& platform, const SimOptions& opts) {
  require_valid(g);
  if (g.has_lstm_layers())
    throw ModelError("simulate requires a lowered graph (run lower_lstm first)");
  if (!mapping.total_over(g)) throw ModelError("mapping is not total");

  std::unordered_map<int, const AcceleratorConfig*> accel_of;
  for (const auto& l : g.layers) {
    const AcceleratorConfig& a = platform.accel(mapping.at(l.id));
    if (!dataflow_accepts(a.dataflow, l.kind))
      throw ModelError("unit " + std::to_string(l.id) + " (" + kind_name(l.kind) +
                       ") mapped to incompatible dataflow " +
                       dataflow_name(a.dataflow));
    accel_of[l.id] = &a;
  }

  std::vector<LayerProfile> profiles;
  profiles.reserve(g.layers.size());
  std::unordered_map<int, const LayerProfile*> prof;
  for (const auto& l : g.layers) profiles.push_back(layer_profile(l, g.datum));
  for (const auto& p : profiles) prof[p.unit_id] = &p;

  const auto residency = plan_residency(g, profiles, accel_of,
                                        ResidencyOptions{opts.hidden_refetch},
                                        platform.tech.psum_width);

  std::unordered_map<int, std::vector<const Edge*>> preds;
  for (const auto& e : g.edges) preds[e.dst].push_back(&e);

  SimReport r;
  r.platform = platform.name;

  // Units in topological order (ids break ties); each accelerator serves
  // its queue in exactly this order.
  std::unordered_map<std::string, double> free_at;
  for (const auto& a : platform.accelerators) free_at[a.name] = 0;

  std::unordered_map<int, double> end_at;
  EnergyBreakdown energy;

  for (const int id : topological_order(g)) {
    const Layer& l = g.at(id);
    const LayerProfile& p = *prof.at(id);
    const AcceleratorConfig& a = *accel_of.at(id);

    const DataflowCost cost =
        dataflow_cost(p, a, residency.at(id), platform.tech.psum_width);
    const double lat = unit_latency(cost, a);

    double ready = 0;
    for (const Edge* e : preds[id]) {
      const AcceleratorConfig& src = *accel_of.at(e->src);
      const auto [xfer_s, xfer_j] = transfer_cost(e->act_bytes, src, a, platform.tech);
      ready = std::max(ready, end_at.at(e->src) + xfer_s);
      // DRAM-synchronized hand-off: two DRAM trips plus link energy per
      // on-chip endpoint.
      EnergyBreakdown xe;
      const double b = static_cast<double>(e->act_bytes);
      if (src.name != a.name && e->act_bytes > 0) {
        xe.dram_dynamic = 2.0 * b * platform.tech.e_dram;
        xe.offchip_link = xfer_j - xe.dram_dynamic;
        xe.retotal();
        energy += xe;
      }
    }

    const double start = std::max(free_at.at(a.name), ready);
    const double end = start + lat;
    free_at[a.name] = end;
    end_at[id] = end;

    energy += layer_energy(cost, p.mac_count, a, platform.tech);
    r.total_macs += p.mac_count;

    TraceEntry t;
    t.unit_id = id;
    t.kind = l.kind;
    t.accel = a.name;
    t.start_s = start;
    t.end_s = end;
    t.macs = p.mac_count;
    t.cost = cost;
    r.trace.push_back(t);

    r.busy_s[a.name] += lat;
    r.total_latency_s = std::max(r.total_latency_s, end);
  }

  std::sort(r.trace.begin(), r.trace.end(), [](const TraceEntry& a, const TraceEntry& b) {
    return a.start_s != b.start_s ? a.start_s < b.start_s : a.unit_id < b.unit_id;
  });

  // Leakage is charged to every accelerator over the whole inference, idle
  // ones included.
  for (const auto& [name, joules] : static_energy(platform, r.total_latency_s)) {
    (void)name;
    EnergyBreakdown st;
    st.static_total = joules;
    st.retotal();
    energy += st;
  }
  r.energy = energy;

  std::unordered_map<std::string, u64> macs_on;
  for (const auto& t : r.trace) macs_on[t.accel] += t.macs;
  double util_sum = 0;
  for (const auto& a : platform.accelerators) {
    const double denom = peak_throughput(a) * r.total_latency_s;
    const double u = denom > 0 ? static_cast<double>(macs_on[a.name]) / denom : 0.0;
    r.utilization[a.name] = u;
    r.busy_s.try_emplace(a.name, 0.0);
    util_sum += u;
  }
  r.avg_utilization = util_sum / static_cast<double>(platform.accelerators.size());
  r.throughput_flops =
      r.total_latency_s > 0 ? static_cast<double>(r.total_macs) / r.total_latency_s : 0;
  r.area_mm2 = area_mm2(platform);
  return r;
}

Mapping schedule(const LayerGraph& lowered, const Platform& platform, double lambda) {
  std::vector<LayerProfile> profiles;
  std::vector<ClusterAssignment> assignments;
  profiles.reserve(lowered.layers.size());
  for (const auto& l : lowered.layers) {
    profiles.push_back(layer_profile(l, lowered.datum));
    assignments.push_back(classify(profiles.back(), platform.ranges()));
  }
  const Mapping m1 = phase1_map(profiles, assignments, platform);
  return phase2_adjust(m1, lowered, profiles, platform, lambda);
}

SimReport run_pipeline(const LayerGraph& g, const Platform& platform,
                       const SimOptions& opts, double lambda) {
  require_valid(g);
  const LayerGraph lowered = lower_lstm(g);
  const Mapping m = schedule(lowered, platform, lambda);
  return simulate(lowered, m, platform, opts);
}

std::vector<ComparisonEntry> compare(const LayerGraph& g,
                                     const std::vector<Platform>& platforms,
                                     const SimOptions& opts, double lambda) {
  if (platforms.size() < 2)
    throw ModelError("compare requires at least two platforms");
  std::vector<ComparisonEntry> out;
  for (const auto& p : platforms) {
    ComparisonEntry e;
    e.platform = p.name;
    e.report = run_pipeline(g, p, opts, lambda);
    out.push_back(std::move(e));
  }
  const SimReport& base = out.front().report;
  for (auto& e : out) {
    e.energy_reduction = base.energy.total / e.report.energy.total;
    e.throughput_gain = e.report.throughput_flops / base.throughput_flops;
    e.utilization_gain = e.report.avg_utilization / base.avg_utilization;
    e.latency_speedup = base.total_latency_s / e.report.total_latency_s;
  }
  return out;
}

}  // namespace mensa
