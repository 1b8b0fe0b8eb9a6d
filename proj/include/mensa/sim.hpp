// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "mensa/accel.hpp"
#include "mensa/common.hpp"
#include "mensa/dataflow.hpp"
#include "mensa/energy.hpp"
#include "mensa/graph.hpp"
#include "mensa/scheduler.hpp"

namespace mensa {

// Per-unit latency assuming perfect double-buffered overlap of compute and
// memory: max of the two, never the sum.
double unit_latency(const DataflowCost& c, const AcceleratorConfig& a);

struct TraceEntry {
  int unit_id = 0;
  LayerKind kind = LayerKind::Conv;
  std::string accel;
  double start_s = 0;
  double end_s = 0;
  u64 macs = 0;
  DataflowCost cost;
};

struct SimReport {
  std::string platform;
  double total_latency_s = 0;
  u64 total_macs = 0;
  double throughput_flops = 0;                // total FLOPs / total latency
  std::map<std::string, double> busy_s;       // per accelerator
  std::map<std::string, double> utilization;  // MACs / (PEs * f * latency)
  double avg_utilization = 0;                 // mean over all accelerators
  EnergyBreakdown energy;                     // platform-wide, static included
  double area_mm2 = 0;
  std::vector<TraceEntry> trace;              // ascending start time
};

struct SimOptions {
  bool hidden_refetch = false;
};

// List-scheduling event simulation of a lowered, validated graph under a
// total mapping. Each accelerator runs its units one at a time in
// topological order; cross-accelerator edges add DRAM-synchronized
// transfer latency and energy. Deterministic.
SimReport simulate(const LayerGraph& g, const Mapping& mapping,
                   const Platform& platform, const SimOptions& opts = {});

struct ComparisonEntry {
  std::string platform;
  SimReport report;
  // Ratios normalized to the first platform.
  double energy_reduction = 1;   // E_first / E_this
  double throughput_gain = 1;    // T_this / T_first
  double utilization_gain = 1;   // U_this / U_first
  double latency_speedup = 1;    // L_first / L_this
};

// Schedules (two-phase) and simulates the model on every platform;
// the graph is lowered and validated internally.
std::vector<ComparisonEntry> compare(const LayerGraph& g,
                                     const std::vector<Platform>& platforms,
                                     const SimOptions& opts = {},
                                     double lambda = 0.0);

// Full pipeline for one platform: lower, classify, schedule, simulate.
SimReport run_pipeline(const LayerGraph& g, const Platform& platform,
                       const SimOptions& opts = {}, double lambda = 0.0);

// The two-phase mapping for a lowered graph on a platform.
Mapping schedule(const LayerGraph& lowered, const Platform& platform,
                 double lambda = 0.0);

}  // namespace mensa
