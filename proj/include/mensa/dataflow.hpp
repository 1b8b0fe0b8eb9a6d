// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unordered_map>
#include <vector>

#include "mensa/accel.hpp"
#include "mensa/common.hpp"
#include "mensa/profile.hpp"

namespace mensa {

// Traffic counters and cycle count for one layer unit on one accelerator.
struct DataflowCost {
  u64 dram_param_bytes = 0;
  u64 dram_in_act_bytes = 0;
  u64 dram_out_act_bytes = 0;
  u64 noc_param_bytes = 0;
  u64 noc_psum_bytes = 0;
  u64 noc_act_bytes = 0;
  u64 buf_param_accesses = 0;
  u64 buf_act_accesses = 0;
  u64 rf_accesses = 0;
  u64 compute_cycles = 0;
  bool sequential_dram = false;

  u64 dram_total_bytes() const {
    return dram_param_bytes + dram_in_act_bytes + dram_out_act_bytes;
  }
};

// Parameter bytes this invocation must pull from DRAM. Fewer than the full
// footprint when an earlier invocation left the parameters resident
// (baseline buffer residency, Accel-B register-file batching).
struct ParamResidency {
  u64 dram_fetch_bytes = 0;
};

ParamResidency full_fetch(const LayerProfile& p);

bool dataflow_accepts(DataflowKind d, LayerKind k);

// Analytical per-unit cost under the accelerator's dataflow. Throws
// ModelError for incompatible kind/dataflow pairings.
DataflowCost dataflow_cost(const LayerProfile& p, const AcceleratorConfig& a,
                           const ParamResidency& residency, u32 psum_width = 4);

struct ResidencyOptions {
  // Force the hidden-matrix half of each gate to re-stream every timestep
  // instead of being held across the register-file batch.
  bool hidden_refetch = false;
};

// Register-file batch depth for gate units on Accel-B: how many timesteps
// accumulate partial sums concurrently before parameters re-stream.
i64 accel_b_batch_depth(const AcceleratorConfig& a, i64 timesteps, u32 datum,
                        u32 psum_width);

// Residency for every unit of a lowered graph given its mapping.
std::unordered_map<int, ParamResidency> plan_residency(
    const LayerGraph& g, const std::vector<LayerProfile>& profiles,
    const std::unordered_map<int, const AcceleratorConfig*>& accel_of,
    const ResidencyOptions& opts = {}, u32 psum_width = 4);

enum class TrafficMode { Naive, Decoupled };

// Off-chip parameter traffic of one (pre-lowering) LSTM layer across all
// timesteps: Naive applies the baseline buffer-residency rule per timestep;
// Decoupled fetches each matrix once per register-file batch.
u64 lstm_layer_param_traffic(const Layer& lstm, u32 datum,
                             const AcceleratorConfig& a, TrafficMode mode,
                             u32 psum_width = 4);

enum class ReuseVariant { Replicated, Stationary };

// Per-parameter temporal reuse factor of the parameter-stationary dataflow
// versus the rejected replicated variant.
Rational reuse_factor(const LayerProfile& p, ReuseVariant variant, u64 n_pes);

}  // namespace mensa
