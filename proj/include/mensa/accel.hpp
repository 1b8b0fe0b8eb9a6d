// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "mensa/cluster.hpp"
#include "mensa/common.hpp"

namespace mensa {

enum class Placement { OnChip, NearData };
enum class DataflowKind { BaselineSystolic, AccelA, AccelB, AccelC };

const char* placement_name(Placement p);
Placement placement_from_name(const std::string& s);
const char* dataflow_name(DataflowKind d);
DataflowKind dataflow_from_name(const std::string& s);

struct AcceleratorConfig {
  std::string name;
  u32 pe_rows = 1;
  u32 pe_cols = 1;
  double frequency_hz = 1;
  u64 param_buffer_bytes = 0;
  u64 act_buffer_bytes = 0;
  u64 pe_rf_bytes = 0;  // per-PE register file
  double dram_bandwidth = 1;  // bytes/s
  Placement placement = Placement::OnChip;
  DataflowKind dataflow = DataflowKind::BaselineSystolic;

  u64 pe_count() const { return static_cast<u64>(pe_rows) * pe_cols; }
  // Total on-chip SRAM, register files included (used for leakage/area).
  u64 sram_bytes() const {
    return param_buffer_bytes + act_buffer_bytes + pe_rf_bytes * pe_count();
  }
};

// FLOP/s with the FLOP == MAC convention.
double peak_throughput(const AcceleratorConfig& a);

struct BufferEnergyRow {
  u64 capacity_bytes = 0;
  double joules_per_byte = 0;
};

struct BufferAreaRow {
  u64 capacity_bytes = 0;
  double mm2_per_kb = 0;
};

// Energy/area coefficients. Defaults are documented stand-ins, fully
// config-overridable; none are measurements.
struct TechnologyTable {
  double e_mac = 1.6e-12;          // J per 8-bit MAC (0.2 pJ/bit * 8)
  double e_dram = 32e-12;          // J per DRAM byte
  double e_offchip_link = 8e-12;   // J per byte over the off-chip link
  double e_noc = 0.5e-12;          // J per on-chip network byte
  std::vector<BufferEnergyRow> buffer_energy = {
      {32 * KiB, 0.3e-12}, {128 * KiB, 0.5e-12}, {2 * MiB, 1.5e-12}, {4 * MiB, 2.0e-12}};
  double leak_w_per_pe = 0.2e-6;
  double leak_w_per_kb = 1.5e-6;
  u32 psum_width = 4;              // 32-bit accumulators
  double area_mm2_per_pe = 0.01;
  std::vector<BufferAreaRow> buffer_area = {{1, 0.03}};
  double near_data_dram_scale = 0.5;  // e_dram factor inside the stack
  bool clamp_outside_rows = true;     // false: capacities outside rows error
};

// Per-byte access energy of a buffer of the given capacity, interpolated
// piecewise-linearly between rows. Capacities outside the table clamp to
// the nearest row unless clamping is disabled.
double buffer_access_energy(const TechnologyTable& t, u64 capacity_bytes);

struct Platform {
  std::string name;
  std::vector<AcceleratorConfig> accelerators;
  TechnologyTable tech;
  std::map<int, std::string> routing;  // cluster id -> accelerator name
  std::vector<ClusterRange> cluster_ranges;  // empty: use the built-ins

  const AcceleratorConfig& accel(const std::string& name) const;
  std::span<const ClusterRange> ranges() const;
};

// PE array plus on-chip memory (buffers and register files).
double area_mm2(const AcceleratorConfig& a, const TechnologyTable& t);
double area_mm2(const Platform& p);

Platform baseline_platform();
Platform base_hb_platform();
Platform mensa_platform();

// Named built-ins: "baseline", "base-hb", "mensa".
Platform builtin_platform(const std::string& name);

Platform parse_platform(const std::string& json_text);
std::string serialize(const Platform& p);
TechnologyTable parse_technology(const std::string& json_text);

}  // namespace mensa
