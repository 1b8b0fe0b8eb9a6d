// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "mensa/accel.hpp"
#include "mensa/common.hpp"
#include "mensa/dataflow.hpp"

namespace mensa {

struct EnergyBreakdown {
  double pe_dynamic = 0;
  double buffer_dynamic = 0;
  double noc_dynamic = 0;
  double dram_dynamic = 0;
  double offchip_link = 0;
  double static_total = 0;
  double total = 0;  // always the sum of the six components

  void retotal() {
    total = pe_dynamic + buffer_dynamic + noc_dynamic + dram_dynamic +
            offchip_link + static_total;
  }
  EnergyBreakdown& operator+=(const EnergyBreakdown& o);
};

// Dynamic energy of one unit invocation; static energy is charged globally.
EnergyBreakdown layer_energy(const DataflowCost& c, u64 macs,
                             const AcceleratorConfig& a, const TechnologyTable& t);

// Leakage over the full inference horizon, per accelerator. Idle
// accelerators leak for the whole horizon too.
std::map<std::string, double> static_energy(const Platform& p, double horizon_s);

double leakage_watts(const AcceleratorConfig& a, const TechnologyTable& t);

// min(peak, ai * bandwidth): the classic throughput roofline.
double roofline_throughput(double ai_flop_per_byte, const AcceleratorConfig& a);

// FLOP/J at a given arithmetic intensity: 1 / (e_mac + memory energy per
// FLOP). Smooth in ai, bounded above by 1/e_mac. Throws on ai <= 0.
double roofline_energy_efficiency(double ai_flop_per_byte, const TechnologyTable& t);

}  // namespace mensa
