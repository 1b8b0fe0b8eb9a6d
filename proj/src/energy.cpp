// SPDX-License-Identifier: Apache-2.0
#include "mensa/energy.hpp"

#include <algorithm>

namespace mensa {

EnergyBreakdown& EnergyBreakdown::operator+=(const EnergyBreakdown& o) {
  pe_dynamic += o.pe_dynamic;
  buffer_dynamic += o.buffer_dynamic;
  noc_dynamic += o.noc_dynamic;
  dram_dynamic += o.dram_dynamic;
  offchip_link += o.offchip_link;
  static_total += o.static_total;
  retotal();
  return *this;
}

EnergyBreakdown layer_energy(const DataflowCost& c, u64 macs,
                             const AcceleratorConfig& a, const TechnologyTable& t) {
  EnergyBreakdown e;
  e.pe_dynamic = static_cast<double>(macs) * t.e_mac;

  const double dram_bytes = static_cast<double>(c.dram_total_bytes());
  const bool near = a.placement == Placement::NearData;
  e.dram_dynamic = dram_bytes * t.e_dram * (near ? t.near_data_dram_scale : 1.0);
  e.offchip_link = near ? 0.0 : dram_bytes * t.e_offchip_link;

  e.noc_dynamic =
      static_cast<double>(c.noc_param_bytes + c.noc_psum_bytes + c.noc_act_bytes) *
      t.e_noc;

  double buf = 0;
  if (c.buf_param_accesses > 0)
    buf += static_cast<double>(c.buf_param_accesses) *
           buffer_access_energy(t, a.param_buffer_bytes);
  if (c.buf_act_accesses > 0)
    buf += static_cast<double>(c.buf_act_accesses) *
           buffer_access_energy(t, a.act_buffer_bytes);
  if (c.rf_accesses > 0)
    buf += static_cast<double>(c.rf_accesses) * buffer_access_energy(t, a.pe_rf_bytes);
  e.buffer_dynamic = buf;

  e.static_total = 0;
  e.retotal();
  return e;
}

double leakage_watts(const AcceleratorConfig& a, const TechnologyTable& t) {
  const double pe_leak = static_cast<double>(a.pe_count()) * t.leak_w_per_pe;
  const double sram_kb = static_cast<double>(a.sram_bytes()) / 1024.0;
  return pe_leak + sram_kb * t.leak_w_per_kb;
}

std::map<std::string, double> static_energy(const Platform& p, double horizon_s) {
  if (horizon_s < 0) throw ModelError("static_energy horizon must be >= 0");
  std::map<std::string, double> out;
  for (const auto& a : p.accelerators)
    out[a.name] = leakage_watts(a, p.tech) * horizon_s;
  return out;
}

double roofline_throughput(double ai_flop_per_byte, const AcceleratorConfig& a) {
  if (ai_flop_per_byte < 0) throw ModelError("arithmetic intensity must be >= 0");
  return std::min(peak_throughput(a), ai_flop_per_byte * a.dram_bandwidth);
}

double roofline_energy_efficiency(double ai_flop_per_byte, const TechnologyTable& t) {
  if (!(ai_flop_per_byte > 0))
    throw ModelError("energy roofline requires arithmetic intensity > 0");
  return 1.0 / (t.e_mac + (t.e_dram + t.e_offchip_link) / ai_flop_per_byte);
}

}  // namespace mensa
