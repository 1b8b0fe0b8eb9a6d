// SPDX-License-Identifier: Apache-2.0
#include "mensa/dataflow.hpp"

#include <algorithm>

namespace mensa {

namespace {

u64 ceil_div(u64 a, u64 b) { return (a + b - 1) / b; }

bool conv_family(LayerKind k) {
  return k == LayerKind::Conv || k == LayerKind::Depthwise || k == LayerKind::Pointwise;
}

bool mvm_shaped(LayerKind k) {
  return k == LayerKind::FullyConnected || k == LayerKind::LstmGateUnit;
}

}  // namespace

ParamResidency full_fetch(const LayerProfile& p) { return {p.param_bytes}; }

bool dataflow_accepts(DataflowKind d, LayerKind k) {
  if (k == LayerKind::LstmLayer) return false;  // schedulable only after lowering
  switch (d) {
    case DataflowKind::BaselineSystolic:
      return true;
    case DataflowKind::AccelA:
      // Parameter-multicast/output-temporal-reduction needs parameter reuse
      // across output positions; MVM units have none.
      return conv_family(k);
    case DataflowKind::AccelB:
      return mvm_shaped(k) || k == LayerKind::LstmCellJoin;
    case DataflowKind::AccelC:
      // Parameter-stationary likewise presumes each parameter serves many
      // output elements.
      return conv_family(k);
  }
  throw InvariantError("unknown dataflow kind");
}

DataflowCost dataflow_cost(const LayerProfile& p, const AcceleratorConfig& a,
                           const ParamResidency& residency, u32 psum_width) {
  if (!dataflow_accepts(a.dataflow, p.kind))
    throw ModelError(std::string("unit ") + std::to_string(p.unit_id) + " (" +
                     kind_name(p.kind) + ") is incompatible with dataflow " +
                     dataflow_name(a.dataflow));

  const u64 n = a.pe_count();
  const u64 m = p.mac_count;
  const u64 pb = p.param_bytes;
  const u64 ain = p.in_act_bytes;
  const u64 aout_elems = std::max<u64>(1, p.out_act_elems());
  const u64 fetch = residency.dram_fetch_bytes;

  DataflowCost c;
  switch (a.dataflow) {
    case DataflowKind::BaselineSystolic: {
      // Weight-stationary array with spatial reduction: partial sums cross
      // the network once per MAC at accumulator width.
      c.dram_param_bytes = fetch;
      c.noc_param_bytes = fetch;
      c.noc_psum_bytes = m * psum_width;
      c.noc_act_bytes = ain * ceil_div(aout_elems, n);
      c.buf_param_accesses = fetch + pb;
      c.buf_act_accesses = ain + p.out_act_bytes;
      c.compute_cycles = ceil_div(m, n) + a.pe_rows + a.pe_cols;  // fill/drain
      break;
    }
    case DataflowKind::AccelA: {
      // Parameters multicast (counted once at injection); each PE owns one
      // output element and reduces temporally in its register file.
      c.dram_param_bytes = fetch;
      c.noc_param_bytes = pb;
      c.noc_psum_bytes = 0;
      c.noc_act_bytes = ain * ceil_div(aout_elems, n);
      c.buf_param_accesses = fetch + pb;
      c.buf_act_accesses = ain + p.out_act_bytes;
      c.rf_accesses = 2 * m;  // temporal reduction read+write
      const u64 passes = ceil_div(aout_elems, n);
      c.compute_cycles = passes * ceil_div(m, aout_elems);
      break;
    }
    case DataflowKind::AccelB: {
      // Decoupled MVM engine: parameters stream sequentially from DRAM into
      // per-PE register files and are reused across the cell batch; no
      // partial-sum traffic.
      c.dram_param_bytes = fetch;
      c.noc_param_bytes = fetch;
      c.noc_psum_bytes = 0;
      c.noc_act_bytes = ain;
      c.buf_act_accesses = ain + p.out_act_bytes;
      c.rf_accesses = 3 * m;  // psum read+write plus stationary operand read
      c.compute_cycles = ceil_div(m, n);
      c.sequential_dram = true;
      break;
    }
    case DataflowKind::AccelC: {
      // Parameter-stationary: each parameter placed once, PEs collaborate
      // on one output element, partial sums spatially reduced.
      c.dram_param_bytes = fetch;
      c.noc_param_bytes = pb;
      c.noc_psum_bytes = m * psum_width;
      c.noc_act_bytes = ain;
      c.buf_param_accesses = fetch + pb;
      c.buf_act_accesses = ain + p.out_act_bytes;
      c.rf_accesses = m;  // stationary operand read per MAC
      c.compute_cycles = ceil_div(m, n);
      break;
    }
  }
  return c;
}

i64 accel_b_batch_depth(const AcceleratorConfig& a, i64 timesteps, u32 datum,
                        u32 psum_width) {
  // Each PE dedicates one parameter slot and accumulates K partial sums.
  const i64 slots = (static_cast<i64>(a.pe_rf_bytes) - static_cast<i64>(datum)) /
                    static_cast<i64>(psum_width);
  return std::clamp<i64>(slots, 1, timesteps);
}

std::unordered_map<int, ParamResidency> plan_residency(
    const LayerGraph& g, const std::vector<LayerProfile>& profiles,
    const std::unordered_map<int, const AcceleratorConfig*>& accel_of,
    const ResidencyOptions& opts, u32 psum_width) {
  std::unordered_map<int, const LayerProfile*> by_id;
  for (const auto& p : profiles) by_id[p.unit_id] = &p;

  std::unordered_map<int, ParamResidency> out;
  for (const auto& l : g.layers) {
    const auto pit = by_id.find(l.id);
    const auto ait = accel_of.find(l.id);
    if (pit == by_id.end() || ait == accel_of.end())
      throw ModelError("residency plan: unit " + std::to_string(l.id) +
                       " lacks a profile or mapping");
    const LayerProfile& p = *pit->second;
    const AcceleratorConfig& a = *ait->second;
    ParamResidency r{p.param_bytes};

    if (l.kind == LayerKind::LstmGateUnit) {
      const LstmGateShape& s = l.gate();
      if (a.dataflow == DataflowKind::BaselineSystolic) {
        // All-or-nothing buffer residency over the 4-gate working set: when
        // it fits, only the first timestep touches DRAM; otherwise every
        // invocation refetches.
        const u64 working_set = 4 * p.param_bytes;
        if (working_set <= a.param_buffer_bytes)
          r.dram_fetch_bytes = s.timestep == 0 ? p.param_bytes : 0;
      } else if (a.dataflow == DataflowKind::AccelB) {
        if (4 * p.param_bytes <= a.param_buffer_bytes) {
          r.dram_fetch_bytes = s.timestep == 0 ? p.param_bytes : 0;
        } else {
          const i64 k = accel_b_batch_depth(a, s.timesteps, g.datum, psum_width);
          const bool batch_start = s.timestep % k == 0;
          const u64 px = static_cast<u64>(s.d_in) * s.d_h * g.datum;
          const u64 ph = static_cast<u64>(s.d_h) * s.d_h * g.datum;
          if (opts.hidden_refetch)
            r.dram_fetch_bytes = ph + (batch_start ? px : 0);
          else
            r.dram_fetch_bytes = batch_start ? px + ph : 0;
        }
      }
    }
    out.emplace(l.id, r);
  }
  return out;
}

u64 lstm_layer_param_traffic(const Layer& lstm, u32 datum,
                             const AcceleratorConfig& a, TrafficMode mode,
                             u32 psum_width) {
  if (lstm.kind != LayerKind::LstmLayer)
    throw ModelError("lstm_layer_param_traffic requires an LSTM layer");
  const LstmShape& s = lstm.lstm();
  const u64 gate_bytes =
      (static_cast<u64>(s.d_in) * s.d_h + static_cast<u64>(s.d_h) * s.d_h) * datum;
  const u64 footprint = 4 * gate_bytes;
  const u64 steps = static_cast<u64>(s.timesteps);

  // All four gates cycle every timestep, so the whole footprint must stay
  // resident for the buffer to help.
  const bool resident = footprint <= a.param_buffer_bytes;
  switch (mode) {
    case TrafficMode::Naive:
      return resident ? footprint : steps * footprint;
    case TrafficMode::Decoupled: {
      if (resident) return footprint;
      const i64 k = accel_b_batch_depth(a, s.timesteps, datum, psum_width);
      const u64 batches = ceil_div(steps, static_cast<u64>(k));
      return footprint * batches;
    }
  }
  throw InvariantError("unknown traffic mode");
}

Rational reuse_factor(const LayerProfile& p, ReuseVariant variant, u64 n_pes) {
  if (!conv_family(p.kind))
    throw ModelError("reuse_factor is defined for convolution-family units");
  if (n_pes < 1) throw ModelError("reuse_factor requires at least one PE");
  const u64 out_elems = p.out_act_elems();
  switch (variant) {
    case ReuseVariant::Replicated: return Rational::of(out_elems, n_pes);
    case ReuseVariant::Stationary: return Rational::of(out_elems, 1);
  }
  throw InvariantError("unknown reuse variant");
}

}  // namespace mensa
