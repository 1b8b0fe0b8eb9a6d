// SPDX-License-Identifier: Apache-2.0
#include "mensa/profile.hpp"

namespace mensa {

std::pair<i64, i64> output_dims(const ConvShape& s) {
  if (s.hi + 2 * s.padding < s.kh || s.wi + 2 * s.padding < s.kw)
    throw ModelError("kernel larger than padded input");
  const i64 ho = (s.hi + 2 * s.padding - s.kh) / s.stride + 1;
  const i64 wo = (s.wi + 2 * s.padding - s.kw) / s.stride + 1;
  return {ho, wo};
}

u64 mac_count(const Layer& l) {
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Pointwise: {
      const ConvShape& s = l.conv();
      const auto [ho, wo] = output_dims(s);
      return static_cast<u64>(ho) * wo * s.cout * s.kh * s.kw * s.cin;
    }
    case LayerKind::Depthwise: {
      const ConvShape& s = l.conv();
      const auto [ho, wo] = output_dims(s);
      return static_cast<u64>(ho) * wo * s.cin * s.kh * s.kw;
    }
    case LayerKind::FullyConnected:
      return static_cast<u64>(l.fc().in) * l.fc().out;
    case LayerKind::LstmGateUnit: {
      const LstmGateShape& s = l.gate();
      return static_cast<u64>(s.d_in) * s.d_h + static_cast<u64>(s.d_h) * s.d_h;
    }
    case LayerKind::LstmCellJoin:
      // Elementwise gate combination; 3*d_h multiplies keeps the unit's
      // cost negligible next to the gate MVMs.
      return 3 * static_cast<u64>(l.join().d_h);
    case LayerKind::LstmLayer: {
      const LstmShape& s = l.lstm();
      const u64 gate = static_cast<u64>(s.d_in) * s.d_h + static_cast<u64>(s.d_h) * s.d_h;
      return static_cast<u64>(s.timesteps) * (4 * gate + 3 * static_cast<u64>(s.d_h));
    }
  }
  throw InvariantError("unknown layer kind");
}

u64 param_bytes(const Layer& l, u32 datum) {
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Pointwise: {
      const ConvShape& s = l.conv();
      return static_cast<u64>(s.kh) * s.kw * s.cin * s.cout * datum;
    }
    case LayerKind::Depthwise: {
      const ConvShape& s = l.conv();
      return static_cast<u64>(s.kh) * s.kw * s.cin * datum;
    }
    case LayerKind::FullyConnected:
      return static_cast<u64>(l.fc().in) * l.fc().out * datum;
    case LayerKind::LstmGateUnit: {
      const LstmGateShape& s = l.gate();
      return (static_cast<u64>(s.d_in) * s.d_h + static_cast<u64>(s.d_h) * s.d_h) * datum;
    }
    case LayerKind::LstmCellJoin:
      // Cell-state vector read + write is the join's streamed operand.
      return 2 * static_cast<u64>(l.join().d_h) * datum;
    case LayerKind::LstmLayer: {
      const LstmShape& s = l.lstm();
      return 4 * (static_cast<u64>(s.d_in) * s.d_h + static_cast<u64>(s.d_h) * s.d_h) *
             datum;
    }
  }
  throw InvariantError("unknown layer kind");
}

u64 in_act_bytes(const Layer& l, u32 datum) {
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Depthwise:
    case LayerKind::Pointwise: {
      const ConvShape& s = l.conv();
      return static_cast<u64>(s.hi) * s.wi * s.cin * datum;
    }
    case LayerKind::FullyConnected:
      return static_cast<u64>(l.fc().in) * datum;
    case LayerKind::LstmGateUnit: {
      const LstmGateShape& s = l.gate();
      return (static_cast<u64>(s.d_in) + static_cast<u64>(s.d_h)) * datum;
    }
    case LayerKind::LstmCellJoin:
      return 4 * static_cast<u64>(l.join().d_h) * datum;
    case LayerKind::LstmLayer: {
      const LstmShape& s = l.lstm();
      return (static_cast<u64>(s.timesteps) * s.d_in + static_cast<u64>(s.d_h)) * datum;
    }
  }
  throw InvariantError("unknown layer kind");
}

u64 out_act_bytes(const Layer& l, u32 datum) {
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Pointwise: {
      const ConvShape& s = l.conv();
      const auto [ho, wo] = output_dims(s);
      return static_cast<u64>(ho) * wo * s.cout * datum;
    }
    case LayerKind::Depthwise: {
      const ConvShape& s = l.conv();
      const auto [ho, wo] = output_dims(s);
      return static_cast<u64>(ho) * wo * s.cin * datum;
    }
    case LayerKind::FullyConnected:
      return static_cast<u64>(l.fc().out) * datum;
    case LayerKind::LstmGateUnit:
      return static_cast<u64>(l.gate().d_h) * datum;
    case LayerKind::LstmCellJoin:
      return static_cast<u64>(l.join().d_h) * datum;
    case LayerKind::LstmLayer: {
      const LstmShape& s = l.lstm();
      return static_cast<u64>(s.timesteps) * s.d_h * datum;
    }
  }
  throw InvariantError("unknown layer kind");
}

LayerProfile layer_profile(const Layer& l, u32 datum) {
  LayerProfile p;
  p.unit_id = l.id;
  p.kind = l.kind;
  p.datum = datum;
  p.mac_count = mac_count(l);
  p.param_bytes = param_bytes(l, datum);
  p.in_act_bytes = in_act_bytes(l, datum);
  p.out_act_bytes = out_act_bytes(l, datum);
  p.param_intensity = Rational::of(p.mac_count, p.param_bytes);
  p.act_intensity = Rational::of(p.mac_count, p.in_act_bytes + p.out_act_bytes);
  return p;
}

ModelSummary model_summary(const LayerGraph& g) {
  ModelSummary s;
  s.profiles.reserve(g.layers.size());
  for (const auto& l : g.layers) {
    LayerProfile p = layer_profile(l, g.datum);
    s.total_macs += p.mac_count;
    s.total_param_bytes += p.param_bytes;
    s.total_in_act_bytes += p.in_act_bytes;
    s.total_out_act_bytes += p.out_act_bytes;
    s.profiles.push_back(std::move(p));
  }
  return s;
}

}  // namespace mensa
