// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "mensa/common.hpp"
#include "mensa/graph.hpp"

namespace mensa {

// Per-unit metrics. One FLOP is one MAC throughout; this makes the
// parameter intensity of every MVM-shaped unit exactly one.
struct LayerProfile {
  int unit_id = 0;
  LayerKind kind = LayerKind::Conv;
  u64 mac_count = 0;
  u64 param_bytes = 0;
  u64 in_act_bytes = 0;
  u64 out_act_bytes = 0;
  u32 datum = 1;
  Rational param_intensity;  // mac_count / param_bytes, exact
  Rational act_intensity;    // mac_count / (in + out activation bytes)

  u64 out_act_elems() const { return out_act_bytes / datum; }
};

// Output spatial dims of a convolution-family shape. Throws ModelError when
// the kernel does not fit the padded input.
std::pair<i64, i64> output_dims(const ConvShape& s);

u64 mac_count(const Layer& l);
u64 param_bytes(const Layer& l, u32 datum);
u64 in_act_bytes(const Layer& l, u32 datum);
u64 out_act_bytes(const Layer& l, u32 datum);

LayerProfile layer_profile(const Layer& l, u32 datum);

struct ModelSummary {
  std::vector<LayerProfile> profiles;  // one per layer, graph order
  u64 total_macs = 0;
  u64 total_param_bytes = 0;
  u64 total_in_act_bytes = 0;
  u64 total_out_act_bytes = 0;
};

ModelSummary model_summary(const LayerGraph& g);

}  // namespace mensa
