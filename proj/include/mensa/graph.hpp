// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mensa/common.hpp"

namespace mensa {

enum class LayerKind {
  Conv,
  Depthwise,
  Pointwise,
  FullyConnected,
  LstmLayer,
  LstmGateUnit,
  LstmCellJoin,
};

const char* kind_name(LayerKind k);
LayerKind kind_from_name(const std::string& s);

struct ConvShape {
  i64 hi = 1, wi = 1, cin = 1, cout = 1, kh = 1, kw = 1, stride = 1, padding = 0;
};

struct FcShape {
  i64 in = 1, out = 1;
};

struct LstmShape {
  i64 d_in = 1, d_h = 1, timesteps = 1;  // gates are always 4
};

struct LstmGateShape {
  i64 d_in = 1, d_h = 1, timesteps = 1, timestep = 0, gate = 0;
};

struct LstmJoinShape {
  i64 d_h = 1, timestep = 0;
};

struct Layer {
  int id = 0;
  LayerKind kind = LayerKind::Conv;
  std::variant<ConvShape, FcShape, LstmShape, LstmGateShape, LstmJoinShape> shape;

  const ConvShape& conv() const { return std::get<ConvShape>(shape); }
  const FcShape& fc() const { return std::get<FcShape>(shape); }
  const LstmShape& lstm() const { return std::get<LstmShape>(shape); }
  const LstmGateShape& gate() const { return std::get<LstmGateShape>(shape); }
  const LstmJoinShape& join() const { return std::get<LstmJoinShape>(shape); }
};

struct Edge {
  int src = 0;
  int dst = 0;
  u64 act_bytes = 0;  // always equals the producer's output-activation footprint
};

// DAG of layers. Values are immutable once built; all operations below are
// pure and return fresh graphs.
struct LayerGraph {
  std::string name;
  u32 datum = 1;  // bytes per tensor element (8-bit quantized by default)
  std::vector<Layer> layers;
  std::vector<Edge> edges;

  const Layer* find(int id) const;
  const Layer& at(int id) const;
  bool has_lstm_layers() const;
};

// Parsing / canonical serialization of the JSON model schema.
LayerGraph parse_model(const std::string& text);
std::string serialize(const LayerGraph& g);

// Returns every invariant violation; empty means valid. Purely diagnostic.
std::vector<std::string> validate_graph(const LayerGraph& g);

// Throws ModelError listing the violations when the graph is invalid.
void require_valid(const LayerGraph& g);

// Kahn order with smallest-id tie break. Throws ModelError on cycles.
std::vector<int> topological_order(const LayerGraph& g);

// Replaces every LstmLayer with 4 gate units per timestep plus one
// cell-join per timestep, wiring intra-cell (gates -> join) and inter-cell
// (join -> next gates / next join) dependencies. Identity on graphs with
// no LstmLayer nodes.
LayerGraph lower_lstm(const LayerGraph& g);

enum class Archetype { Cnn, Lstm, Transducer, Rcnn };

const char* archetype_name(Archetype a);
Archetype archetype_from_name(const std::string& s);

struct SyntheticSpec {
  Archetype archetype = Archetype::Cnn;
  int depth = 1;
  u64 seed = 0;
  double scale = 1.0;
};

// Deterministic in (archetype, depth, seed, scale). The dimension palettes
// are fixed constants chosen so generated layers land in the five built-in
// cluster ranges; see synth.cpp.
LayerGraph generate_synthetic(const SyntheticSpec& spec);

}  // namespace mensa
