// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mensa/graph.hpp"
#include "mensa/profile.hpp"

namespace mensa {

const char* archetype_name(Archetype a) {
  switch (a) {
    case Archetype::Cnn: return "cnn";
    case Archetype::Lstm: return "lstm";
    case Archetype::Transducer: return "transducer";
    case Archetype::Rcnn: return "rcnn";
  }
  throw InvariantError("unknown archetype");
}

Archetype archetype_from_name(const std::string& s) {
  if (s == "cnn") return Archetype::Cnn;
  if (s == "lstm") return Archetype::Lstm;
  if (s == "transducer") return Archetype::Transducer;
  if (s == "rcnn") return Archetype::Rcnn;
  throw ParseError("unknown archetype '" + s + "'");
}

namespace {

// Fixed dimension palettes. Each variant is calibrated to land inside one
// of the five built-in cluster ranges at scale 1 (footprint in bytes,
// parameter FLOP/byte, MAC count); see cluster.cpp for the ranges.
struct ConvVariant {
  LayerKind kind;
  i64 hi, wi, cin, cout, kh, kw, stride, padding;
};

// Cluster 1: early standard convolutions, shallow channels, large spatial.
constexpr ConvVariant kC1[] = {
    {LayerKind::Conv, 112, 112, 32, 32, 3, 3, 1, 1},
    {LayerKind::Conv, 56, 56, 64, 64, 3, 3, 1, 1},
    {LayerKind::Conv, 56, 56, 96, 48, 3, 3, 1, 1},
};

// Cluster 2: pointwise / mid-network convolutions, moderate reuse.
constexpr ConvVariant kC2[] = {
    {LayerKind::Pointwise, 14, 14, 512, 512, 1, 1, 1, 0},
    {LayerKind::Pointwise, 14, 14, 960, 512, 1, 1, 1, 0},
    {LayerKind::Pointwise, 14, 14, 768, 384, 1, 1, 1, 0},
};

// Cluster 4: late standard convolutions, deep channels, small spatial.
constexpr ConvVariant kC4[] = {
    {LayerKind::Conv, 6, 6, 256, 256, 3, 3, 1, 1},
    {LayerKind::Conv, 5, 5, 320, 256, 3, 3, 1, 1},
};

// Cluster 5: depthwise convolutions, almost no activation reuse.
constexpr ConvVariant kC5[] = {
    {LayerKind::Depthwise, 14, 14, 960, 960, 3, 3, 1, 1},
    {LayerKind::Depthwise, 14, 14, 512, 512, 3, 3, 1, 1},
    {LayerKind::Depthwise, 7, 7, 1280, 1280, 3, 3, 1, 1},
};

// Cluster 3: fully-connected heads.
constexpr std::pair<i64, i64> kFc[] = {{1280, 1000}, {1024, 1280}, {1536, 1000}};

// LSTM hidden sizes whose gates (2*d^2 bytes) sit inside the cluster 3
// footprint band.
constexpr i64 kLstmDims[] = {768, 1000, 1280, 1536, 2000};
constexpr i64 kLstmSteps[] = {16, 24, 32, 48};

// Conv slots of the CNN chain, in network order; the final layer is always
// a fully-connected head.
constexpr int kCnnPattern[] = {1, 1, 5, 2, 5, 2, 4, 5, 2, 4, 1};

i64 scaled(i64 v, double scale) {
  if (scale == 1.0) return v;
  return std::max<i64>(1, static_cast<i64>(std::llround(static_cast<double>(v) * scale)));
}

Layer make_conv(int id, const ConvVariant& v, double scale) {
  Layer l;
  l.id = id;
  l.kind = v.kind;
  ConvShape s;
  s.hi = v.hi;
  s.wi = v.wi;
  s.cin = scaled(v.cin, scale);
  s.cout = v.kind == LayerKind::Depthwise ? s.cin : scaled(v.cout, scale);
  s.kh = v.kh;
  s.kw = v.kw;
  s.stride = v.stride;
  s.padding = v.padding;
  l.shape = s;
  return l;
}

Layer make_fc(int id, i64 in, i64 out, double scale) {
  Layer l;
  l.id = id;
  l.kind = LayerKind::FullyConnected;
  l.shape = FcShape{scaled(in, scale), scaled(out, scale)};
  return l;
}

Layer make_lstm(int id, i64 d_in, i64 d_h, i64 steps, double scale) {
  Layer l;
  l.id = id;
  l.kind = LayerKind::LstmLayer;
  l.shape = LstmShape{scaled(d_in, scale), scaled(d_h, scale), steps};
  return l;
}

template <typename T, size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
  return arr[rng() % N];
}

void chain(LayerGraph& g, int from, int to) {
  Edge e;
  e.src = from;
  e.dst = to;
  e.act_bytes = out_act_bytes(g.at(from), g.datum);
  g.edges.push_back(e);
}

void append_conv_slot(LayerGraph& g, std::mt19937_64& rng, int slot, int id, double scale) {
  switch (slot) {
    case 1: g.layers.push_back(make_conv(id, pick(rng, kC1), scale)); break;
    case 2: g.layers.push_back(make_conv(id, pick(rng, kC2), scale)); break;
    case 4: g.layers.push_back(make_conv(id, pick(rng, kC4), scale)); break;
    case 5: g.layers.push_back(make_conv(id, pick(rng, kC5), scale)); break;
    default: throw InvariantError("bad palette slot");
  }
}

LayerGraph gen_cnn(const SyntheticSpec& spec, std::mt19937_64& rng) {
  LayerGraph g;
  for (int i = 0; i < spec.depth; ++i) {
    if (i == spec.depth - 1 && spec.depth > 1) {
      const auto [in, out] = pick(rng, kFc);
      g.layers.push_back(make_fc(i, in, out, spec.scale));
    } else {
      append_conv_slot(g, rng, kCnnPattern[i % 11], i, spec.scale);
    }
    if (i > 0) chain(g, i - 1, i);
  }
  return g;
}

LayerGraph gen_lstm(const SyntheticSpec& spec, std::mt19937_64& rng) {
  LayerGraph g;
  const i64 d = pick(rng, kLstmDims);
  const i64 steps = pick(rng, kLstmSteps);
  for (int i = 0; i < spec.depth; ++i) {
    g.layers.push_back(make_lstm(i, d, d, steps, spec.scale));
    if (i > 0) chain(g, i - 1, i);
  }
  return g;
}

LayerGraph gen_transducer(const SyntheticSpec& spec, std::mt19937_64& rng) {
  LayerGraph g;
  // Three stacked-LSTM blocks feeding one fully-connected joint. The joint
  // sizing is a fixed convention of this generator, not a modeling claim.
  const int total = std::max(spec.depth, 3);
  const int per_block = total / 3;
  const int sizes[3] = {total - 2 * per_block, per_block, per_block};
  const i64 steps = pick(rng, kLstmSteps);
  int id = 0;
  std::vector<int> block_tails;
  i64 joint_in = 0;
  for (int b = 0; b < 3; ++b) {
    const i64 d = pick(rng, kLstmDims);
    for (int i = 0; i < sizes[b]; ++i) {
      g.layers.push_back(make_lstm(id, d, d, steps, spec.scale));
      if (i > 0) chain(g, id - 1, id);
      ++id;
    }
    block_tails.push_back(id - 1);
    joint_in += scaled(d, spec.scale);
  }
  g.layers.push_back(make_fc(id, joint_in, 640, spec.scale));
  for (int tail : block_tails) chain(g, tail, id);
  return g;
}

LayerGraph gen_rcnn(const SyntheticSpec& spec, std::mt19937_64& rng) {
  LayerGraph g;
  const int convs = std::max(1, (spec.depth + 1) / 2);
  const int lstms = std::max(1, spec.depth - convs);
  const i64 d = pick(rng, kLstmDims);
  const i64 steps = pick(rng, kLstmSteps);
  int id = 0;
  for (int i = 0; i < convs; ++i) {
    append_conv_slot(g, rng, kCnnPattern[i % 11], id, spec.scale);
    if (i > 0) chain(g, id - 1, id);
    ++id;
  }
  for (int i = 0; i < lstms; ++i) {
    g.layers.push_back(make_lstm(id, d, d, steps, spec.scale));
    chain(g, id - 1, id);
    ++id;
  }
  return g;
}

}  // namespace

LayerGraph generate_synthetic(const SyntheticSpec& spec) {
  if (spec.depth < 1) throw ModelError("synthetic depth must be >= 1");
  if (!(spec.scale > 0)) throw ModelError("synthetic scale must be > 0");

  std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL +
                      static_cast<u64>(spec.archetype));
  LayerGraph g;
  switch (spec.archetype) {
    case Archetype::Cnn: g = gen_cnn(spec, rng); break;
    case Archetype::Lstm: g = gen_lstm(spec, rng); break;
    case Archetype::Transducer: g = gen_transducer(spec, rng); break;
    case Archetype::Rcnn: g = gen_rcnn(spec, rng); break;
  }
  g.name = std::string(archetype_name(spec.archetype)) + "-d" +
           std::to_string(spec.depth) + "-s" + std::to_string(spec.seed);
  g.datum = 1;
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  require_valid(g);
  return g;
}

}  // namespace mensa
