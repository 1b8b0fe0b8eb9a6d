// SPDX-License-Identifier: Apache-2.0
#include "mensa/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mensa/profile.hpp"

namespace mensa {

using json = nlohmann::json;

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Depthwise: return "depthwise";
    case LayerKind::Pointwise: return "pointwise";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::LstmLayer: return "lstm";
    case LayerKind::LstmGateUnit: return "lstm_gate";
    case LayerKind::LstmCellJoin: return "lstm_join";
  }
  throw InvariantError("unknown layer kind");
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "depthwise") return LayerKind::Depthwise;
  if (s == "pointwise") return LayerKind::Pointwise;
  if (s == "fc") return LayerKind::FullyConnected;
  if (s == "lstm") return LayerKind::LstmLayer;
  if (s == "lstm_gate") return LayerKind::LstmGateUnit;
  if (s == "lstm_join") return LayerKind::LstmCellJoin;
  throw ParseError("unknown layer kind '" + s + "'");
}

const Layer* LayerGraph::find(int id) const {
  for (const auto& l : layers)
    if (l.id == id) return &l;
  return nullptr;
}

const Layer& LayerGraph::at(int id) const {
  const Layer* l = find(id);
  if (!l) throw InvariantError("no layer with id " + std::to_string(id));
  return *l;
}

bool LayerGraph::has_lstm_layers() const {
  return std::any_of(layers.begin(), layers.end(),
                     [](const Layer& l) { return l.kind == LayerKind::LstmLayer; });
}

namespace {

i64 get_dim(const json& j, const std::string& layer_ctx, const char* field) {
  if (!j.contains(field))
    throw ParseError(layer_ctx + ": missing field '" + field + "'");
  const json& v = j.at(field);
  if (!v.is_number_integer())
    throw ParseError(layer_ctx + ": field '" + field + "' must be an integer");
  return v.get<i64>();
}

void reject_unknown_fields(const json& j, const std::string& ctx,
                           const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ParseError(ctx + ": unknown field '" + key + "'");
  }
}

Layer parse_layer(const json& j) {
  if (!j.is_object()) throw ParseError("layer entries must be objects");
  if (!j.contains("id") || !j.at("id").is_number_integer())
    throw ParseError("layer missing integer 'id'");
  Layer l;
  l.id = j.at("id").get<int>();
  const std::string ctx = "layer " + std::to_string(l.id);
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw ParseError(ctx + ": missing 'kind'");
  l.kind = kind_from_name(j.at("kind").get<std::string>());

  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Depthwise:
    case LayerKind::Pointwise: {
      reject_unknown_fields(j, ctx,
                            {"id", "kind", "hi", "wi", "cin", "cout", "kh", "kw",
                             "stride", "padding"});
      ConvShape s;
      s.hi = get_dim(j, ctx, "hi");
      s.wi = get_dim(j, ctx, "wi");
      s.cin = get_dim(j, ctx, "cin");
      s.cout = get_dim(j, ctx, "cout");
      s.kh = get_dim(j, ctx, "kh");
      s.kw = get_dim(j, ctx, "kw");
      s.stride = get_dim(j, ctx, "stride");
      s.padding = get_dim(j, ctx, "padding");
      l.shape = s;
      break;
    }
    case LayerKind::FullyConnected: {
      reject_unknown_fields(j, ctx, {"id", "kind", "in", "out"});
      FcShape s;
      s.in = get_dim(j, ctx, "in");
      s.out = get_dim(j, ctx, "out");
      l.shape = s;
      break;
    }
    case LayerKind::LstmLayer: {
      reject_unknown_fields(j, ctx, {"id", "kind", "d_in", "d_h", "timesteps", "gates"});
      LstmShape s;
      s.d_in = get_dim(j, ctx, "d_in");
      s.d_h = get_dim(j, ctx, "d_h");
      s.timesteps = get_dim(j, ctx, "timesteps");
      if (j.contains("gates") && j.at("gates").get<i64>() != 4)
        throw ParseError(ctx + ": LSTM cells have exactly 4 gates");
      l.shape = s;
      break;
    }
    case LayerKind::LstmGateUnit: {
      reject_unknown_fields(j, ctx,
                            {"id", "kind", "d_in", "d_h", "timesteps", "timestep", "gate"});
      LstmGateShape s;
      s.d_in = get_dim(j, ctx, "d_in");
      s.d_h = get_dim(j, ctx, "d_h");
      s.timesteps = get_dim(j, ctx, "timesteps");
      s.timestep = get_dim(j, ctx, "timestep");
      s.gate = get_dim(j, ctx, "gate");
      l.shape = s;
      break;
    }
    case LayerKind::LstmCellJoin: {
      reject_unknown_fields(j, ctx, {"id", "kind", "d_h", "timestep"});
      LstmJoinShape s;
      s.d_h = get_dim(j, ctx, "d_h");
      s.timestep = get_dim(j, ctx, "timestep");
      l.shape = s;
      break;
    }
  }
  return l;
}

json layer_to_json(const Layer& l) {
  json j;
  j["id"] = l.id;
  j["kind"] = kind_name(l.kind);
  switch (l.kind) {
    case LayerKind::Conv:
    case LayerKind::Depthwise:
    case LayerKind::Pointwise: {
      const ConvShape& s = l.conv();
      j["hi"] = s.hi;
      j["wi"] = s.wi;
      j["cin"] = s.cin;
      j["cout"] = s.cout;
      j["kh"] = s.kh;
      j["kw"] = s.kw;
      j["stride"] = s.stride;
      j["padding"] = s.padding;
      break;
    }
    case LayerKind::FullyConnected:
      j["in"] = l.fc().in;
      j["out"] = l.fc().out;
      break;
    case LayerKind::LstmLayer:
      j["d_in"] = l.lstm().d_in;
      j["d_h"] = l.lstm().d_h;
      j["timesteps"] = l.lstm().timesteps;
      break;
    case LayerKind::LstmGateUnit:
      j["d_in"] = l.gate().d_in;
      j["d_h"] = l.gate().d_h;
      j["timesteps"] = l.gate().timesteps;
      j["timestep"] = l.gate().timestep;
      j["gate"] = l.gate().gate;
      break;
    case LayerKind::LstmCellJoin:
      j["d_h"] = l.join().d_h;
      j["timestep"] = l.join().timestep;
      break;
  }
  return j;
}

void sort_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
}

}  // namespace

LayerGraph parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("model file must be a JSON object");
  reject_unknown_fields(root, "model", {"name", "datum", "layers", "edges"});

  LayerGraph g;
  if (!root.contains("name") || !root.at("name").is_string())
    throw ParseError("model missing string 'name'");
  g.name = root.at("name").get<std::string>();
  if (root.contains("datum")) {
    const i64 d = root.at("datum").get<i64>();
    if (d < 1) throw ParseError("datum width must be >= 1 byte");
    g.datum = static_cast<u32>(d);
  }

  if (!root.contains("layers") || !root.at("layers").is_array())
    throw ParseError("model missing 'layers' array");
  for (const json& jl : root.at("layers")) g.layers.push_back(parse_layer(jl));

  if (root.contains("edges")) {
    if (!root.at("edges").is_array()) throw ParseError("'edges' must be an array");
    for (const json& je : root.at("edges")) {
      if (!je.is_array() || je.size() < 2 || je.size() > 3)
        throw ParseError("edges must be [src, dst] pairs");
      Edge e;
      e.src = je.at(0).get<int>();
      e.dst = je.at(1).get<int>();
      const Layer* p = g.find(e.src);
      if (!p)
        throw ParseError("dangling edge: no layer with id " + std::to_string(e.src));
      if (!g.find(e.dst))
        throw ParseError("dangling edge: no layer with id " + std::to_string(e.dst));
      // Edge byte counts are derived from the producer, never user-authored.
      e.act_bytes = out_act_bytes(*p, g.datum);
      if (je.size() == 3 && je.at(2).get<u64>() != e.act_bytes) {
        std::fprintf(stderr,
                     "warning: edge %d->%d: supplied activation bytes %llu "
                     "overwritten with derived %llu\n",
                     e.src, e.dst,
                     static_cast<unsigned long long>(je.at(2).get<u64>()),
                     static_cast<unsigned long long>(e.act_bytes));
      }
      g.edges.push_back(e);
    }
  }
  sort_edges(g.edges);

  const auto violations = validate_graph(g);
  if (!violations.empty()) {
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ParseError(msg);
  }
  return g;
}

std::string serialize(const LayerGraph& g) {
  json root;
  root["name"] = g.name;
  root["datum"] = g.datum;
  root["layers"] = json::array();
  for (const auto& l : g.layers) root["layers"].push_back(layer_to_json(l));
  root["edges"] = json::array();
  std::vector<Edge> edges = g.edges;
  sort_edges(edges);
  for (const auto& e : edges) root["edges"].push_back(json::array({e.src, e.dst}));
  return root.dump(2) + "\n";
}

std::vector<std::string> validate_graph(const LayerGraph& g) {
  std::vector<std::string> out;
  auto bad = [&out](const std::string& s) { out.push_back(s); };

  if (g.datum < 1) bad("datum width must be >= 1");

  std::unordered_set<int> ids;
  for (const auto& l : g.layers) {
    const std::string ctx = "layer " + std::to_string(l.id);
    if (!ids.insert(l.id).second) bad(ctx + ": duplicate id");
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Depthwise:
      case LayerKind::Pointwise: {
        const ConvShape& s = l.conv();
        if (s.hi < 1 || s.wi < 1 || s.cin < 1 || s.cout < 1 || s.kh < 1 || s.kw < 1)
          bad(ctx + ": all dimensions must be >= 1");
        if (s.stride < 1) bad(ctx + ": stride must be >= 1");
        if (s.padding < 0) bad(ctx + ": padding must be >= 0");
        if (l.kind == LayerKind::Pointwise && (s.kh != 1 || s.kw != 1))
          bad(ctx + ": pointwise layers require kh = kw = 1");
        if (l.kind == LayerKind::Depthwise && s.cout != s.cin)
          bad(ctx + ": depthwise layers require cout = cin");
        if (s.hi >= 1 && s.wi >= 1 && s.kh >= 1 && s.kw >= 1 && s.stride >= 1 &&
            s.padding >= 0 &&
            (s.hi + 2 * s.padding < s.kh || s.wi + 2 * s.padding < s.kw))
          bad(ctx + ": kernel larger than padded input");
        break;
      }
      case LayerKind::FullyConnected:
        if (l.fc().in < 1 || l.fc().out < 1) bad(ctx + ": all dimensions must be >= 1");
        break;
      case LayerKind::LstmLayer: {
        const LstmShape& s = l.lstm();
        if (s.d_in < 1 || s.d_h < 1 || s.timesteps < 1)
          bad(ctx + ": all dimensions must be >= 1");
        break;
      }
      case LayerKind::LstmGateUnit: {
        const LstmGateShape& s = l.gate();
        if (s.d_in < 1 || s.d_h < 1 || s.timesteps < 1)
          bad(ctx + ": all dimensions must be >= 1");
        if (s.timestep < 0 || s.timestep >= s.timesteps)
          bad(ctx + ": timestep out of range");
        if (s.gate < 0 || s.gate > 3) bad(ctx + ": gate index must be in 0..3");
        break;
      }
      case LayerKind::LstmCellJoin: {
        const LstmJoinShape& s = l.join();
        if (s.d_h < 1) bad(ctx + ": all dimensions must be >= 1");
        if (s.timestep < 0) bad(ctx + ": timestep must be >= 0");
        break;
      }
    }
  }

  std::set<std::pair<int, int>> seen_edges;
  for (const auto& e : g.edges) {
    const std::string ctx =
        "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst);
    const Layer* p = g.find(e.src);
    const Layer* c = g.find(e.dst);
    if (!p) bad(ctx + ": dangling producer id " + std::to_string(e.src));
    if (!c) bad(ctx + ": dangling consumer id " + std::to_string(e.dst));
    if (!seen_edges.insert({e.src, e.dst}).second) bad(ctx + ": duplicate edge");
    if (p && e.act_bytes != out_act_bytes(*p, g.datum))
      bad(ctx + ": activation bytes " + std::to_string(e.act_bytes) +
          " do not match producer output footprint " +
          std::to_string(out_act_bytes(*p, g.datum)));
  }

  // Cycle check (self-edges included). Kahn's algorithm over valid edges.
  if (out.empty()) {
    std::unordered_map<int, int> indeg;
    for (const auto& l : g.layers) indeg[l.id] = 0;
    for (const auto& e : g.edges) indeg[e.dst]++;
    std::set<int> ready;
    for (const auto& [id, d] : indeg)
      if (d == 0) ready.insert(id);
    size_t emitted = 0;
    std::unordered_map<int, std::vector<int>> succ;
    for (const auto& e : g.edges) succ[e.src].push_back(e.dst);
    while (!ready.empty()) {
      const int id = *ready.begin();
      ready.erase(ready.begin());
      ++emitted;
      for (int s : succ[id])
        if (--indeg[s] == 0) ready.insert(s);
    }
    if (emitted != g.layers.size()) bad("cycle detected: graph is not a DAG");
  }
  return out;
}

void require_valid(const LayerGraph& g) {
  const auto violations = validate_graph(g);
  if (!violations.empty()) {
    std::string msg = "invalid graph:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ModelError(msg);
  }
}

std::vector<int> topological_order(const LayerGraph& g) {
  std::unordered_map<int, int> indeg;
  std::unordered_map<int, std::vector<int>> succ;
  for (const auto& l : g.layers) indeg[l.id] = 0;
  for (const auto& e : g.edges) {
    indeg[e.dst]++;
    succ[e.src].push_back(e.dst);
  }
  std::set<int> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(id);
  std::vector<int> order;
  order.reserve(g.layers.size());
  while (!ready.empty()) {
    const int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int s : succ[id])
      if (--indeg[s] == 0) ready.insert(s);
  }
  if (order.size() != g.layers.size())
    throw ModelError("cycle detected: graph has no topological order");
  return order;
}

LayerGraph lower_lstm(const LayerGraph& g) {
  if (!g.has_lstm_layers()) return g;

  LayerGraph out;
  out.name = g.name;
  out.datum = g.datum;

  int next_id = 0;
  for (const auto& l : g.layers) next_id = std::max(next_id, l.id + 1);

  // Per LSTM layer: gate unit ids [t][g] and join ids [t].
  struct Lowered {
    std::vector<std::array<int, 4>> gates;
    std::vector<int> joins;
    i64 d_h = 0;
    i64 timesteps = 0;
  };
  std::map<int, Lowered> lowered;

  for (const auto& l : g.layers) {
    if (l.kind != LayerKind::LstmLayer) {
      out.layers.push_back(l);
      continue;
    }
    const LstmShape& s = l.lstm();
    Lowered low;
    low.d_h = s.d_h;
    low.timesteps = s.timesteps;
    low.gates.resize(static_cast<size_t>(s.timesteps));
    low.joins.resize(static_cast<size_t>(s.timesteps));
    for (i64 t = 0; t < s.timesteps; ++t) {
      for (i64 gate = 0; gate < 4; ++gate) {
        Layer u;
        u.id = next_id++;
        u.kind = LayerKind::LstmGateUnit;
        u.shape = LstmGateShape{s.d_in, s.d_h, s.timesteps, t, gate};
        low.gates[static_cast<size_t>(t)][static_cast<size_t>(gate)] = u.id;
        out.layers.push_back(u);
      }
      Layer j;
      j.id = next_id++;
      j.kind = LayerKind::LstmCellJoin;
      j.shape = LstmJoinShape{s.d_h, t};
      low.joins[static_cast<size_t>(t)] = j.id;
      out.layers.push_back(j);
    }
    lowered.emplace(l.id, std::move(low));
  }

  auto add_edge = [&out](int src, int dst) {
    Edge e;
    e.src = src;
    e.dst = dst;
    e.act_bytes = out_act_bytes(out.at(src), out.datum);
    out.edges.push_back(e);
  };

  // Intra-layer wiring: gates(t) -> join(t); join(t-1) -> gates(t); the cell
  // state chains join(t-1) -> join(t).
  for (const auto& [id, low] : lowered) {
    (void)id;
    for (i64 t = 0; t < low.timesteps; ++t) {
      for (int gate_id : low.gates[static_cast<size_t>(t)])
        add_edge(gate_id, low.joins[static_cast<size_t>(t)]);
      if (t > 0) {
        for (int gate_id : low.gates[static_cast<size_t>(t)])
          add_edge(low.joins[static_cast<size_t>(t - 1)], gate_id);
        add_edge(low.joins[static_cast<size_t>(t - 1)],
                 low.joins[static_cast<size_t>(t)]);
      }
    }
  }

  // Rewire original edges across lowered boundaries.
  for (const auto& e : g.edges) {
    const bool p_low = lowered.count(e.src) > 0;
    const bool c_low = lowered.count(e.dst) > 0;
    if (!p_low && !c_low) {
      out.edges.push_back(e);
    } else if (p_low && !c_low) {
      // The consumer sees the full hidden sequence: one edge per timestep.
      const Lowered& p = lowered.at(e.src);
      for (i64 t = 0; t < p.timesteps; ++t)
        add_edge(p.joins[static_cast<size_t>(t)], e.dst);
    } else if (!p_low && c_low) {
      // Non-recurrent producer feeds the first timestep's gates; later
      // timesteps are ordered through the join chain.
      const Lowered& c = lowered.at(e.dst);
      for (int gate_id : c.gates[0]) add_edge(e.src, gate_id);
    } else {
      const Lowered& p = lowered.at(e.src);
      const Lowered& c = lowered.at(e.dst);
      if (p.timesteps == c.timesteps) {
        // Stacked recurrent layers run timestep-aligned: h_t of the lower
        // layer is x_t of the upper one.
        for (i64 t = 0; t < p.timesteps; ++t)
          for (int gate_id : c.gates[static_cast<size_t>(t)])
            add_edge(p.joins[static_cast<size_t>(t)], gate_id);
      } else {
        for (int gate_id : c.gates[0])
          add_edge(p.joins[static_cast<size_t>(p.timesteps - 1)], gate_id);
      }
    }
  }

  std::sort(out.edges.begin(), out.edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  return out;
}

}  // namespace mensa
