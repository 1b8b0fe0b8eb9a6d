// SPDX-License-Identifier: Apache-2.0
#include "mensa/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mensa/accel.hpp"
#include "mensa/cluster.hpp"
#include "mensa/dataflow.hpp"
#include "mensa/energy.hpp"
#include "mensa/graph.hpp"
#include "mensa/profile.hpp"
#include "mensa/scheduler.hpp"
#include "mensa/sim.hpp"

namespace mensa::cli {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(const Rational& r) { return fmt(r.as_double()); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

u64 fnv1a64(const std::string& data) {
  u64 h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return std::string("fnv1a64:") + buf;
}

bool color_enabled() {
  if (std::getenv("MENSA_SIM_NO_COLOR")) return false;
  return isatty(fileno(stderr));
}

void status(const std::string& msg) {
  if (color_enabled())
    std::fprintf(stderr, "\x1b[32m%s\x1b[0m\n", msg.c_str());
  else
    std::fprintf(stderr, "%s\n", msg.c_str());
}

struct RunContext {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  std::vector<std::string> platforms;
  bool has_seed = false;
  u64 seed = 0;
  std::string primary_out;

  std::string read_input(const std::string& path) {
    std::string data = read_file(path);
    input_digests[path] = digest(data);
    return data;
  }

  void write_output(const std::string& path, const std::string& data) {
    if (path.empty()) {
      std::fwrite(data.data(), 1, data.size(), stdout);
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << data;
    output_digests[path] = digest(data);
    if (primary_out.empty()) primary_out = path;
    status("wrote " + path);
  }

  // One JSON line per run, appended next to the primary output. The
  // manifest carries the clock so data artifacts stay byte-reproducible.
  void append_manifest() {
    if (primary_out.empty()) return;
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["inputs"] = input_digests;
    m["outputs"] = output_digests;
    m["platforms"] = platforms;
    if (has_seed) m["seed"] = seed;
    m["version"] = kVersion;
    const std::time_t now = std::time(nullptr);
    char ts[32];
    std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["timestamp_utc"] = ts;
    std::ofstream out(primary_out + ".runs.jsonl", std::ios::app);
    if (out) out << m.dump() << "\n";
  }
};

// Tabular output: CSV by default, JSON array of row objects on request.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out;
    for (size_t i = 0; i < columns.size(); ++i)
      out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

  std::string to_json() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json obj;
      for (size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = r[i];
      arr.push_back(obj);
    }
    return arr.dump(2) + "\n";
  }

  std::string render(const std::string& format) const {
    if (format == "csv") return to_csv();
    if (format == "json") return to_json();
    throw ParseError("unknown format '" + format + "'");
  }
};

Platform load_platform(RunContext& ctx, const std::string& arg,
                       const std::string& tech_file) {
  Platform p;
  if (arg == "baseline" || arg == "base-hb" || arg == "mensa")
    p = builtin_platform(arg);
  else
    p = parse_platform(ctx.read_input(arg));
  if (!tech_file.empty()) p.tech = parse_technology(ctx.read_input(tech_file));
  ctx.platforms.push_back(p.name);
  return p;
}

LayerGraph load_model(RunContext& ctx, const std::string& path) {
  return parse_model(ctx.read_input(path));
}

json report_to_json(const SimReport& r) {
  json j;
  j["platform"] = r.platform;
  j["units"] = r.trace.size();
  j["total_latency_s"] = r.total_latency_s;
  j["total_macs"] = r.total_macs;
  j["throughput_flops"] = r.throughput_flops;
  j["avg_utilization"] = r.avg_utilization;
  j["area_mm2"] = r.area_mm2;
  j["busy_s"] = r.busy_s;
  j["utilization"] = r.utilization;
  j["energy"] = {{"pe_dynamic", r.energy.pe_dynamic},
                 {"buffer_dynamic", r.energy.buffer_dynamic},
                 {"noc_dynamic", r.energy.noc_dynamic},
                 {"dram_dynamic", r.energy.dram_dynamic},
                 {"offchip_link", r.energy.offchip_link},
                 {"static_total", r.energy.static_total},
                 {"total", r.energy.total}};
  return j;
}

// Per-unit timeline columns for the optional simulate trace output.
Table trace_table(const SimReport& r) {
  Table t;
  t.columns = {"unit_id", "kind", "accel", "start_s", "end_s", "macs",
               "dram_param_bytes", "noc_param_bytes", "noc_psum_bytes",
               "noc_act_bytes", "compute_cycles"};
  for (const auto& e : r.trace)
    t.rows.push_back({std::to_string(e.unit_id), kind_name(e.kind), e.accel,
                      fmt(e.start_s), fmt(e.end_s), std::to_string(e.macs),
                      std::to_string(e.cost.dram_param_bytes),
                      std::to_string(e.cost.noc_param_bytes),
                      std::to_string(e.cost.noc_psum_bytes),
                      std::to_string(e.cost.noc_act_bytes),
                      std::to_string(e.cost.compute_cycles)});
  return t;
}

}  // namespace

int run(int argc, const char* const* argv) {
  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.argv.emplace_back(argv[i]);

  CLI::App app{"Heterogeneous edge NN accelerator modeling toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  try {
    // Shared option storage; each subcommand binds the flags it supports.
    struct {
      std::string model, out, format = "csv", platform = "baseline", tech, trace;
      std::string archetype, platforms_csv;
      int depth = 1;
      u64 seed = 0;
      double scale = 1.0, lambda = 0.0;
      bool hidden_refetch = false;
    } o;

    auto add_out = [&](CLI::App* c) {
      c->add_option("-o,--out", o.out, "output path (stdout when omitted)");
    };
    auto add_format = [&](CLI::App* c) {
      c->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_platform = [&](CLI::App* c) {
      c->add_option("--platform", o.platform, "baseline|base-hb|mensa|<file>");
      c->add_option("--tech", o.tech, "technology table override (JSON)");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic model");
    synth->add_option("--archetype", o.archetype, "cnn|lstm|transducer|rcnn")->required();
    synth->add_option("--depth", o.depth, "layer count")->required();
    synth->add_option("--seed", o.seed, "generator seed");
    synth->add_option("--scale", o.scale, "size multiplier");
    add_out(synth);

    CLI::App* charac = app.add_subcommand("characterize", "per-unit metrics CSV");
    charac->add_option("model", o.model, "model file")->required();
    add_out(charac);
    add_format(charac);

    CLI::App* clus = app.add_subcommand("cluster", "cluster assignments CSV");
    clus->add_option("model", o.model, "model file")->required();
    add_platform(clus);
    add_out(clus);
    add_format(clus);

    CLI::App* cost = app.add_subcommand("cost", "per-unit dataflow cost CSV");
    cost->add_option("model", o.model, "model file")->required();
    add_platform(cost);
    cost->add_option("--lambda", o.lambda, "scheduler energy weight");
    cost->add_flag("--hidden-refetch", o.hidden_refetch,
                   "stream the hidden matrix every timestep");
    add_out(cost);
    add_format(cost);

    CLI::App* sched = app.add_subcommand("schedule", "two-phase mapping CSV");
    sched->add_option("model", o.model, "model file")->required();
    add_platform(sched);
    sched->add_option("--lambda", o.lambda, "scheduler energy weight");
    add_out(sched);
    add_format(sched);

    CLI::App* simu = app.add_subcommand("simulate", "event-driven simulation report");
    simu->add_option("model", o.model, "model file")->required();
    add_platform(simu);
    simu->add_option("--lambda", o.lambda, "scheduler energy weight");
    simu->add_flag("--hidden-refetch", o.hidden_refetch,
                   "stream the hidden matrix every timestep");
    simu->add_option("--trace", o.trace, "also write a per-unit trace CSV");
    add_out(simu);

    CLI::App* comp = app.add_subcommand("compare", "simulate on several platforms");
    comp->add_option("model", o.model, "model file")->required();
    comp->add_option("--platforms", o.platforms_csv, "comma-separated platform list")
        ->required();
    comp->add_option("--tech", o.tech, "technology table override (JSON)");
    comp->add_option("--lambda", o.lambda, "scheduler energy weight");
    comp->add_flag("--hidden-refetch", o.hidden_refetch,
                   "stream the hidden matrix every timestep");
    add_out(comp);
    add_format(comp);

    CLI::App* roof = app.add_subcommand("roofline", "throughput/energy roofline sweep");
    add_platform(roof);
    add_out(roof);
    add_format(roof);

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
      ctx.command = "synth";
      ctx.has_seed = true;
      ctx.seed = o.seed;
      SyntheticSpec spec;
      spec.archetype = archetype_from_name(o.archetype);
      spec.depth = o.depth;
      spec.seed = o.seed;
      spec.scale = o.scale;
      ctx.write_output(o.out, serialize(generate_synthetic(spec)));
    } else if (charac->parsed()) {
      ctx.command = "characterize";
      const LayerGraph g = lower_lstm(load_model(ctx, o.model));
      const ModelSummary s = model_summary(g);
      Table t;
      t.columns = {"unit_id", "kind", "macs", "param_bytes", "in_act_bytes",
                   "out_act_bytes", "param_intensity", "act_intensity"};
      for (const auto& p : s.profiles)
        t.rows.push_back({std::to_string(p.unit_id), kind_name(p.kind),
                          std::to_string(p.mac_count), std::to_string(p.param_bytes),
                          std::to_string(p.in_act_bytes), std::to_string(p.out_act_bytes),
                          fmt(p.param_intensity), fmt(p.act_intensity)});
      ctx.write_output(o.out, t.render(o.format));
    } else if (clus->parsed()) {
      ctx.command = "cluster";
      const Platform plat = load_platform(ctx, o.platform, o.tech);
      const LayerGraph g = lower_lstm(load_model(ctx, o.model));
      Table t;
      t.columns = {"unit_id", "cluster", "matched", "distance"};
      for (const auto& l : g.layers) {
        const auto a = classify(layer_profile(l, g.datum), plat.ranges());
        t.rows.push_back({std::to_string(a.unit_id), std::to_string(a.cluster),
                          match_name(a.matched), fmt(a.distance)});
      }
      ctx.write_output(o.out, t.render(o.format));
    } else if (cost->parsed()) {
      ctx.command = "cost";
      const Platform plat = load_platform(ctx, o.platform, o.tech);
      const LayerGraph g = lower_lstm(load_model(ctx, o.model));
      const Mapping m = schedule(g, plat, o.lambda);
      std::vector<LayerProfile> profiles;
      std::unordered_map<int, const AcceleratorConfig*> accel_of;
      for (const auto& l : g.layers) profiles.push_back(layer_profile(l, g.datum));
      for (const auto& l : g.layers) accel_of[l.id] = &plat.accel(m.at(l.id));
      const auto residency =
          plan_residency(g, profiles, accel_of, ResidencyOptions{o.hidden_refetch},
                         plat.tech.psum_width);
      Table t;
      t.columns = {"unit_id", "kind", "accel", "dataflow", "dram_param_bytes",
                   "dram_in_act_bytes", "dram_out_act_bytes", "noc_param_bytes",
                   "noc_psum_bytes", "noc_act_bytes", "buf_param_accesses",
                   "buf_act_accesses", "rf_accesses", "compute_cycles",
                   "sequential_dram"};
      for (const auto& p : profiles) {
        const AcceleratorConfig& a = *accel_of.at(p.unit_id);
        const DataflowCost c =
            dataflow_cost(p, a, residency.at(p.unit_id), plat.tech.psum_width);
        t.rows.push_back(
            {std::to_string(p.unit_id), kind_name(p.kind), a.name,
             dataflow_name(a.dataflow), std::to_string(c.dram_param_bytes),
             std::to_string(c.dram_in_act_bytes), std::to_string(c.dram_out_act_bytes),
             std::to_string(c.noc_param_bytes), std::to_string(c.noc_psum_bytes),
             std::to_string(c.noc_act_bytes), std::to_string(c.buf_param_accesses),
             std::to_string(c.buf_act_accesses), std::to_string(c.rf_accesses),
             std::to_string(c.compute_cycles), c.sequential_dram ? "1" : "0"});
      }
      ctx.write_output(o.out, t.render(o.format));
    } else if (sched->parsed()) {
      ctx.command = "schedule";
      const Platform plat = load_platform(ctx, o.platform, o.tech);
      const LayerGraph g = lower_lstm(load_model(ctx, o.model));
      std::vector<LayerProfile> profiles;
      std::vector<ClusterAssignment> assignments;
      for (const auto& l : g.layers) {
        profiles.push_back(layer_profile(l, g.datum));
        assignments.push_back(classify(profiles.back(), plat.ranges()));
      }
      const Mapping m1 = phase1_map(profiles, assignments, plat);
      const Mapping m2 = phase2_adjust(m1, g, profiles, plat, o.lambda);
      Table t;
      t.columns = {"unit_id", "cluster", "phase1_accel", "final_accel", "remapped"};
      for (size_t i = 0; i < profiles.size(); ++i) {
        const int id = profiles[i].unit_id;
        t.rows.push_back({std::to_string(id), std::to_string(assignments[i].cluster),
                          m1.at(id), m2.at(id),
                          m2.phase_of.at(id) == MapPhase::Remapped ? "1" : "0"});
      }
      ctx.write_output(o.out, t.render(o.format));
    } else if (simu->parsed()) {
      ctx.command = "simulate";
      const Platform plat = load_platform(ctx, o.platform, o.tech);
      const LayerGraph g = load_model(ctx, o.model);
      const SimReport r =
          run_pipeline(g, plat, SimOptions{o.hidden_refetch}, o.lambda);
      ctx.write_output(o.out, report_to_json(r).dump(2) + "\n");
      if (!o.trace.empty()) ctx.write_output(o.trace, trace_table(r).to_csv());
    } else if (comp->parsed()) {
      ctx.command = "compare";
      std::vector<Platform> plats;
      std::stringstream ss(o.platforms_csv);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) plats.push_back(load_platform(ctx, item, o.tech));
      const LayerGraph g = load_model(ctx, o.model);
      const auto entries = compare(g, plats, SimOptions{o.hidden_refetch}, o.lambda);
      Table t;
      t.columns = {"platform", "latency_s", "throughput_flops", "energy_j",
                   "avg_utilization", "area_mm2", "energy_reduction",
                   "throughput_gain", "utilization_gain", "latency_speedup"};
      for (const auto& e : entries)
        t.rows.push_back({e.platform, fmt(e.report.total_latency_s),
                          fmt(e.report.throughput_flops), fmt(e.report.energy.total),
                          fmt(e.report.avg_utilization), fmt(e.report.area_mm2),
                          fmt(e.energy_reduction), fmt(e.throughput_gain),
                          fmt(e.utilization_gain), fmt(e.latency_speedup)});
      ctx.write_output(o.out, t.render(o.format));
    } else if (roof->parsed()) {
      ctx.command = "roofline";
      const Platform plat = load_platform(ctx, o.platform, o.tech);
      Table t;
      t.columns = {"accel", "ai_flop_per_byte", "attainable_flops", "flops_per_joule"};
      for (const auto& a : plat.accelerators) {
        for (int k = -16; k <= 56; ++k) {  // ai from 2^-4 to 2^14, quarter-octaves
          const double ai = std::exp2(static_cast<double>(k) / 4.0);
          t.rows.push_back({a.name, fmt(ai), fmt(roofline_throughput(ai, a)),
                            fmt(roofline_energy_efficiency(ai, plat.tech))});
        }
      }
      ctx.write_output(o.out, t.render(o.format));
    }

    ctx.append_manifest();
    return 0;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ModelError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}

}  // namespace mensa::cli
