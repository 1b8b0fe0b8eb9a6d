// SPDX-License-Identifier: Apache-2.0
#include "mensa/accel.hpp"

#include <algorithm>

#include <json.hpp>

namespace mensa {

using json = nlohmann::json;

const char* placement_name(Placement p) {
  return p == Placement::OnChip ? "on-chip" : "near-data";
}

Placement placement_from_name(const std::string& s) {
  if (s == "on-chip") return Placement::OnChip;
  if (s == "near-data") return Placement::NearData;
  throw ParseError("unknown placement '" + s + "'");
}

const char* dataflow_name(DataflowKind d) {
  switch (d) {
    case DataflowKind::BaselineSystolic: return "baseline-systolic";
    case DataflowKind::AccelA: return "accel-a";
    case DataflowKind::AccelB: return "accel-b";
    case DataflowKind::AccelC: return "accel-c";
  }
  throw InvariantError("unknown dataflow kind");
}

DataflowKind dataflow_from_name(const std::string& s) {
  if (s == "baseline-systolic") return DataflowKind::BaselineSystolic;
  if (s == "accel-a") return DataflowKind::AccelA;
  if (s == "accel-b") return DataflowKind::AccelB;
  if (s == "accel-c") return DataflowKind::AccelC;
  throw ParseError("unknown dataflow '" + s + "'");
}

double peak_throughput(const AcceleratorConfig& a) {
  return static_cast<double>(a.pe_count()) * a.frequency_hz;
}

double buffer_access_energy(const TechnologyTable& t, u64 capacity_bytes) {
  const auto& rows = t.buffer_energy;
  if (rows.empty()) throw ModelError("technology table has no buffer energy rows");
  if (capacity_bytes <= rows.front().capacity_bytes) {
    if (!t.clamp_outside_rows && capacity_bytes < rows.front().capacity_bytes)
      throw ModelError("buffer capacity below table rows and clamping disabled");
    return rows.front().joules_per_byte;
  }
  if (capacity_bytes >= rows.back().capacity_bytes) {
    if (!t.clamp_outside_rows && capacity_bytes > rows.back().capacity_bytes)
      throw ModelError("buffer capacity above table rows and clamping disabled");
    return rows.back().joules_per_byte;
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    if (capacity_bytes <= rows[i].capacity_bytes) {
      const double lo_c = static_cast<double>(rows[i - 1].capacity_bytes);
      const double hi_c = static_cast<double>(rows[i].capacity_bytes);
      const double f = (static_cast<double>(capacity_bytes) - lo_c) / (hi_c - lo_c);
      return rows[i - 1].joules_per_byte +
             f * (rows[i].joules_per_byte - rows[i - 1].joules_per_byte);
    }
  }
  throw InvariantError("buffer energy rows not sorted");
}

namespace {

double buffer_area_density(const TechnologyTable& t, u64 capacity_bytes) {
  const auto& rows = t.buffer_area;
  if (rows.empty()) throw ModelError("technology table has no buffer area rows");
  if (capacity_bytes <= rows.front().capacity_bytes) {
    if (!t.clamp_outside_rows && capacity_bytes < rows.front().capacity_bytes)
      throw ModelError("buffer capacity below area rows and clamping disabled");
    return rows.front().mm2_per_kb;
  }
  if (capacity_bytes >= rows.back().capacity_bytes) {
    if (!t.clamp_outside_rows && capacity_bytes > rows.back().capacity_bytes)
      throw ModelError("buffer capacity above area rows and clamping disabled");
    return rows.back().mm2_per_kb;
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    if (capacity_bytes <= rows[i].capacity_bytes) {
      const double lo_c = static_cast<double>(rows[i - 1].capacity_bytes);
      const double hi_c = static_cast<double>(rows[i].capacity_bytes);
      const double f = (static_cast<double>(capacity_bytes) - lo_c) / (hi_c - lo_c);
      return rows[i - 1].mm2_per_kb + f * (rows[i].mm2_per_kb - rows[i - 1].mm2_per_kb);
    }
  }
  throw InvariantError("buffer area rows not sorted");
}

}  // namespace

const AcceleratorConfig& Platform::accel(const std::string& accel_name) const {
  for (const auto& a : accelerators)
    if (a.name == accel_name) return a;
  throw ModelError("platform '" + name + "' has no accelerator '" + accel_name + "'");
}

std::span<const ClusterRange> Platform::ranges() const {
  if (cluster_ranges.empty()) {
    const auto& b = builtin_cluster_ranges();
    return {b.data(), b.size()};
  }
  return {cluster_ranges.data(), cluster_ranges.size()};
}

double area_mm2(const AcceleratorConfig& a, const TechnologyTable& t) {
  double area = static_cast<double>(a.pe_count()) * t.area_mm2_per_pe;
  auto buffer_area = [&](u64 capacity, u64 total_bytes) {
    if (total_bytes == 0) return 0.0;
    return static_cast<double>(total_bytes) / 1024.0 * buffer_area_density(t, capacity);
  };
  area += buffer_area(a.param_buffer_bytes, a.param_buffer_bytes);
  area += buffer_area(a.act_buffer_bytes, a.act_buffer_bytes);
  area += buffer_area(a.pe_rf_bytes, a.pe_rf_bytes * a.pe_count());
  return area;
}

double area_mm2(const Platform& p) {
  double total = 0;
  for (const auto& a : p.accelerators) total += area_mm2(a, p.tech);
  return total;
}

Platform baseline_platform() {
  Platform p;
  p.name = "baseline";
  AcceleratorConfig a;
  a.name = "Baseline";
  a.pe_rows = 64;
  a.pe_cols = 64;
  a.frequency_hz = 500e6;  // 64*64 PEs at 500 MHz = 2.048 TFLOP/s peak
  a.param_buffer_bytes = 4 * MiB;
  a.act_buffer_bytes = 2 * MiB;
  a.pe_rf_bytes = 0;
  a.dram_bandwidth = 32e9;
  a.placement = Placement::OnChip;
  a.dataflow = DataflowKind::BaselineSystolic;
  p.accelerators.push_back(a);
  for (int c = 1; c <= 5; ++c) p.routing[c] = "Baseline";
  return p;
}

Platform base_hb_platform() {
  Platform p = baseline_platform();
  p.name = "base-hb";
  p.accelerators[0].dram_bandwidth = 256e9;  // 8x internal-stack bandwidth
  return p;
}

Platform mensa_platform() {
  Platform p;
  p.name = "mensa";

  AcceleratorConfig a;
  a.name = "Accel-A";
  a.pe_rows = 32;
  a.pe_cols = 32;
  a.frequency_hz = 2e9;  // 2.048 TFLOP/s peak
  a.param_buffer_bytes = 128 * KiB;
  a.act_buffer_bytes = 256 * KiB;
  a.pe_rf_bytes = 0;
  a.dram_bandwidth = 32e9;
  a.placement = Placement::OnChip;
  a.dataflow = DataflowKind::AccelA;
  p.accelerators.push_back(a);

  AcceleratorConfig b;
  b.name = "Accel-B";
  b.pe_rows = 8;
  b.pe_cols = 8;
  b.frequency_hz = 2e9;  // 128 GFLOP/s peak
  b.param_buffer_bytes = 0;  // parameters stream from DRAM into PE RFs
  b.act_buffer_bytes = 128 * KiB;
  b.pe_rf_bytes = 512;
  b.dram_bandwidth = 256e9;
  b.placement = Placement::NearData;
  b.dataflow = DataflowKind::AccelB;
  p.accelerators.push_back(b);

  AcceleratorConfig c;
  c.name = "Accel-C";
  c.pe_rows = 16;
  c.pe_cols = 16;
  c.frequency_hz = 2e9;  // 512 GFLOP/s peak
  c.param_buffer_bytes = 128 * KiB;
  c.act_buffer_bytes = 128 * KiB;
  c.pe_rf_bytes = 0;
  c.dram_bandwidth = 256e9;
  c.placement = Placement::NearData;
  c.dataflow = DataflowKind::AccelC;
  p.accelerators.push_back(c);

  p.routing = {{1, "Accel-A"}, {2, "Accel-A"}, {3, "Accel-B"}, {4, "Accel-C"}, {5, "Accel-C"}};
  return p;
}

Platform builtin_platform(const std::string& name) {
  if (name == "baseline") return baseline_platform();
  if (name == "base-hb") return base_hb_platform();
  if (name == "mensa") return mensa_platform();
  throw ParseError("unknown built-in platform '" + name + "'");
}

namespace {

json accel_to_json(const AcceleratorConfig& a) {
  json j;
  j["name"] = a.name;
  j["pe_rows"] = a.pe_rows;
  j["pe_cols"] = a.pe_cols;
  j["frequency_hz"] = a.frequency_hz;
  j["param_buffer_bytes"] = a.param_buffer_bytes;
  j["act_buffer_bytes"] = a.act_buffer_bytes;
  j["pe_rf_bytes"] = a.pe_rf_bytes;
  j["dram_bandwidth"] = a.dram_bandwidth;
  j["placement"] = placement_name(a.placement);
  j["dataflow"] = dataflow_name(a.dataflow);
  return j;
}

AcceleratorConfig accel_from_json(const json& j) {
  AcceleratorConfig a;
  a.name = j.at("name").get<std::string>();
  a.pe_rows = j.at("pe_rows").get<u32>();
  a.pe_cols = j.at("pe_cols").get<u32>();
  a.frequency_hz = j.at("frequency_hz").get<double>();
  a.param_buffer_bytes = j.at("param_buffer_bytes").get<u64>();
  a.act_buffer_bytes = j.at("act_buffer_bytes").get<u64>();
  a.pe_rf_bytes = j.value("pe_rf_bytes", u64{0});
  a.dram_bandwidth = j.at("dram_bandwidth").get<double>();
  a.placement = placement_from_name(j.at("placement").get<std::string>());
  a.dataflow = dataflow_from_name(j.at("dataflow").get<std::string>());
  if (a.pe_rows < 1 || a.pe_cols < 1 || !(a.frequency_hz > 0) || !(a.dram_bandwidth > 0))
    throw ParseError("accelerator '" + a.name + "': sizes, frequency and bandwidth must be positive");
  return a;
}

json tech_to_json(const TechnologyTable& t) {
  json j;
  j["e_mac"] = t.e_mac;
  j["e_dram"] = t.e_dram;
  j["e_offchip_link"] = t.e_offchip_link;
  j["e_noc"] = t.e_noc;
  j["buffer_energy"] = json::array();
  for (const auto& r : t.buffer_energy)
    j["buffer_energy"].push_back({{"capacity_bytes", r.capacity_bytes},
                                  {"joules_per_byte", r.joules_per_byte}});
  j["leak_w_per_pe"] = t.leak_w_per_pe;
  j["leak_w_per_kb"] = t.leak_w_per_kb;
  j["psum_width"] = t.psum_width;
  j["area_mm2_per_pe"] = t.area_mm2_per_pe;
  j["buffer_area"] = json::array();
  for (const auto& r : t.buffer_area)
    j["buffer_area"].push_back({{"capacity_bytes", r.capacity_bytes},
                                {"mm2_per_kb", r.mm2_per_kb}});
  j["near_data_dram_scale"] = t.near_data_dram_scale;
  j["clamp_outside_rows"] = t.clamp_outside_rows;
  return j;
}

TechnologyTable tech_from_json(const json& j) {
  TechnologyTable t;
  t.e_mac = j.value("e_mac", t.e_mac);
  t.e_dram = j.value("e_dram", t.e_dram);
  t.e_offchip_link = j.value("e_offchip_link", t.e_offchip_link);
  t.e_noc = j.value("e_noc", t.e_noc);
  if (j.contains("buffer_energy")) {
    t.buffer_energy.clear();
    for (const auto& r : j.at("buffer_energy"))
      t.buffer_energy.push_back(
          {r.at("capacity_bytes").get<u64>(), r.at("joules_per_byte").get<double>()});
  }
  t.leak_w_per_pe = j.value("leak_w_per_pe", t.leak_w_per_pe);
  t.leak_w_per_kb = j.value("leak_w_per_kb", t.leak_w_per_kb);
  t.psum_width = j.value("psum_width", t.psum_width);
  t.area_mm2_per_pe = j.value("area_mm2_per_pe", t.area_mm2_per_pe);
  if (j.contains("buffer_area")) {
    t.buffer_area.clear();
    for (const auto& r : j.at("buffer_area"))
      t.buffer_area.push_back(
          {r.at("capacity_bytes").get<u64>(), r.at("mm2_per_kb").get<double>()});
  }
  t.near_data_dram_scale = j.value("near_data_dram_scale", t.near_data_dram_scale);
  t.clamp_outside_rows = j.value("clamp_outside_rows", t.clamp_outside_rows);

  auto sorted_nondecreasing = [](const auto& rows, auto value_of) {
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].capacity_bytes < rows[i - 1].capacity_bytes ||
          value_of(rows[i]) < value_of(rows[i - 1]))
        return false;
    return true;
  };
  if (!sorted_nondecreasing(t.buffer_energy,
                            [](const BufferEnergyRow& r) { return r.joules_per_byte; }))
    throw ParseError("buffer_energy rows must be sorted with non-decreasing energy");
  return t;
}

}  // namespace

Platform parse_platform(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed platform file: ") + e.what());
  }
  Platform p;
  p.name = root.at("name").get<std::string>();
  for (const auto& ja : root.at("accelerators")) p.accelerators.push_back(accel_from_json(ja));
  if (root.contains("technology")) p.tech = tech_from_json(root.at("technology"));
  for (const auto& [cluster, accel] : root.at("routing").items())
    p.routing[std::stoi(cluster)] = accel.get<std::string>();
  if (root.contains("cluster_ranges")) {
    for (const auto& jr : root.at("cluster_ranges")) {
      ClusterRange r;
      r.id = jr.at("id").get<int>();
      r.param_bytes_lo = jr.at("param_bytes").at(0).get<double>();
      r.param_bytes_hi = jr.at("param_bytes").at(1).get<double>();
      r.param_intensity_lo = jr.at("param_intensity").at(0).get<double>();
      r.param_intensity_hi = jr.at("param_intensity").at(1).get<double>();
      r.mac_lo = jr.at("macs").at(0).get<double>();
      r.mac_hi = jr.at("macs").at(1).get<double>();
      if (r.param_bytes_lo > r.param_bytes_hi || r.param_intensity_lo > r.param_intensity_hi ||
          r.mac_lo > r.mac_hi)
        throw ParseError("cluster range " + std::to_string(r.id) + ": lo must be <= hi");
      p.cluster_ranges.push_back(r);
    }
  }

  std::vector<std::string> names;
  for (const auto& a : p.accelerators) names.push_back(a.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw ParseError("accelerator names must be unique");
  for (int c = 1; c <= 5; ++c) {
    if (!p.routing.count(c))
      throw ParseError("routing table missing cluster " + std::to_string(c));
    p.accel(p.routing.at(c));  // throws when the target does not exist
  }
  return p;
}

std::string serialize(const Platform& p) {
  json root;
  root["name"] = p.name;
  root["accelerators"] = json::array();
  for (const auto& a : p.accelerators) root["accelerators"].push_back(accel_to_json(a));
  root["technology"] = tech_to_json(p.tech);
  json routing;
  for (const auto& [cluster, accel] : p.routing)
    routing[std::to_string(cluster)] = accel;
  root["routing"] = routing;
  if (!p.cluster_ranges.empty()) {
    root["cluster_ranges"] = json::array();
    for (const auto& r : p.cluster_ranges)
      root["cluster_ranges"].push_back(
          {{"id", r.id},
           {"param_bytes", {r.param_bytes_lo, r.param_bytes_hi}},
           {"param_intensity", {r.param_intensity_lo, r.param_intensity_hi}},
           {"macs", {r.mac_lo, r.mac_hi}}});
  }
  return root.dump(2) + "\n";
}

TechnologyTable parse_technology(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed technology file: ") + e.what());
  }
  return tech_from_json(root);
}

}  // namespace mensa
