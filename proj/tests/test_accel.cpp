// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "mensa/accel.hpp"

using namespace mensa;

TEST_SUITE("accel") {

TEST_CASE("builtin peaks match the published numbers exactly") {
  const Platform base = baseline_platform();
  CHECK(peak_throughput(base.accelerators[0]) == 2.048e12);

  const Platform mensa = mensa_platform();
  CHECK(peak_throughput(mensa.accel("Accel-A")) == 2.048e12);
  CHECK(peak_throughput(mensa.accel("Accel-B")) == 1.28e11);
  CHECK(peak_throughput(mensa.accel("Accel-C")) == 5.12e11);
}

TEST_CASE("builtin buffer capacities and bandwidths") {
  const Platform base = baseline_platform();
  const AcceleratorConfig& b = base.accelerators[0];
  CHECK(b.param_buffer_bytes == 4 * MiB);
  CHECK(b.act_buffer_bytes == 2 * MiB);
  CHECK(b.dram_bandwidth == 32e9);
  CHECK(b.pe_rows == 64);
  CHECK(b.pe_cols == 64);

  const Platform mensa = mensa_platform();
  const AcceleratorConfig& a = mensa.accel("Accel-A");
  CHECK(a.act_buffer_bytes == 256 * KiB);
  CHECK(a.param_buffer_bytes == 128 * KiB);
  CHECK(a.placement == Placement::OnChip);

  const AcceleratorConfig& ab = mensa.accel("Accel-B");
  CHECK(ab.act_buffer_bytes == 128 * KiB);
  CHECK(ab.pe_rf_bytes == 512);
  CHECK(ab.param_buffer_bytes == 0);
  CHECK(ab.placement == Placement::NearData);
  CHECK(ab.dram_bandwidth == 2.56e11);
  // Near-data bandwidth is exactly 8x the baseline's.
  CHECK(ab.dram_bandwidth == 8 * b.dram_bandwidth);

  const AcceleratorConfig& ac = mensa.accel("Accel-C");
  CHECK(ac.act_buffer_bytes == 128 * KiB);
  CHECK(ac.param_buffer_bytes == 128 * KiB);
  CHECK(ac.dram_bandwidth == 8 * b.dram_bandwidth);
}

TEST_CASE("base-hb differs from baseline only in bandwidth") {
  const Platform base = baseline_platform();
  const Platform basehb = base_hb_platform();
  const AcceleratorConfig& b = base.accelerators[0];
  const AcceleratorConfig& hb = basehb.accelerators[0];
  CHECK(hb.dram_bandwidth == 256e9);
  CHECK(hb.name == b.name);
  CHECK(hb.pe_rows == b.pe_rows);
  CHECK(hb.pe_cols == b.pe_cols);
  CHECK(hb.frequency_hz == b.frequency_hz);
  CHECK(hb.param_buffer_bytes == b.param_buffer_bytes);
  CHECK(hb.act_buffer_bytes == b.act_buffer_bytes);
  CHECK(hb.placement == b.placement);
  CHECK(hb.dataflow == b.dataflow);
}

TEST_CASE("routing table") {
  const Platform mensa = mensa_platform();
  CHECK(mensa.routing.at(1) == "Accel-A");
  CHECK(mensa.routing.at(2) == "Accel-A");
  CHECK(mensa.routing.at(3) == "Accel-B");
  CHECK(mensa.routing.at(4) == "Accel-C");
  CHECK(mensa.routing.at(5) == "Accel-C");
}

TEST_CASE("peak throughput is monotonic in every factor") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    AcceleratorConfig a;
    a.pe_rows = 1 + static_cast<u32>(rng() % 64);
    a.pe_cols = 1 + static_cast<u32>(rng() % 64);
    a.frequency_hz = 1e6 * static_cast<double>(1 + rng() % 4000);
    AcceleratorConfig wider = a;
    wider.pe_cols += 1;
    AcceleratorConfig taller = a;
    taller.pe_rows += 1;
    AcceleratorConfig faster = a;
    faster.frequency_hz *= 1.5;
    CHECK(peak_throughput(wider) > peak_throughput(a));
    CHECK(peak_throughput(taller) > peak_throughput(a));
    CHECK(peak_throughput(faster) > peak_throughput(a));
  }
}

TEST_CASE("area model") {
  TechnologyTable t;
  SUBCASE("PEs only") {
    AcceleratorConfig a;
    a.pe_rows = 10;
    a.pe_cols = 10;
    CHECK(area_mm2(a, t) == doctest::Approx(1.0));
  }
  SUBCASE("baseline buffer share sits in the fitted band") {
    const Platform base = baseline_platform();
    const double total = area_mm2(base.accelerators[0], base.tech);
    const double pes = 4096 * 0.01;
    const double share = (total - pes) / total;
    CHECK(share > 0.794 - 0.05);
    CHECK(share < 0.794 + 0.05);
  }
  SUBCASE("heterogeneous platform is far smaller than the baseline") {
    const double base = area_mm2(baseline_platform());
    const double mensa = area_mm2(mensa_platform());
    CHECK(mensa <= base / 2.5);
  }
}

TEST_CASE("buffer energy rows interpolate and clamp") {
  TechnologyTable t;
  CHECK(buffer_access_energy(t, 32 * KiB) == 0.3e-12);
  CHECK(buffer_access_energy(t, 4 * MiB) == 2.0e-12);
  // 256 KiB sits between the 128 KiB and 2 MiB rows.
  const double e = buffer_access_energy(t, 256 * KiB);
  CHECK(e == doctest::Approx(0.5e-12 + (128.0 / 1920.0) * 1.0e-12));
  // Below the smallest row clamps (register files).
  CHECK(buffer_access_energy(t, 512) == 0.3e-12);

  SUBCASE("outside rows errors when clamping is off") {
    t.clamp_outside_rows = false;
    CHECK_THROWS_AS(buffer_access_energy(t, 8 * MiB), ModelError);
    CHECK_THROWS_AS(buffer_access_energy(t, 1), ModelError);
    CHECK_NOTHROW(buffer_access_energy(t, 128 * KiB));
  }
  SUBCASE("empty table errors") {
    t.buffer_energy.clear();
    CHECK_THROWS_AS(buffer_access_energy(t, 1024), ModelError);
  }
}

TEST_CASE("platform serialization round-trips bit-exactly") {
  for (const char* name : {"baseline", "base-hb", "mensa"}) {
    const Platform p = builtin_platform(name);
    const std::string text = serialize(p);
    const Platform back = parse_platform(text);
    CHECK(serialize(back) == text);
  }
  // A platform carrying custom cluster ranges round-trips too.
  Platform p = mensa_platform();
  p.cluster_ranges.push_back({1, 10, 100, 1, 2, 1e5, 1e6});
  p.cluster_ranges.push_back({2, 100, 1000, 2, 4, 1e6, 1e7});
  p.cluster_ranges.push_back({3, 1e3, 1e4, 0, 2, 1e5, 1e8});
  p.cluster_ranges.push_back({4, 1e4, 1e5, 4, 8, 1e5, 1e8});
  p.cluster_ranges.push_back({5, 1e5, 1e6, 8, 16, 1e5, 1e8});
  const std::string text = serialize(p);
  const Platform back = parse_platform(text);
  CHECK(serialize(back) == text);
  CHECK(back.cluster_ranges.size() == 5);
}

TEST_CASE("platform validation") {
  Platform p = mensa_platform();
  p.routing.erase(3);
  CHECK_THROWS_AS(parse_platform(serialize(p)), ParseError);

  Platform dup = mensa_platform();
  dup.accelerators.push_back(dup.accelerators[0]);
  CHECK_THROWS_AS(parse_platform(serialize(dup)), ParseError);
}

}  // TEST_SUITE
