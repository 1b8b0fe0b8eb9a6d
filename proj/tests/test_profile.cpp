// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "mensa/graph.hpp"
#include "mensa/profile.hpp"
#include "oracles.hpp"

using namespace mensa;

namespace {

Layer conv_layer(int id, i64 hi, i64 wi, i64 cin, i64 cout, i64 k, i64 s, i64 p) {
  Layer l;
  l.id = id;
  l.kind = LayerKind::Conv;
  l.shape = ConvShape{hi, wi, cin, cout, k, k, s, p};
  return l;
}

Layer gate_layer(int id, i64 d_in, i64 d_h) {
  Layer l;
  l.id = id;
  l.kind = LayerKind::LstmGateUnit;
  l.shape = LstmGateShape{d_in, d_h, 1, 0, 0};
  return l;
}

}  // namespace

TEST_SUITE("profile") {

TEST_CASE("output_dims") {
  CHECK(output_dims(ConvShape{56, 56, 1, 1, 3, 3, 1, 1}) == std::pair<i64, i64>{56, 56});
  // Stride-2 case cross-checked by enumerating valid window positions.
  const auto [ho, wo] = output_dims(ConvShape{56, 56, 1, 1, 3, 3, 2, 1});
  CHECK(ho == 28);
  CHECK(wo == 28);
  CHECK(ho == oracle::out_positions(56, 3, 2, 1));
  CHECK_THROWS_AS(output_dims(ConvShape{5, 5, 1, 1, 7, 7, 1, 0}), ModelError);
}

TEST_CASE("lstm gate unit profile") {
  const LayerProfile p = layer_profile(gate_layer(0, 1000, 1000), 1);
  CHECK(p.mac_count == 2'000'000);
  CHECK(p.param_bytes == 2'000'000);
  CHECK(p.param_intensity == Rational(1, 1));
}

TEST_CASE("conv profile matches the loop-nest counter") {
  const LayerProfile p = layer_profile(conv_layer(0, 56, 56, 64, 64, 3, 1, 1), 1);
  CHECK(p.mac_count == 115'605'504);
  CHECK(p.param_bytes == 36'864);
  CHECK(p.param_intensity == Rational(3136, 1));
  CHECK(p.mac_count == oracle::conv_macs(56, 56, 64, 64, 3, 3, 1, 1));
}

TEST_CASE("unit fc profile") {
  Layer l;
  l.id = 0;
  l.kind = LayerKind::FullyConnected;
  l.shape = FcShape{1, 1};
  const LayerProfile p = layer_profile(l, 1);
  CHECK(p.mac_count == 1);
  CHECK(p.param_bytes == 1);
  CHECK(p.param_intensity == Rational(1, 1));
}

TEST_CASE("intensity identity holds exactly") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    Layer l;
    l.id = t;
    if (t % 2 == 0) {
      l.kind = LayerKind::FullyConnected;
      l.shape = FcShape{1 + static_cast<i64>(rng() % 4096),
                        1 + static_cast<i64>(rng() % 4096)};
    } else {
      l.kind = LayerKind::LstmGateUnit;
      l.shape = LstmGateShape{1 + static_cast<i64>(rng() % 2048),
                              1 + static_cast<i64>(rng() % 2048), 1, 0, 0};
    }
    const LayerProfile p = layer_profile(l, 1);
    CHECK(p.param_intensity == Rational(1, 1));
    // intensity * param_bytes == macs, exactly.
    CHECK(static_cast<u64>(p.param_intensity.num) * p.param_bytes ==
          p.mac_count * static_cast<u64>(p.param_intensity.den));
  }
}

TEST_CASE("conv param intensity equals output positions") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const i64 hi = 4 + static_cast<i64>(rng() % 60);
    const i64 wi = 4 + static_cast<i64>(rng() % 60);
    const i64 k = 1 + static_cast<i64>(rng() % 3);
    const Layer l = conv_layer(t, hi, wi, 1 + static_cast<i64>(rng() % 64),
                               1 + static_cast<i64>(rng() % 64), k, 1, k / 2);
    const LayerProfile p = layer_profile(l, 1);
    const auto [ho, wo] = output_dims(l.conv());
    CHECK(p.param_intensity == Rational(ho * wo, 1));
  }
}

TEST_CASE("profiles scale linearly in cout") {
  const LayerProfile p1 = layer_profile(conv_layer(0, 28, 28, 32, 64, 3, 1, 1), 1);
  const LayerProfile p2 = layer_profile(conv_layer(0, 28, 28, 32, 128, 3, 1, 1), 1);
  CHECK(p2.mac_count == 2 * p1.mac_count);
  CHECK(p2.param_bytes == 2 * p1.param_bytes);
  CHECK(p2.param_intensity == p1.param_intensity);
}

TEST_CASE("small-instance exhaustive oracle equivalence") {
  // Spot slice of the acceptance sweep: dims <= 4 here, full <= 8 there.
  for (i64 hi = 1; hi <= 4; ++hi)
    for (i64 k = 1; k <= hi; ++k)
      for (i64 cin = 1; cin <= 3; ++cin)
        for (i64 cout = 1; cout <= 3; ++cout)
          for (i64 s = 1; s <= 2; ++s) {
            const Layer l = conv_layer(0, hi, hi, cin, cout, k, s, 0);
            CHECK(layer_profile(l, 1).mac_count ==
                  oracle::conv_macs(hi, hi, cin, cout, k, k, s, 0));
          }
}

TEST_CASE("model_summary totals") {
  SUBCASE("single layer") {
    LayerGraph g;
    g.name = "one";
    g.layers.push_back(conv_layer(0, 14, 14, 8, 8, 3, 1, 1));
    const ModelSummary s = model_summary(g);
    REQUIRE(s.profiles.size() == 1);
    CHECK(s.total_macs == s.profiles[0].mac_count);
    CHECK(s.total_param_bytes == s.profiles[0].param_bytes);
  }
  SUBCASE("lowered lstm layer sums gates and joins") {
    LayerGraph g;
    g.name = "lstm";
    Layer l;
    l.id = 0;
    l.kind = LayerKind::LstmLayer;
    l.shape = LstmShape{1000, 1000, 100};
    g.layers.push_back(l);
    const ModelSummary s = model_summary(lower_lstm(g));
    // 100 * 4 gates * 2e6 MACs plus 100 joins * 3000 MACs.
    u64 expected = 0;
    for (const auto& p : s.profiles) expected += p.mac_count;
    CHECK(s.total_macs == expected);
    CHECK(s.total_macs == 800'000'000ULL + 300'000ULL);
  }
  SUBCASE("two disconnected layers add up") {
    LayerGraph g;
    g.name = "two";
    g.layers.push_back(conv_layer(0, 14, 14, 8, 8, 3, 1, 1));
    g.layers.push_back(conv_layer(1, 7, 7, 4, 4, 3, 1, 1));
    const ModelSummary s = model_summary(g);
    CHECK(s.total_macs == s.profiles[0].mac_count + s.profiles[1].mac_count);
  }
}

TEST_CASE("depthwise and pointwise profiles") {
  Layer dw;
  dw.id = 0;
  dw.kind = LayerKind::Depthwise;
  dw.shape = ConvShape{14, 14, 960, 960, 3, 3, 1, 1};
  const LayerProfile p = layer_profile(dw, 1);
  CHECK(p.mac_count == 1'693'440);
  CHECK(p.param_bytes == 8'640);
  CHECK(p.param_intensity == Rational(196, 1));
  CHECK(p.mac_count == oracle::depthwise_macs(14, 14, 960, 3, 3, 1, 1));

  Layer pw;
  pw.id = 1;
  pw.kind = LayerKind::Pointwise;
  pw.shape = ConvShape{14, 14, 512, 512, 1, 1, 1, 0};
  const LayerProfile q = layer_profile(pw, 1);
  CHECK(q.mac_count == 51'380'224);
  CHECK(q.param_bytes == 262'144);
  CHECK(q.param_intensity == Rational(196, 1));
}

}  // TEST_SUITE
