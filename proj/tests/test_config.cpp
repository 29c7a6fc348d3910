#include <cmath>

#include "doctest.h"
#include "hsr/config.hpp"

using namespace hsr;

TEST_CASE("empty object gives the defaults") {
  const SimConfig c = parse_config("{}");
  CHECK(c.geometry.inter_rrh_distance_m == 300.0);
  CHECK(c.geometry.track_offset_m == 2.0);
  CHECK(c.geometry.speed_mps * 3.6 == doctest::Approx(350.0));
  CHECK(c.geometry.carrier_hz == 2.6e9);
  CHECK(c.grid.fft_size == 1024);
  CHECK(c.grid.cp_len == 72);
  CHECK(c.grid.resource_blocks == 50);
  CHECK(c.taps.delays == std::vector<int>{0, 4});
  CHECK(c.taps.rician_k_db == std::vector<double>{10.0, 10.0});
  CHECK(c.estimators.selected.size() == 4);
  CHECK(c.dfo.method == DfoMethod::Proposed);
  CHECK(c.dfo.es.f_max_hz == 900.0);
  CHECK(c.dfo.es.step_hz == 2.0);
  CHECK(c.sweep.snr_db == std::vector<double>{10.0, 20.0, 30.0});
  CHECK(c.sweep.position.mode == PositionMode::P3db);
  CHECK(c.sweep.traffic == Traffic::Data);
  CHECK(c.sweep.channel_model == ChannelModel::TimeDomain);
  CHECK(c.warnings().empty());
}

TEST_CASE("fields are read from every section") {
  const SimConfig c = parse_config(R"({
    "geometry": {"speed_kmh": 300, "pathloss_exponent": 3.0},
    "grid": {"symbols_per_frame": 28},
    "pilots": {"rb_offsets": [1, 7], "seed": 9},
    "taps": {"delays": [0, 6], "rician_k_db": ["inf", 5]},
    "estimators": {"selected": ["linear", "elmmse-ideal"], "block_rb": 5, "ici_inflation": true},
    "dfo": {"method": "es", "pair_policy": "all", "es_f_max_hz": 1000, "es_step_hz": 4},
    "sweep": {"snr_db": "10:20:5", "position": 42.5, "drops": 7, "seed": 123,
              "traffic": "pilots", "channel_model": "ici_free", "threads": 2}
  })");
  CHECK(c.geometry.speed_mps == doctest::Approx(300.0 / 3.6));
  CHECK(c.pathloss_exponent == 3.0);
  CHECK(c.grid.symbols_per_frame == 28);
  CHECK(c.pilots.rb_offsets == std::vector<int>{1, 7});
  CHECK(c.pilots.seed == 9u);
  CHECK(c.taps.delays == std::vector<int>{0, 6});
  CHECK(std::isinf(c.taps.rician_k_db[0]));
  CHECK(c.taps.rician_k_db[1] == 5.0);
  CHECK(c.estimators.selected == std::vector<EstimatorKind>{EstimatorKind::Linear, EstimatorKind::ElmmseIdeal});
  CHECK(c.estimators.block_rb == 5);
  CHECK(c.estimators.ici_inflation);
  CHECK(c.dfo.method == DfoMethod::ExhaustiveSearch);
  CHECK(c.dfo.pair_policy == PairPolicy::AllPairs);
  CHECK(c.dfo.es.f_max_hz == 1000.0);
  CHECK(c.sweep.snr_db == std::vector<double>{10.0, 15.0, 20.0});
  CHECK(c.sweep.position.mode == PositionMode::Fixed);
  CHECK(c.sweep.position.x_m == 42.5);
  CHECK(c.sweep.drops == 7);
  CHECK(c.sweep.seed == 123u);
  CHECK(c.sweep.traffic == Traffic::PilotsOnly);
  CHECK(c.sweep.channel_model == ChannelModel::IciFree);
  CHECK(c.sweep.threads == 2);
}

TEST_CASE("SNR forms") {
  CHECK(parse_config(R"({"sweep": {"snr_db": 25}})").sweep.snr_db == std::vector<double>{25.0});
  CHECK(std::isinf(parse_config(R"({"sweep": {"snr_db": "inf"}})").sweep.snr_db[0]));
  const auto mixed = parse_config(R"({"sweep": {"snr_db": [5, "inf"]}})").sweep.snr_db;
  CHECK(mixed[0] == 5.0);
  CHECK(std::isinf(mixed[1]));
  CHECK(parse_snr_range("35:60:5").size() == 6);
  CHECK(parse_snr_range("0:1:0.1").size() == 11);
  CHECK(parse_snr_range("7") == std::vector<double>{7.0});
  CHECK_THROWS_AS(parse_snr_range("10:5:1"), ConfigError);
  CHECK_THROWS_AS(parse_snr_range("1:2"), ConfigError);
  CHECK_THROWS_AS(parse_snr_range("1:x:2"), ConfigError);
  CHECK_THROWS_AS(parse_snr_range("1:5:0"), ConfigError);
}

TEST_CASE("unknown keys and malformed input are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"geometri": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"fft": 512}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"drop": 5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"fft_size": "big"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"estimators": {"selected": ["wiener"]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dfo": {"method": "music"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"position": "middle"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
}

TEST_CASE("semantic validation") {
  CHECK_THROWS_AS(parse_config(R"({"grid": {"fft_size": 1000}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"taps": {"delays": [0, 80]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"taps": {"delays": [0]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"taps": {"delays": [3, 3]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"taps": {"rician_k_db": [10]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"pathloss_exponent": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"estimators": {"selected": []}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dfo": {"method": "es", "es_step_hz": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"drops": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"position": 301}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"position": "sweep", "sweep_points": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"snr_db": []}})"), ConfigError);
}

TEST_CASE("Doppler beyond the pilot alias bound is a warning") {
  const SimConfig c = parse_config(R"({"pilots": {"symbols_in_subframe": [0, 7]}, "geometry": {"speed_kmh": 500}})");
  CHECK_FALSE(c.warnings().empty());
}

TEST_CASE("canonical JSON round trips") {
  SimConfig c = parse_config(R"({"taps": {"rician_k_db": ["inf", 3]}, "sweep": {"snr_db": [10, "inf"],
                                 "position": "sweep", "sweep_points": 5, "seed": 18446744073709551615}})");
  const std::string text = to_json(c);
  const SimConfig back = parse_config(text);
  CHECK(to_json(back) == text);
  CHECK(std::isinf(back.taps.rician_k_db[0]));
  CHECK(std::isinf(back.sweep.snr_db[1]));
  CHECK(back.sweep.seed == 18446744073709551615ull);
  CHECK(back.sweep.position.mode == PositionMode::Sweep);
  CHECK(back.sweep.position.sweep_points == 5);
}

TEST_CASE("names") {
  CHECK(dfo_method_from_string(to_string(DfoMethod::Proposed)) == DfoMethod::Proposed);
  CHECK(dfo_method_from_string(to_string(DfoMethod::ExhaustiveSearch)) == DfoMethod::ExhaustiveSearch);
  CHECK(rician_k_linear(10.0) == doctest::Approx(10.0));
  CHECK(std::isinf(rician_k_linear(INFINITY)));
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
