// hsrsim: command-line front end for the HSR link simulator.
//
//   hsrsim simulate --config cfg.json --out results.csv [--snr 0:30:5] ...
//   hsrsim sir [--config cfg.json] [--position 150]
//   hsrsim complexity --m 2 --n 4 --f-max 900 --step 2

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsr/channel.hpp"
#include "hsr/config.hpp"
#include "hsr/dfo.hpp"
#include "hsr/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

hsr::SimConfig base_config(const std::string& path) {
  return path.empty() ? hsr::parse_config("{}") : hsr::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-tap high-speed-railway OFDM link simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo sweep and write the metrics CSV");
  std::string config_path, out_path, snr_text, position_text, estimators_text, dfo_text;
  std::optional<std::uint64_t> seed;
  std::optional<int> drops, threads;
  sim->add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)");
  sim->add_option("--out", out_path, "CSV output path (stdout when omitted)");
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--drops", drops, "Drops per cell")->check(CLI::PositiveNumber);
  sim->add_option("--snr", snr_text, "SNR list as a:b:step or a single value (dB)");
  sim->add_option("--position", position_text, "Track position in metres, p3db or sweep");
  sim->add_option("--estimators", estimators_text,
                  "Comma list of linear,lmmse-legacy,elmmse-ideal,elmmse-estimated");
  sim->add_option("--dfo", dfo_text, "DFO method")->check(CLI::IsMember({"proposed", "es"}));
  sim->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  auto* sir = app.add_subcommand("sir", "Print the signal-to-ICI ratio for two zero-delay taps");
  std::string sir_config;
  std::optional<double> sir_position;
  sir->add_option("--config", sir_config, "JSON configuration file");
  sir->add_option("--position", sir_position, "Track position in metres (default: midpoint)");

  auto* cx = app.add_subcommand("complexity", "Print multiplication counts of both DFO estimators");
  double cm = 2, cn = 4, f_max = 900, step = 2;
  cx->add_option("--m", cm, "Pilot subcarriers")->check(CLI::NonNegativeNumber);
  cx->add_option("--n", cn, "Pilot symbols")->check(CLI::NonNegativeNumber);
  cx->add_option("--f-max", f_max, "ES search half-range (Hz)");
  cx->add_option("--step", step, "ES grid step (Hz)")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      hsr::SimConfig cfg = base_config(config_path);
      if (seed) cfg.sweep.seed = *seed;
      if (drops) cfg.sweep.drops = *drops;
      if (threads) cfg.sweep.threads = *threads;
      if (!snr_text.empty()) cfg.sweep.snr_db = hsr::parse_snr_range(snr_text);
      if (!position_text.empty()) {
        if (position_text == "p3db") {
          cfg.sweep.position.mode = hsr::PositionMode::P3db;
        } else if (position_text == "sweep") {
          cfg.sweep.position.mode = hsr::PositionMode::Sweep;
        } else {
          cfg.sweep.position.mode = hsr::PositionMode::Fixed;
          try {
            cfg.sweep.position.x_m = std::stod(position_text);
          } catch (const std::exception&) {
            throw hsr::ConfigError("--position: expected metres, p3db or sweep");
          }
        }
      }
      if (!estimators_text.empty()) {
        cfg.estimators.selected.clear();
        for (const auto& e : split_list(estimators_text)) cfg.estimators.selected.push_back(hsr::estimator_from_string(e));
      }
      if (!dfo_text.empty()) cfg.dfo.method = hsr::dfo_method_from_string(dfo_text);
      cfg.validate();
      for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';

      const auto records = hsr::sweep(cfg);
      if (out_path.empty()) {
        hsr::write_csv(std::cout, records);
      } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        hsr::write_csv(out, records);
      }
      return 0;
    }

    if (*sir) {
      const hsr::SimConfig cfg = base_config(sir_config);
      const double x = sir_position.value_or(cfg.geometry.inter_rrh_distance_m / 2.0);
      const auto p = hsr::tap_powers_at(x, cfg.geometry, cfg.pathloss_exponent);
      const auto f = hsr::tap_dfos_at(x, cfg.geometry);
      std::vector<hsr::TapState> taps(2);
      for (int q = 0; q < 2; ++q) taps[q] = {hsr::cplx(std::sqrt(p[q])), 0, f[q]};
      std::printf("position_m %.6f\n", x);
      std::printf("max_dfo_hz %.6f\n", hsr::max_dfo(cfg.geometry));
      for (int q = 0; q < 2; ++q) std::printf("tap%d power %.6f dfo_hz %.6f\n", q, p[q], f[q]);
      std::printf("sir_db %.6f\n", hsr::sir_db(taps, cfg.grid));
      return 0;
    }

    if (*cx) {
      const double prop = hsr::multiplication_count(hsr::DfoMethod::Proposed, cm, cn);
      const double es = hsr::multiplication_count(hsr::DfoMethod::ExhaustiveSearch, cm, cn, f_max, step);
      std::printf("proposed %s\n", hsr::format_number(prop).c_str());
      std::printf("es %s\n", hsr::format_number(es).c_str());
      std::printf("ratio %s\n", hsr::format_number(es / prop).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
