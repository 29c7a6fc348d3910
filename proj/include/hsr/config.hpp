#pragma once
// Simulation configuration and its JSON form.
//
// Every field has a default, so "{}" is a valid configuration. Unknown keys
// are rejected at every level. SNR values and Rician K factors accept the
// string "inf".

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsr/chanest.hpp"
#include "hsr/channel.hpp"
#include "hsr/dfo.hpp"
#include "hsr/grid.hpp"
#include "hsr/ofdm.hpp"

namespace hsr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PositionMode { Fixed, P3db, Sweep };

struct PositionSpec {
  PositionMode mode = PositionMode::P3db;
  double x_m = 0.0;       // PositionMode::Fixed
  int sweep_points = 11;  // PositionMode::Sweep, evenly spaced over [0, Ds]
};

/// TimeDomain runs the full CP-OFDM chain through the time-varying channel.
/// IciFree observes rx = H_fading * x + noise directly on the grid, leaving
/// out inter-carrier interference.
enum class ChannelModel { TimeDomain, IciFree };

struct TapConfig {
  std::vector<int> delays{0, 4};
  std::vector<double> rician_k_db{10.0, 10.0};
};

struct EstimatorConfig {
  std::vector<EstimatorKind> selected{EstimatorKind::Linear, EstimatorKind::LmmseLegacy,
                                      EstimatorKind::ElmmseIdeal, EstimatorKind::ElmmseEstimated};
  int block_rb = 2;
  /// Add the expected ICI power to the Wiener noise term.
  bool ici_inflation = false;
};

struct DfoConfig {
  DfoMethod method = DfoMethod::Proposed;
  PairPolicy pair_policy = PairPolicy::Consecutive;
  EsOptions es;
};

struct SweepConfig {
  std::vector<double> snr_db{10.0, 20.0, 30.0};
  PositionSpec position;
  int drops = 20;
  std::uint64_t seed = 1;
  Traffic traffic = Traffic::Data;
  ChannelModel channel_model = ChannelModel::TimeDomain;
  int threads = 0;  // 0: hardware concurrency
};

struct SimConfig {
  ScenarioGeometry geometry;
  double pathloss_exponent = 2.0;
  ResourceGrid grid;
  PilotLayout pilots;
  TapConfig taps;
  EstimatorConfig estimators;
  DfoConfig dfo;
  SweepConfig sweep;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Non-fatal issues, e.g. a maximum Doppler beyond the pilot alias bound.
  std::vector<std::string> warnings() const;
};

SimConfig parse_config(std::string_view json_text);
SimConfig load_config(const std::filesystem::path& path);
/// Canonical JSON with every field spelled out; parse_config round-trips it.
std::string to_json(const SimConfig& config);

/// "a:b:step" inclusive of b (within step/1e6), or a single value "a".
std::vector<double> parse_snr_range(std::string_view text);

std::string_view to_string(DfoMethod method);
DfoMethod dfo_method_from_string(std::string_view name);

/// Linear Rician K from dB; +inf stays +inf.
double rician_k_linear(double k_db);

}  // namespace hsr
