#pragma once
// Monte Carlo harness: one drop is one frame through a freshly drawn channel.
// Sweeps run every (SNR, position) cell for the configured number of drops
// and reduce the drops into one record per estimator.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hsr/chanest.hpp"
#include "hsr/config.hpp"

namespace hsr {

/// Track position where the tap-0 power is twice the tap-1 power, by
/// bisection on (0, Ds/2) to 1e-7 m.
double find_p3db(const ScenarioGeometry& geometry, double pathloss_exponent);

/// Positions visited by a sweep, in ascending order.
std::vector<double> resolve_positions(const SimConfig& config);

/// Uncoded block-success proxy: modulation_bits times the fraction of blocks
/// without bit errors. Empty input gives 0.
double throughput_proxy(std::span<const std::uint8_t> block_errored, int modulation_bits = 4);

/// Normalizer of the relative DFO error: the rounded maximum Doppler of the
/// reference scenario, fixed so curves from different geometries compare.
inline constexpr double kDfoReferenceHz = 842.0;

struct EstimatorDropMetrics {
  EstimatorKind kind = EstimatorKind::Linear;
  bool valid = true;        // false when the estimator needed a DFO estimate that failed
  double mse_linear = 0.0;  // ||H_est - H_true||^2 / ||H_true||^2 over the frame
  double error_energy = 0.0;
  double channel_energy = 0.0;
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  std::size_t blocks = 0;  // resource block x subframe
  std::size_t blocks_errored = 0;
};

struct DropMetrics {
  std::vector<double> dfo_true_hz;
  std::vector<double> dfo_est_hz;  // empty when estimation failed
  bool dfo_valid = false;
  double dfo_rel_err = 0.0;  // mean over taps of |error| / kDfoReferenceHz
  std::uint64_t dfo_multiplications = 0;
  std::vector<EstimatorDropMetrics> estimators;  // config order
};

/// Per-(SNR, position) state shared by all drops of one cell.
class CellContext {
 public:
  CellContext(const SimConfig& config, double snr_db, double position_m);

  const SimConfig& config() const noexcept { return *config_; }
  double snr_db() const noexcept { return snr_db_; }
  double position_m() const noexcept { return position_m_; }
  const PilotPattern& pilots() const noexcept { return pilots_; }
  const std::array<double, 2>& powers() const noexcept { return powers_; }
  const std::array<double, 2>& dfos_hz() const noexcept { return dfos_; }
  /// Noise variance per resource element relative to unit symbol energy.
  double noise_ratio() const noexcept { return noise_ratio_; }
  /// Legacy filters do not depend on the drop. Throws std::logic_error when
  /// the legacy estimator is not selected.
  const WienerFilters& legacy_filters() const;

 private:
  const SimConfig* config_;
  double snr_db_;
  double position_m_;
  PilotPattern pilots_;
  std::array<double, 2> powers_{};
  std::array<double, 2> dfos_{};
  double noise_ratio_ = 0.0;
  std::optional<WienerFilters> legacy_;
};

DropMetrics run_drop(const CellContext& cell, std::uint64_t drop_seed);
DropMetrics run_drop(const SimConfig& config, double snr_db, double position_m, std::uint64_t drop_seed);

/// seed_cell = mix(master, snr, position, drop).
std::uint64_t drop_seed(std::uint64_t master, double snr_db, double position_m, std::uint64_t drop);

struct MetricsRecord {
  double snr_db = 0.0;
  double position_m = 0.0;
  EstimatorKind estimator = EstimatorKind::Linear;
  DfoMethod dfo_method = DfoMethod::Proposed;
  double dfo_rel_err_mean = 0.0;
  double dfo_rel_err_p95 = 0.0;
  double mse_db = 0.0;
  double ber = 0.0;
  double tp_bits_per_symbol = 0.0;
  double mult_count = 0.0;
  std::size_t drops_used = 0;
  double ci95_mse_db = 0.0;
  // per-drop values behind the summary, in drop order; NaN marks a drop the
  // estimator (or the DFO stage) could not use
  std::vector<double> drop_mse_linear;
  std::vector<double> drop_ber;
  std::vector<double> dfo_rel_errs;
};

/// Reduces the drops of one cell into one record per selected estimator.
std::vector<MetricsRecord> aggregate(const CellContext& cell, std::span<const DropMetrics> drops);

/// Cartesian product SNR x position x estimator, deterministic for any
/// thread count.
std::vector<MetricsRecord> sweep(const SimConfig& config);

std::string csv_header();
/// %.9g; infinities as "inf"/"-inf", NaN as "nan".
std::string format_number(double v);
void write_csv(std::ostream& out, std::span<const MetricsRecord> records);

/// p-quantile (0..1) with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace hsr
