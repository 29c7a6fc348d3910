#pragma once
// Channel correlation models and pilot-aided channel estimators.
//
// Two correlation families are provided. The legacy family assumes 2-D
// isotropic scattering: a power-delay profile across subcarriers and the
// Jakes J0(2 pi l f_D T) law across symbols. The HSR family follows from the
// two-tap model with one Doppler per tap: both correlations are sums of
// per-tap phasors weighted by |sigma_q|^2 |G(-F_q)|^2 / N^2.

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "hsr/grid.hpp"
#include "hsr/numerics.hpp"
#include "hsr/ofdm.hpp"

namespace hsr {

enum class CorrelationVariant { Legacy, Hsr };

struct TapCorrelation {
  double weight = 0.0;  // per-tap contribution to R(0)
  double delay_samples = 0.0;
  double dfo_hz = 0.0;
};

class CorrelationModel {
 public:
  /// HSR model from tap powers |sigma_q|^2, delays and Dopplers; weights get
  /// the Doppler attenuation |G(-F_q)|^2 / N^2.
  static CorrelationModel hsr(std::span<const double> powers, std::span<const double> delays,
                              std::span<const double> dfos_hz, const ResourceGrid& grid);
  /// HSR model with weights supplied directly (e.g. mean |Z_q|^2 from tap
  /// separation, which already carries the attenuation).
  static CorrelationModel hsr_weighted(std::span<const double> weights, std::span<const double> delays,
                                       std::span<const double> dfos_hz, const ResourceGrid& grid);
  static CorrelationModel legacy(std::span<const double> powers, std::span<const double> delays,
                                 double max_dfo_hz, const ResourceGrid& grid);

  CorrelationVariant variant() const noexcept { return variant_; }
  const std::vector<TapCorrelation>& taps() const noexcept { return taps_; }
  double max_dfo_hz() const noexcept { return max_dfo_hz_; }

  /// Correlation across subcarriers at lag dk (subcarrier units).
  cplx freq(double dk) const;
  /// Correlation across OFDM symbols at lag dl (symbol units).
  cplx time(double dl) const;

 private:
  CorrelationModel(CorrelationVariant v, std::vector<TapCorrelation> taps, double max_dfo,
                   const ResourceGrid& grid);

  CorrelationVariant variant_;
  std::vector<TapCorrelation> taps_;
  double max_dfo_hz_ = 0.0;
  int fft_size_ = 0;
  double symbol_duration_ = 0.0;
};

// Variant-checked accessors; throw std::invalid_argument on the wrong model.
cplx corr_freq_hsr(double dk, const CorrelationModel& model);
cplx corr_time_hsr(double dl, const CorrelationModel& model);
cplx corr_freq_legacy(double dk, const CorrelationModel& model);
double corr_time_legacy(double dl, const CorrelationModel& model);

using CorrelationFn = std::function<cplx(double)>;

/// W = R_tp (R_pp + noise_ratio I)^-1 with R_tp(i,j) = corr(target_i -
/// pilot_j) and R_pp(i,j) = corr(pilot_i - pilot_j).
CMatrix build_wiener(std::span<const double> targets, std::span<const double> pilots, const CorrelationFn& corr,
                     double noise_ratio);

/// One frequency window: used positions [first_used, first_used + count)
/// estimated from the pilot rows falling inside it.
struct FrequencyBlock {
  int first_used = 0;
  int count = 0;
  std::vector<std::size_t> pilot_rows;
  CMatrix filter;  // count x pilot_rows.size()
};

struct WienerFilters {
  std::vector<FrequencyBlock> freq;
  CMatrix time;  // symbols x pilot symbols
  double noise_ratio = 0.0;
};

/// Frequency filters over non-overlapping windows of `block_rb` resource
/// blocks, time filter over the whole frame.
WienerFilters make_wiener_filters(const CorrelationModel& model, const PilotPattern& pilots,
                                  const ResourceGrid& grid, double noise_ratio, int block_rb = 2);

enum class EstimatorKind { Linear, LmmseLegacy, ElmmseIdeal, ElmmseEstimated };

std::string_view to_string(EstimatorKind kind);
/// Throws std::invalid_argument for an unknown name.
EstimatorKind estimator_from_string(std::string_view name);

struct ChannelEstimate {
  CMatrix h;  // symbols x used subcarriers
  EstimatorKind method = EstimatorKind::Linear;
};

/// H_Est = W_T W_F H_LS: frequency filtering within each pilot symbol, then
/// time filtering along each subcarrier.
ChannelEstimate lmmse_estimate(const PilotObservations& obs, const WienerFilters& filters,
                               const ResourceGrid& grid, EstimatorKind tag);

/// Piecewise-linear interpolation across subcarriers, then across symbols.
/// Edges extrapolate along the nearest segment.
ChannelEstimate linear_interp_estimate(const PilotObservations& obs, const PilotPattern& pilots,
                                       const ResourceGrid& grid);

}  // namespace hsr
