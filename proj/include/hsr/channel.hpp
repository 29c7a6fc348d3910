#pragma once
// Two-tap high-speed-railway channel: geometry-driven Doppler and power per
// tap, Rician tap gains, exact time-domain application and the analytic
// per-subcarrier response split into fading and inter-carrier interference.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hsr/grid.hpp"
#include "hsr/numerics.hpp"
#include "hsr/random.hpp"

namespace hsr {

/// Track layout. RRH1 stands at track coordinate 0, RRH2 at Ds; both are
/// Dmin off the track. The train moves towards +x.
struct ScenarioGeometry {
  double inter_rrh_distance_m = 300.0;  // Ds
  double track_offset_m = 2.0;          // Dmin
  double speed_mps = 350.0 / 3.6;
  double carrier_hz = 2.6e9;
  int rrh_count = 2;
  double light_speed_mps = 2.998e8;

  void validate() const;
};

struct TapState {
  cplx amplitude{1.0, 0.0};
  int delay_samples = 0;
  double dfo_hz = 0.0;
  /// Linear LOS/diffuse power ratio; +inf means a pure LOS tap.
  double rician_k = std::numeric_limits<double>::infinity();
};

struct ChannelRealization {
  std::vector<TapState> taps;
  std::uint64_t seed = 0;
};

/// v * fc / c.
double max_dfo(const ScenarioGeometry& geometry);

/// Per-tap Doppler at track position x in [0, Ds]. Positive when the UE
/// approaches the RRH: tap 0 (behind, RRH1) is negative, tap 1 (ahead) positive.
std::array<double, 2> tap_dfos_at(double x, const ScenarioGeometry& geometry);

/// Per-tap received power from distance^-exponent, normalized to sum 1.
std::array<double, 2> tap_powers_at(double x, const ScenarioGeometry& geometry,
                                    double pathloss_exponent);

/// Draws sigma_q = sqrt(p_q) [sqrt(K/(K+1)) e^{j phi} + sqrt(1/(K+1)) CN(0,1)].
CVector draw_tap_gains(std::span<const double> powers, std::span<const double> rician_k, Rng& rng);

/// Doppler normalized by the subcarrier spacing, F = f / delta_f.
inline double normalized_dfo(const TapState& tap, const ResourceGrid& grid) {
  return tap.dfo_hz / grid.subcarrier_spacing_hz;
}

/// Coupling from source subcarrier k - dk onto subcarrier k through one tap:
/// (1/N) sigma G(dk - F) exp(-j 2 pi tau (k - dk) / N).
cplx a_term(int k, int dk, const TapState& tap, const ResourceGrid& grid);

/// exp(j 2 pi F l (N + N_CP) / N): Doppler rotation of symbol l relative to
/// symbol 0.
cplx symbol_phase(const TapState& tap, int l, const ResourceGrid& grid);

struct FreqResponse {
  cplx fading;
  /// Per-tap contribution A_q(k,0) times its symbol phase; sums to `fading`.
  CVector tap_terms;
};

FreqResponse analytic_freq_response(int k, int l, std::span<const TapState> taps,
                                    const ResourceGrid& grid);

/// Fading coefficient over the whole frame: symbols x used subcarriers.
CMatrix fading_grid(std::span<const TapState> taps, const ResourceGrid& grid);

/// Interference on subcarrier k of symbol l from every other used subcarrier.
/// `symbols` holds the transmitted values by used position.
cplx ici_term(int k, int l, std::span<const TapState> taps, std::span<const cplx> symbols,
              const ResourceGrid& grid);

/// Expected ICI power on subcarrier k for unit-energy independent symbols on
/// all other used subcarriers (tap cross-terms neglected).
double ici_power(std::span<const TapState> taps, const ResourceGrid& grid, int k = 0);

/// Signal-to-ICI ratio in dB at the band centre. Taps must have zero delay.
/// Returns +inf when no interference leaks.
double sir_db(std::span<const TapState> taps, const ResourceGrid& grid);

/// out[n] = sum_q sigma_q in[n - tau_q] exp(j 2 pi f_q (t0 + n Ts)).
/// Samples before the start of `samples` are taken as zero.
CVector apply_channel_time_domain(std::span<const cplx> samples, std::span<const TapState> taps,
                                  double t0, const ResourceGrid& grid);

}  // namespace hsr
