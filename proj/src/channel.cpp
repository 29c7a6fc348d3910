#include "hsr/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace hsr {

void ScenarioGeometry::validate() const {
  if (!(inter_rrh_distance_m > 0.0)) throw std::invalid_argument("geometry: Ds must be > 0");
  if (!(track_offset_m > 0.0)) throw std::invalid_argument("geometry: Dmin must be > 0");
  if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps))
    throw std::invalid_argument("geometry: speed must be finite and >= 0");
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("geometry: carrier frequency must be > 0");
  if (rrh_count < 2) throw std::invalid_argument("geometry: at least two RRHs share the cell");
  if (!(light_speed_mps > 0.0)) throw std::invalid_argument("geometry: propagation speed must be > 0");
}

double max_dfo(const ScenarioGeometry& geometry) {
  geometry.validate();
  return geometry.speed_mps * geometry.carrier_hz / geometry.light_speed_mps;
}

namespace {

void check_position(double x, const ScenarioGeometry& g) {
  if (!(x >= 0.0 && x <= g.inter_rrh_distance_m))
    throw std::invalid_argument("track position must lie in [0, Ds]");
}

}  // namespace

std::array<double, 2> tap_dfos_at(double x, const ScenarioGeometry& geometry) {
  const double fd = max_dfo(geometry);
  check_position(x, geometry);
  const double dmin = geometry.track_offset_m;
  const double ahead = geometry.inter_rrh_distance_m - x;
  return {fd * (-x) / std::hypot(x, dmin), fd * ahead / std::hypot(ahead, dmin)};
}

std::array<double, 2> tap_powers_at(double x, const ScenarioGeometry& geometry,
                                    double pathloss_exponent) {
  geometry.validate();
  check_position(x, geometry);
  if (!(pathloss_exponent >= 2.0)) throw std::invalid_argument("pathloss exponent must be >= 2");
  const double dmin = geometry.track_offset_m;
  const double d0 = std::hypot(x, dmin);
  const double d1 = std::hypot(geometry.inter_rrh_distance_m - x, dmin);
  // ratio form avoids underflow of d^-n for large exponents
  const double r = std::pow(d0 / d1, pathloss_exponent);  // p1 / p0
  const double p0 = 1.0 / (1.0 + r);
  return {p0, 1.0 - p0};
}

CVector draw_tap_gains(std::span<const double> powers, std::span<const double> rician_k, Rng& rng) {
  if (powers.size() != rician_k.size())
    throw std::invalid_argument("draw_tap_gains: powers and K-factors differ in length");
  CVector gains(powers.size());
  for (std::size_t q = 0; q < powers.size(); ++q) {
    const double p = powers[q];
    const double k = rician_k[q];
    if (!(p >= 0.0)) throw std::invalid_argument("draw_tap_gains: negative power");
    if (!(k >= 0.0)) throw std::invalid_argument("draw_tap_gains: K-factor must be >= 0");
    const cplx los = std::polar(1.0, kTwoPi * uniform01(rng));
    if (std::isinf(k)) {
      gains[q] = std::sqrt(p) * los;
    } else {
      const cplx diffuse = complex_normal(rng);
      gains[q] = std::sqrt(p) * (std::sqrt(k / (k + 1.0)) * los + std::sqrt(1.0 / (k + 1.0)) * diffuse);
    }
  }
  return gains;
}

cplx a_term(int k, int dk, const TapState& tap, const ResourceGrid& grid) {
  const double n = grid.fft_size;
  const cplx g = dirichlet_kernel(dk - normalized_dfo(tap, grid), grid.fft_size);
  const double delay_phase = -kTwoPi * tap.delay_samples * static_cast<double>(k - dk) / n;
  return tap.amplitude * g * std::polar(1.0 / n, delay_phase);
}

cplx symbol_phase(const TapState& tap, int l, const ResourceGrid& grid) {
  const double f = normalized_dfo(tap, grid);
  return std::polar(1.0, kTwoPi * f * l * grid.symbol_length() / grid.fft_size);
}

FreqResponse analytic_freq_response(int k, int l, std::span<const TapState> taps,
                                    const ResourceGrid& grid) {
  FreqResponse out{{}, CVector(taps.size())};
  for (std::size_t q = 0; q < taps.size(); ++q) {
    out.tap_terms[q] = a_term(k, 0, taps[q], grid) * symbol_phase(taps[q], l, grid);
    out.fading += out.tap_terms[q];
  }
  return out;
}

CMatrix fading_grid(std::span<const TapState> taps, const ResourceGrid& grid) {
  const int used = grid.used_count();
  const int symbols = grid.symbols_per_frame;
  CMatrix h(symbols, used);
  CVector coupling(used);
  for (const auto& tap : taps) {
    for (int u = 0; u < used; ++u) coupling[u] = a_term(grid.subcarrier(u), 0, tap, grid);
    for (int l = 0; l < symbols; ++l) {
      const cplx ph = symbol_phase(tap, l, grid);
      auto row = h.row(l);
      for (int u = 0; u < used; ++u) row[u] += coupling[u] * ph;
    }
  }
  return h;
}

cplx ici_term(int k, int l, std::span<const TapState> taps, std::span<const cplx> symbols,
              const ResourceGrid& grid) {
  if (static_cast<int>(symbols.size()) != grid.used_count())
    throw std::invalid_argument("ici_term: symbol vector must cover the used subcarriers");
  CVector phases(taps.size());
  for (std::size_t q = 0; q < taps.size(); ++q) phases[q] = symbol_phase(taps[q], l, grid);
  cplx acc{};
  for (int u = 0; u < grid.used_count(); ++u) {
    const int i = grid.subcarrier(u);
    if (i == k || symbols[u] == cplx{}) continue;
    cplx coupling{};
    for (std::size_t q = 0; q < taps.size(); ++q) coupling += a_term(k, k - i, taps[q], grid) * phases[q];
    acc += symbols[u] * coupling;
  }
  return acc;
}

double ici_power(std::span<const TapState> taps, const ResourceGrid& grid, int k) {
  const double n = grid.fft_size;
  double total = 0.0;
  for (int u = 0; u < grid.used_count(); ++u) {
    const int i = grid.subcarrier(u);
    if (i == k) continue;
    for (const auto& tap : taps)
      total += std::norm(tap.amplitude) *
               std::norm(dirichlet_kernel(k - i - normalized_dfo(tap, grid), grid.fft_size)) / (n * n);
  }
  return total;
}

double sir_db(std::span<const TapState> taps, const ResourceGrid& grid) {
  for (const auto& tap : taps)
    if (tap.delay_samples != 0) throw std::invalid_argument("sir_db: taps must have zero delay");
  const double n = grid.fft_size;
  double signal = 0.0;
  for (const auto& tap : taps)
    signal += std::norm(tap.amplitude * dirichlet_kernel(-normalized_dfo(tap, grid), grid.fft_size)) / (n * n);
  const double interference = ici_power(taps, grid, 0);
  if (interference == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / interference);
}

CVector apply_channel_time_domain(std::span<const cplx> samples, std::span<const TapState> taps,
                                  double t0, const ResourceGrid& grid) {
  if (static_cast<int>(samples.size()) < grid.symbol_length())
    throw std::invalid_argument("apply_channel_time_domain: fewer samples than one OFDM symbol");
  for (const auto& tap : taps) {
    if (tap.delay_samples < 0 || tap.delay_samples >= grid.cp_len)
      throw std::invalid_argument("apply_channel_time_domain: tap delay must lie within the cyclic prefix");
  }
  const double ts = grid.sample_period();
  CVector out(samples.size());
  for (const auto& tap : taps) {
    const auto d = static_cast<std::size_t>(tap.delay_samples);
    const double w = kTwoPi * tap.dfo_hz;
    for (std::size_t n = d; n < samples.size(); ++n) {
      const double t = t0 + static_cast<double>(n) * ts;
      out[n] += tap.amplitude * samples[n - d] * std::polar(1.0, w * t);
    }
  }
  return out;
}

}  // namespace hsr
