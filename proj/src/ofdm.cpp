#include "hsr/ofdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsr {

std::vector<int> ResourceGrid::used_subcarriers() const {
  std::vector<int> out(used_count());
  for (int u = 0; u < used_count(); ++u) out[u] = subcarrier(u);
  return out;
}

void ResourceGrid::validate() const {
  if (fft_size < 2 || !is_power_of_two(static_cast<std::size_t>(fft_size)))
    throw std::invalid_argument("grid: FFT size must be a power of two >= 2");
  if (cp_len <= 0 || cp_len >= fft_size) throw std::invalid_argument("grid: need 0 < N_CP < N");
  if (!(subcarrier_spacing_hz > 0.0)) throw std::invalid_argument("grid: subcarrier spacing must be > 0");
  if (resource_blocks < 1) throw std::invalid_argument("grid: at least one resource block");
  if (used_count() > fft_size) throw std::invalid_argument("grid: more used subcarriers than FFT bins");
  if (symbols_per_frame < 1) throw std::invalid_argument("grid: at least one symbol per frame");
}

namespace {

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](T a, T b) { return a >= b; }) == v.end();
}

}  // namespace

void PilotPattern::validate(const ResourceGrid& grid, std::size_t min_taps) const {
  if (n() < 2) throw std::invalid_argument("pilots: need at least two pilot symbols");
  if (m() < std::max<std::size_t>(min_taps, 1))
    throw std::invalid_argument("pilots: fewer pilot subcarriers than taps to separate");
  if (!strictly_increasing(symbol_indices) || !strictly_increasing(subcarriers))
    throw std::invalid_argument("pilots: indices must be strictly increasing");
  if (symbol_indices.front() < 0 || symbol_indices.back() >= grid.symbols_per_frame)
    throw std::invalid_argument("pilots: symbol index outside the frame");
  if (grid.used_position(subcarriers.front()) < 0 || grid.used_position(subcarriers.back()) < 0)
    throw std::invalid_argument("pilots: subcarrier outside the used band");
  if (values.rows() != m() || values.cols() != n())
    throw std::invalid_argument("pilots: value matrix must be m x n");
}

std::vector<std::uint8_t> PilotPattern::mask(const ResourceGrid& grid) const {
  const int used = grid.used_count();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(grid.symbols_per_frame) * used, 0);
  for (int l : symbol_indices)
    for (int k : subcarriers) out[static_cast<std::size_t>(l) * used + grid.used_position(k)] = 1;
  return out;
}

PilotPattern make_pilot_pattern(const ResourceGrid& grid, const PilotLayout& layout) {
  grid.validate();
  if (layout.subframe_length < 1) throw std::invalid_argument("pilot layout: subframe length must be >= 1");
  PilotPattern p;
  for (int start = 0; start < grid.symbols_per_frame; start += layout.subframe_length)
    for (int s : layout.symbols_in_subframe) {
      if (s < 0 || s >= layout.subframe_length)
        throw std::invalid_argument("pilot layout: symbol offset outside the subframe");
      if (start + s < grid.symbols_per_frame) p.symbol_indices.push_back(start + s);
    }
  for (int rb = 0; rb < grid.resource_blocks; ++rb)
    for (int off : layout.rb_offsets) {
      if (off < 0 || off >= ResourceGrid::kSubcarriersPerRb)
        throw std::invalid_argument("pilot layout: subcarrier offset outside the resource block");
      p.subcarriers.push_back(grid.subcarrier(rb * ResourceGrid::kSubcarriersPerRb + off));
    }
  std::sort(p.symbol_indices.begin(), p.symbol_indices.end());
  std::sort(p.subcarriers.begin(), p.subcarriers.end());

  Rng rng(layout.seed);
  std::uniform_int_distribution<int> quadrant(0, 3);
  p.values = CMatrix(p.m(), p.n());
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = 0; j < p.m(); ++j)
      p.values(j, i) = std::polar(1.0, kPi / 4.0 + kPi / 2.0 * quadrant(rng));
  p.validate(grid);
  return p;
}

Frame build_frame(const ResourceGrid& grid, const PilotPattern& pilots, Traffic traffic, Rng& rng) {
  pilots.validate(grid);
  const int used = grid.used_count();
  Frame f;
  f.tx_grid = CMatrix(grid.symbols_per_frame, used);
  for (std::size_t i = 0; i < pilots.n(); ++i)
    for (std::size_t p = 0; p < pilots.m(); ++p)
      f.tx_grid(pilots.symbol_indices[i], grid.used_position(pilots.subcarriers[p])) = pilots.values(p, i);
  if (traffic == Traffic::PilotsOnly) return f;

  const auto mask = pilots.mask(grid);
  const auto data_res = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 0));
  f.payload_bits.resize(4 * data_res);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& b : f.payload_bits) b = static_cast<std::uint8_t>(bit(rng));
  const CVector symbols = qam16_map(f.payload_bits);
  std::size_t s = 0;
  for (int l = 0; l < grid.symbols_per_frame; ++l)
    for (int u = 0; u < used; ++u)
      if (!mask[static_cast<std::size_t>(l) * used + u]) f.tx_grid(l, u) = symbols[s++];
  return f;
}

namespace {

const double kQamScale = 1.0 / std::sqrt(10.0);

}  // namespace

CVector qam16_map(std::span<const std::uint8_t> bits) {
  if (bits.size() % 4 != 0) throw std::invalid_argument("qam16_map: bit count must be a multiple of 4");
  CVector out(bits.size() / 4);
  for (std::size_t s = 0; s < out.size(); ++s) {
    const auto* b = &bits[4 * s];
    const double i = (1.0 - 2.0 * (b[0] & 1)) * (1.0 + 2.0 * (b[2] & 1));
    const double q = (1.0 - 2.0 * (b[1] & 1)) * (1.0 + 2.0 * (b[3] & 1));
    out[s] = cplx(i, q) * kQamScale;
  }
  return out;
}

std::vector<std::uint8_t> qam16_demap(std::span<const cplx> symbols) {
  // Thresholds at 0 and +-2/sqrt(10) give the nearest point per axis.
  const double edge = 2.0 * kQamScale;
  std::vector<std::uint8_t> bits(4 * symbols.size());
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const double i = symbols[s].real();
    const double q = symbols[s].imag();
    bits[4 * s + 0] = i < 0.0;
    bits[4 * s + 1] = q < 0.0;
    bits[4 * s + 2] = std::abs(i) > edge;
    bits[4 * s + 3] = std::abs(q) > edge;
  }
  return bits;
}

CVector modulate(const CMatrix& tx_grid, const ResourceGrid& grid) {
  grid.validate();
  if (static_cast<int>(tx_grid.rows()) != grid.symbols_per_frame ||
      static_cast<int>(tx_grid.cols()) != grid.used_count())
    throw std::invalid_argument("modulate: grid dimensions do not match the numerology");
  const int n = grid.fft_size;
  const int cp = grid.cp_len;
  CVector out(static_cast<std::size_t>(grid.frame_samples()));
  CVector bins(n);
  for (int l = 0; l < grid.symbols_per_frame; ++l) {
    std::fill(bins.begin(), bins.end(), cplx{});
    for (int u = 0; u < grid.used_count(); ++u) bins[grid.bin(grid.subcarrier(u))] = tx_grid(l, u);
    fft_radix2(bins, true);
    cplx* dst = out.data() + static_cast<std::size_t>(l) * grid.symbol_length();
    std::copy(bins.end() - cp, bins.end(), dst);
    std::copy(bins.begin(), bins.end(), dst + cp);
  }
  return out;
}

CMatrix demodulate(std::span<const cplx> samples, const ResourceGrid& grid) {
  grid.validate();
  if (static_cast<int>(samples.size()) != grid.frame_samples())
    throw std::invalid_argument("demodulate: sample count does not match the frame length");
  const int n = grid.fft_size;
  CMatrix rx(grid.symbols_per_frame, grid.used_count());
  CVector bins(n);
  for (int l = 0; l < grid.symbols_per_frame; ++l) {
    const cplx* src = samples.data() + static_cast<std::size_t>(l) * grid.symbol_length() + grid.cp_len;
    std::copy(src, src + n, bins.begin());
    fft_radix2(bins, false);
    for (int u = 0; u < grid.used_count(); ++u) rx(l, u) = bins[grid.bin(grid.subcarrier(u))];
  }
  return rx;
}

void add_awgn(std::span<cplx> samples, double snr_db, double signal_power_ref, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0.0) return;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("add_awgn: SNR must be finite or +inf");
  if (!(signal_power_ref > 0.0)) throw std::invalid_argument("add_awgn: reference power must be > 0");
  const double variance = signal_power_ref * std::pow(10.0, -snr_db / 10.0);
  for (auto& s : samples) s += complex_normal(rng, variance);
}

PilotObservations ls_estimate(const CMatrix& rx_grid, const PilotPattern& pilots,
                              const ResourceGrid& grid) {
  pilots.validate(grid);
  if (static_cast<int>(rx_grid.rows()) != grid.symbols_per_frame ||
      static_cast<int>(rx_grid.cols()) != grid.used_count())
    throw std::invalid_argument("ls_estimate: received grid does not match the numerology");
  PilotObservations obs{CMatrix(pilots.m(), pilots.n())};
  for (std::size_t i = 0; i < pilots.n(); ++i)
    for (std::size_t p = 0; p < pilots.m(); ++p) {
      const cplx x = pilots.values(p, i);
      if (x == cplx{}) throw std::invalid_argument("ls_estimate: zero pilot value");
      obs.h(p, i) = rx_grid(pilots.symbol_indices[i], grid.used_position(pilots.subcarriers[p])) / x;
    }
  return obs;
}

}  // namespace hsr
