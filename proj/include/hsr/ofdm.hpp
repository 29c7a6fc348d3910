#pragma once
// OFDM transmit/receive chain: pilot lattice, 16QAM, CP-OFDM modulation,
// AWGN and least-squares channel observations at the pilots.

#include <cstdint>
#include <span>
#include <vector>

#include "hsr/grid.hpp"
#include "hsr/numerics.hpp"
#include "hsr/random.hpp"

namespace hsr {

/// Pilot lattice: the same subcarriers k_1..k_m are pilots in every pilot
/// symbol l_1..l_n. values(p, i) is the known symbol at (k_p, l_i).
struct PilotPattern {
  std::vector<int> symbol_indices;
  std::vector<int> subcarriers;
  CMatrix values;

  std::size_t m() const noexcept { return subcarriers.size(); }
  std::size_t n() const noexcept { return symbol_indices.size(); }

  /// Throws std::invalid_argument unless n >= 2, m >= min_taps, indices are
  /// strictly increasing and inside the grid, and values is m x n.
  void validate(const ResourceGrid& grid, std::size_t min_taps = 1) const;
  /// symbols x used-subcarriers mask, 1 at pilot resource elements.
  std::vector<std::uint8_t> mask(const ResourceGrid& grid) const;
};

/// CRS-like layout repeated every subframe and every resource block.
struct PilotLayout {
  std::vector<int> symbols_in_subframe{0, 4, 7, 11};
  int subframe_length = 14;
  std::vector<int> rb_offsets{0, 6};
  std::uint64_t seed = 7;
};

/// Pilot values are constant-modulus QPSK drawn from `layout.seed`.
PilotPattern make_pilot_pattern(const ResourceGrid& grid, const PilotLayout& layout);

enum class Traffic { Data, PilotsOnly };

struct Frame {
  CMatrix tx_grid;  // symbols x used subcarriers
  CMatrix rx_grid;
  /// Four bits per data resource element, symbol-major then subcarrier order.
  std::vector<std::uint8_t> payload_bits;
};

/// Fills pilots and, for Traffic::Data, random 16QAM on every other element.
Frame build_frame(const ResourceGrid& grid, const PilotPattern& pilots, Traffic traffic, Rng& rng);

// Gray 16QAM, unit average energy. Bits b0 b1 b2 b3 map to
// I = (1 - 2 b0)(1 + 2 b2)/sqrt(10), Q = (1 - 2 b1)(1 + 2 b3)/sqrt(10).
CVector qam16_map(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> qam16_demap(std::span<const cplx> symbols);

/// IDFT (with 1/N) of each symbol row, prefixed by its last N_CP samples.
CVector modulate(const CMatrix& tx_grid, const ResourceGrid& grid);
/// Strips each CP and takes the DFT; returns symbols x used subcarriers.
CMatrix demodulate(std::span<const cplx> samples, const ResourceGrid& grid);

/// Time-domain power per sample that corresponds to unit power on a
/// subcarrier after demodulation.
inline double subcarrier_power_ref(const ResourceGrid& grid) { return 1.0 / grid.fft_size; }

/// Adds circular Gaussian noise of variance signal_power_ref * 10^(-snr/10).
/// snr_db = +inf leaves the samples untouched.
void add_awgn(std::span<cplx> samples, double snr_db, double signal_power_ref, Rng& rng);

struct PilotObservations {
  CMatrix h;  // m x n, column i is H_p^i
};

/// H_LS(k_p, l_i) = rx(k_p, l_i) / x_p.
PilotObservations ls_estimate(const CMatrix& rx_grid, const PilotPattern& pilots,
                              const ResourceGrid& grid);

}  // namespace hsr
