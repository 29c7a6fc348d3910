#pragma once

#include <vector>

namespace hsr {

/// OFDM numerology and the used-subcarrier band.
///
/// Subcarriers are addressed by signed frequency index k in
/// [-used/2, used/2); the FFT bin of k is k mod N. Every phase term
/// exp(-j 2 pi tau k / N) is written in terms of this signed index, which is
/// equivalent to the bin index for integer delays.
struct ResourceGrid {
  int fft_size = 1024;
  int cp_len = 72;
  double subcarrier_spacing_hz = 15e3;
  int resource_blocks = 50;
  int symbols_per_frame = 140;

  static constexpr int kSubcarriersPerRb = 12;

  int used_count() const noexcept { return kSubcarriersPerRb * resource_blocks; }
  int first_subcarrier() const noexcept { return -used_count() / 2; }
  /// Signed frequency index of used position u in [0, used_count()).
  int subcarrier(int u) const noexcept { return first_subcarrier() + u; }
  /// Used position of signed index k, or -1 if k is outside the band.
  int used_position(int k) const noexcept {
    const int u = k - first_subcarrier();
    return (u >= 0 && u < used_count()) ? u : -1;
  }
  int bin(int k) const noexcept { return ((k % fft_size) + fft_size) % fft_size; }
  std::vector<int> used_subcarriers() const;

  int symbol_length() const noexcept { return fft_size + cp_len; }
  double sample_period() const noexcept { return 1.0 / (fft_size * subcarrier_spacing_hz); }
  double symbol_duration() const noexcept { return symbol_length() * sample_period(); }
  /// Samples in one frame including cyclic prefixes.
  int frame_samples() const noexcept { return symbols_per_frame * symbol_length(); }

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

}  // namespace hsr
