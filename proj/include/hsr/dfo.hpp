#pragma once
// Multi-path Doppler frequency offset estimation.
//
// The pilot observations of one pilot symbol are modelled as H_p^i = D_p X_p^i
// + W_p^i, where column q of the delay basis D_p is the phase signature
// exp(-j 2 pi tau_q k_p / N) of tap q across the pilot subcarriers. A
// least-squares fit separates the taps per symbol (Z_p^i), and the phase of
// Z_q^j / Z_q^i over the symbol gap l_j - l_i gives the tap's Doppler.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hsr/grid.hpp"
#include "hsr/numerics.hpp"
#include "hsr/ofdm.hpp"

namespace hsr {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DelayBasis {
  CMatrix matrix;  // m x Q
  std::vector<int> delays;
  std::vector<int> subcarriers;
  int fft_size = 0;
  double condition = 0.0;
};

/// Throws IdentifiabilityError when cond(D_p) exceeds max_condition.
DelayBasis build_delay_basis(std::span<const int> delays, std::span<const int> subcarriers, int fft_size,
                             double max_condition = 1e6);

struct TapSeparation {
  CMatrix z;  // Q x n
  /// Complex multiplications spent on the pseudo-inverse and the products.
  std::uint64_t multiplications = 0;
};

/// Z_p = pinv(D_p) H_p.
TapSeparation separate_taps(const CMatrix& h_p, const DelayBasis& basis);

enum class PairPolicy { Consecutive, AllPairs };

struct PairEstimate {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<double> hz;  // per tap
};

struct DfoEstimate {
  std::vector<double> hz;  // per tap, mean over usable pairs
  std::vector<PairEstimate> pairs;
  double alias_bound_hz = 0.0;
  std::uint64_t multiplications = 0;
};

/// Largest |f| every selected pair resolves without wrapping:
/// N delta_f / (2 (N + N_CP) max_gap).
double alias_bound(const PilotPattern& pilots, const ResourceGrid& grid, PairPolicy policy);

/// Phase-ratio estimate averaged over the pairs chosen by `policy`. Pairs
/// touching a zero Z entry are skipped; EstimationError if none remain.
DfoEstimate estimate_dfos(const TapSeparation& sep, const PilotPattern& pilots, const ResourceGrid& grid,
                          PairPolicy policy = PairPolicy::Consecutive);

/// Basis, separation and estimation in one call.
DfoEstimate estimate_dfos_from_pilots(const CMatrix& h_p, std::span<const int> delays,
                                      const PilotPattern& pilots, const ResourceGrid& grid,
                                      PairPolicy policy = PairPolicy::Consecutive);

struct EsOptions {
  double f_max_hz = 900.0;
  double step_hz = 2.0;
};

struct EsEstimate {
  std::vector<double> hz;
  std::uint64_t multiplications = 0;
  std::size_t candidates = 0;
};

/// Exhaustive-search baseline for one or two taps. Scans every (f_0, f_1) on
/// the grid -f_max + g * step covering [-f_max, f_max] and returns the point
/// minimizing sum_i || H_p^i - D_p X(f)^i ||^2, where X_q^i = a_q
/// exp(j 2 pi f_q t_i) with the constant amplitudes a_q fitted by least
/// squares for each candidate.
EsEstimate es_estimate(const CMatrix& h_p, std::span<const int> delays, const EsOptions& options,
                       const ResourceGrid& grid, const PilotPattern& pilots);

enum class DfoMethod { Proposed, ExhaustiveSearch };

/// Closed-form multiplication counts: 10 m n for the proposed estimator and
/// m f_max (8 n + 6) / step for the exhaustive search.
double multiplication_count(DfoMethod method, double m, double n, double f_max = 0.0, double step = 1.0);

}  // namespace hsr
