#include "hsr/dfo.hpp"

#include <algorithm>
#include <cmath>

namespace hsr {

DelayBasis build_delay_basis(std::span<const int> delays, std::span<const int> subcarriers, int fft_size,
                             double max_condition) {
  if (delays.empty()) throw std::invalid_argument("build_delay_basis: need at least one tap");
  if (subcarriers.size() < delays.size())
    throw IdentifiabilityError("build_delay_basis: fewer pilot subcarriers than taps");
  if (fft_size < 1) throw std::invalid_argument("build_delay_basis: FFT size must be >= 1");
  DelayBasis b;
  b.delays.assign(delays.begin(), delays.end());
  b.subcarriers.assign(subcarriers.begin(), subcarriers.end());
  b.fft_size = fft_size;
  b.matrix = CMatrix(subcarriers.size(), delays.size());
  for (std::size_t p = 0; p < subcarriers.size(); ++p)
    for (std::size_t q = 0; q < delays.size(); ++q) {
      // reduce tau*k mod N so the phase argument stays small
      const long long prod = static_cast<long long>(delays[q]) * subcarriers[p];
      const long long red = ((prod % fft_size) + fft_size) % fft_size;
      b.matrix(p, q) = std::polar(1.0, -kTwoPi * static_cast<double>(red) / fft_size);
    }
  b.condition = condition_number(b.matrix);
  if (!(b.condition <= max_condition))
    throw IdentifiabilityError("build_delay_basis: tap delays not separable on these pilots (condition " +
                               std::to_string(b.condition) + ")");
  return b;
}

TapSeparation separate_taps(const CMatrix& h_p, const DelayBasis& basis) {
  if (h_p.rows() != basis.matrix.rows())
    throw std::invalid_argument("separate_taps: observation rows differ from basis rows");
  const CMatrix pinv = pseudo_inverse(basis.matrix, std::max(basis.condition * 2.0, 1e6));
  TapSeparation sep{pinv * h_p, 0};
  const auto m = static_cast<std::uint64_t>(basis.matrix.rows());
  const auto q = static_cast<std::uint64_t>(basis.matrix.cols());
  const auto n = static_cast<std::uint64_t>(h_p.cols());
  // Gram A^H A and pinv = Gram^-1 A^H cost q*q*m each; the Q=2 inverse costs 6.
  sep.multiplications = 2 * q * q * m + (q == 2 ? 6 : q * q * q) + q * m * n;
  return sep;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::size_t n, PairPolicy policy) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (policy == PairPolicy::Consecutive) {
    for (std::size_t i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
  }
  return out;
}

}  // namespace

double alias_bound(const PilotPattern& pilots, const ResourceGrid& grid, PairPolicy policy) {
  int max_gap = 0;
  for (auto [i, j] : select_pairs(pilots.n(), policy))
    max_gap = std::max(max_gap, pilots.symbol_indices[j] - pilots.symbol_indices[i]);
  if (max_gap == 0) return 0.0;
  return grid.fft_size * grid.subcarrier_spacing_hz / (2.0 * grid.symbol_length() * max_gap);
}

DfoEstimate estimate_dfos(const TapSeparation& sep, const PilotPattern& pilots, const ResourceGrid& grid,
                          PairPolicy policy) {
  const std::size_t taps = sep.z.rows();
  const std::size_t n = sep.z.cols();
  if (n != pilots.n()) throw std::invalid_argument("estimate_dfos: Z columns differ from pilot symbols");
  if (n < 2) throw EstimationError("estimate_dfos: need at least two pilot symbols");

  const double scale = grid.fft_size * grid.subcarrier_spacing_hz / (kTwoPi * grid.symbol_length());
  DfoEstimate est;
  est.hz.assign(taps, 0.0);
  est.alias_bound_hz = alias_bound(pilots, grid, policy);
  est.multiplications = sep.multiplications;

  for (auto [i, j] : select_pairs(n, policy)) {
    bool usable = true;
    for (std::size_t q = 0; q < taps && usable; ++q)
      usable = sep.z(q, i) != cplx{} && sep.z(q, j) != cplx{};
    if (!usable) continue;
    const double gap = pilots.symbol_indices[j] - pilots.symbol_indices[i];
    PairEstimate pe{i, j, std::vector<double>(taps)};
    for (std::size_t q = 0; q < taps; ++q) {
      // angle(Z_j / Z_i) computed as angle(Z_j conj(Z_i)), one multiplication
      pe.hz[q] = std::arg(sep.z(q, j) * std::conj(sep.z(q, i))) * scale / gap;
      est.hz[q] += pe.hz[q];
    }
    est.multiplications += taps;
    est.pairs.push_back(std::move(pe));
  }
  if (est.pairs.empty()) throw EstimationError("estimate_dfos: every pilot-symbol pair was unusable");
  for (auto& f : est.hz) f /= static_cast<double>(est.pairs.size());
  return est;
}

DfoEstimate estimate_dfos_from_pilots(const CMatrix& h_p, std::span<const int> delays,
                                      const PilotPattern& pilots, const ResourceGrid& grid,
                                      PairPolicy policy) {
  const DelayBasis basis = build_delay_basis(delays, pilots.subcarriers, grid.fft_size);
  return estimate_dfos(separate_taps(h_p, basis), pilots, grid, policy);
}

EsEstimate es_estimate(const CMatrix& h_p, std::span<const int> delays, const EsOptions& options,
                       const ResourceGrid& grid, const PilotPattern& pilots) {
  if (!(options.step_hz > 0.0)) throw std::invalid_argument("es_estimate: step must be > 0");
  if (!(options.f_max_hz >= 0.0)) throw std::invalid_argument("es_estimate: f_max must be >= 0");
  if (delays.empty() || delays.size() > 2)
    throw std::invalid_argument("es_estimate: exhaustive search supports one or two taps");
  if (h_p.cols() != pilots.n()) throw std::invalid_argument("es_estimate: observation columns differ from pilot symbols");

  const DelayBasis basis = build_delay_basis(delays, pilots.subcarriers, grid.fft_size);
  const TapSeparation sep = separate_taps(h_p, basis);
  const CMatrix gram = basis.matrix.adjoint() * basis.matrix;
  const CMatrix y = gram * sep.z;  // equals D^H H
  const std::size_t n = pilots.n();
  const std::size_t taps = delays.size();

  EsEstimate out;
  out.multiplications = sep.multiplications + taps * taps * basis.matrix.rows() + taps * taps * n;

  const auto points = static_cast<std::size_t>(std::floor(2.0 * options.f_max_hz / options.step_hz + 1e-9)) + 1;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = pilots.symbol_indices[i] * grid.symbol_duration();
  auto freq = [&](std::size_t g) { return -options.f_max_hz + static_cast<double>(g) * options.step_hz; };

  // b_q(g) = sum_i conj(exp(j 2 pi f_g t_i)) y_q^i
  std::vector<CVector> b(taps, CVector(points));
  for (std::size_t g = 0; g < points; ++g) {
    const double w = kTwoPi * freq(g);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx ph = std::polar(1.0, -w * t[i]);
      for (std::size_t q = 0; q < taps; ++q) b[q][g] += ph * y(q, i);
    }
  }
  out.multiplications += taps * points * n;

  const double n_d = static_cast<double>(n);
  if (taps == 1) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < points; ++g)
      if (std::norm(b[0][g]) > std::norm(b[0][best])) best = g;
    out.hz = {freq(best)};
    out.candidates = points;
    out.multiplications += points;
    return out;
  }

  // Cross term of the 2x2 normal matrix depends on f_1 - f_0 only:
  // M01 = gram01 * sum_i exp(j 2 pi (f_1 - f_0) t_i).
  CVector cross(2 * points - 1);
  for (std::size_t d = 0; d < cross.size(); ++d) {
    const double w = kTwoPi * (static_cast<double>(d) - static_cast<double>(points - 1)) * options.step_hz;
    cplx s{};
    for (std::size_t i = 0; i < n; ++i) s += std::polar(1.0, w * t[i]);
    cross[d] = gram(0, 1) * s;
  }
  out.multiplications += cross.size() * (n + 1);

  const double m00 = n_d * gram(0, 0).real();
  const double m11 = n_d * gram(1, 1).real();
  double best_val = -1.0;
  std::size_t best0 = 0, best1 = 0;
  for (std::size_t g0 = 0; g0 < points; ++g0) {
    const cplx b0 = b[0][g0];
    const double p0 = m11 * std::norm(b0);
    const cplx b0c = std::conj(b0);
    for (std::size_t g1 = 0; g1 < points; ++g1) {
      const cplx m01 = cross[g1 + points - 1 - g0];
      const double det = m00 * m11 - std::norm(m01);
      // b^H M^-1 b; the residual is ||H||^2 minus this quantity
      const double val = (p0 + m00 * std::norm(b[1][g1]) - 2.0 * std::real(b0c * m01 * b[1][g1])) / det;
      if (val > best_val) {
        best_val = val;
        best0 = g0;
        best1 = g1;
      }
    }
  }
  out.candidates = points * points;
  out.multiplications += static_cast<std::uint64_t>(points) * points * 5;
  out.hz = {freq(best0), freq(best1)};
  return out;
}

double multiplication_count(DfoMethod method, double m, double n, double f_max, double step) {
  if (m < 0 || n < 0) throw std::invalid_argument("multiplication_count: negative dimensions");
  if (method == DfoMethod::Proposed) return 10.0 * m * n;
  if (!(step > 0.0)) throw std::invalid_argument("multiplication_count: step must be > 0");
  return m * f_max * (8.0 * n + 6.0) / step;
}

}  // namespace hsr
