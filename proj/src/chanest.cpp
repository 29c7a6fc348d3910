#include "hsr/chanest.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsr {

CorrelationModel::CorrelationModel(CorrelationVariant v, std::vector<TapCorrelation> taps, double max_dfo,
                                   const ResourceGrid& grid)
    : variant_(v),
      taps_(std::move(taps)),
      max_dfo_hz_(max_dfo),
      fft_size_(grid.fft_size),
      symbol_duration_(grid.symbol_duration()) {
  for (const auto& t : taps_)
    if (!(t.weight >= 0.0)) throw std::invalid_argument("correlation model: tap powers must be >= 0");
}

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c || a == 0) throw std::invalid_argument("correlation model: per-tap arrays differ in length");
}

}  // namespace

CorrelationModel CorrelationModel::hsr(std::span<const double> powers, std::span<const double> delays,
                                       std::span<const double> dfos_hz, const ResourceGrid& grid) {
  check_lengths(powers.size(), delays.size(), dfos_hz.size());
  std::vector<double> weights(powers.size());
  const double n = grid.fft_size;
  for (std::size_t q = 0; q < powers.size(); ++q)
    weights[q] = powers[q] *
                 std::norm(dirichlet_kernel(-dfos_hz[q] / grid.subcarrier_spacing_hz, grid.fft_size)) / (n * n);
  return hsr_weighted(weights, delays, dfos_hz, grid);
}

CorrelationModel CorrelationModel::hsr_weighted(std::span<const double> weights, std::span<const double> delays,
                                                std::span<const double> dfos_hz, const ResourceGrid& grid) {
  check_lengths(weights.size(), delays.size(), dfos_hz.size());
  std::vector<TapCorrelation> taps(weights.size());
  for (std::size_t q = 0; q < taps.size(); ++q) taps[q] = {weights[q], delays[q], dfos_hz[q]};
  return CorrelationModel(CorrelationVariant::Hsr, std::move(taps), 0.0, grid);
}

CorrelationModel CorrelationModel::legacy(std::span<const double> powers, std::span<const double> delays,
                                          double max_dfo_hz, const ResourceGrid& grid) {
  if (powers.size() != delays.size() || powers.empty())
    throw std::invalid_argument("correlation model: per-tap arrays differ in length");
  if (!(max_dfo_hz >= 0.0)) throw std::invalid_argument("correlation model: maximum Doppler must be >= 0");
  std::vector<TapCorrelation> taps(powers.size());
  for (std::size_t q = 0; q < taps.size(); ++q) taps[q] = {powers[q], delays[q], 0.0};
  return CorrelationModel(CorrelationVariant::Legacy, std::move(taps), max_dfo_hz, grid);
}

cplx CorrelationModel::freq(double dk) const {
  // exp(-j 2 pi dk delta_f tau Ts) == exp(-j 2 pi tau dk / N) for both variants
  cplx acc{};
  for (const auto& t : taps_) acc += t.weight * std::polar(1.0, -kTwoPi * t.delay_samples * dk / fft_size_);
  return acc;
}

cplx CorrelationModel::time(double dl) const {
  if (variant_ == CorrelationVariant::Legacy) return bessel_j0(kTwoPi * dl * max_dfo_hz_ * symbol_duration_);
  cplx acc{};
  for (const auto& t : taps_) acc += t.weight * std::polar(1.0, kTwoPi * t.dfo_hz * dl * symbol_duration_);
  return acc;
}

namespace {

void require_variant(const CorrelationModel& m, CorrelationVariant v) {
  if (m.variant() != v) throw std::invalid_argument("correlation accessor used on the wrong model variant");
}

}  // namespace

cplx corr_freq_hsr(double dk, const CorrelationModel& model) {
  require_variant(model, CorrelationVariant::Hsr);
  return model.freq(dk);
}

cplx corr_time_hsr(double dl, const CorrelationModel& model) {
  require_variant(model, CorrelationVariant::Hsr);
  return model.time(dl);
}

cplx corr_freq_legacy(double dk, const CorrelationModel& model) {
  require_variant(model, CorrelationVariant::Legacy);
  return model.freq(dk);
}

double corr_time_legacy(double dl, const CorrelationModel& model) {
  require_variant(model, CorrelationVariant::Legacy);
  return model.time(dl).real();
}

CMatrix build_wiener(std::span<const double> targets, std::span<const double> pilots, const CorrelationFn& corr,
                     double noise_ratio) {
  if (pilots.empty()) throw std::invalid_argument("build_wiener: no pilots");
  if (!(noise_ratio >= 0.0)) throw std::invalid_argument("build_wiener: noise ratio must be >= 0");
  const std::size_t np = pilots.size();
  CMatrix rpp(np, np);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j) rpp(i, j) = corr(pilots[i] - pilots[j]);
  // W^H = (R_pp + lambda I)^-1 R_tp^H since R_pp is Hermitian
  CMatrix rtp_h(np, targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    for (std::size_t j = 0; j < np; ++j) rtp_h(j, t) = std::conj(corr(targets[t] - pilots[j]));
  return regularized_hermitian_solve(rpp, noise_ratio, rtp_h).adjoint();
}

WienerFilters make_wiener_filters(const CorrelationModel& model, const PilotPattern& pilots,
                                  const ResourceGrid& grid, double noise_ratio, int block_rb) {
  pilots.validate(grid);
  if (block_rb < 1) throw std::invalid_argument("make_wiener_filters: block width must be >= 1 RB");
  WienerFilters wf;
  wf.noise_ratio = noise_ratio;

  const CorrelationFn fcorr = [&model](double d) { return model.freq(d); };
  const CorrelationFn tcorr = [&model](double d) { return model.time(d); };

  const int width = block_rb * ResourceGrid::kSubcarriersPerRb;
  const int used = grid.used_count();
  const FrequencyBlock* previous = nullptr;
  for (int first = 0; first < used; first += width) {
    FrequencyBlock blk;
    blk.first_used = first;
    blk.count = std::min(width, used - first);
    std::vector<double> pil;
    for (std::size_t p = 0; p < pilots.m(); ++p) {
      const int u = grid.used_position(pilots.subcarriers[p]);
      if (u >= first && u < first + blk.count) {
        blk.pilot_rows.push_back(p);
        pil.push_back(u - first);
      }
    }
    if (pil.empty())
      throw std::invalid_argument("make_wiener_filters: a frequency window holds no pilot; widen block_rb");
    // windows with the same pilot geometry share one filter (correlation is lag-only)
    bool same = previous && previous->count == blk.count &&
                previous->pilot_rows.size() == blk.pilot_rows.size();
    for (std::size_t i = 0; same && i < blk.pilot_rows.size(); ++i)
      same = grid.used_position(pilots.subcarriers[previous->pilot_rows[i]]) - previous->first_used ==
             static_cast<int>(pil[i]);
    if (same) {
      blk.filter = previous->filter;
    } else {
      std::vector<double> tgt(blk.count);
      for (int i = 0; i < blk.count; ++i) tgt[i] = i;
      blk.filter = build_wiener(tgt, pil, fcorr, noise_ratio);
    }
    wf.freq.push_back(std::move(blk));
    previous = &wf.freq.back();
  }

  std::vector<double> tgt(grid.symbols_per_frame);
  for (int l = 0; l < grid.symbols_per_frame; ++l) tgt[l] = l;
  std::vector<double> pil(pilots.symbol_indices.begin(), pilots.symbol_indices.end());
  wf.time = build_wiener(tgt, pil, tcorr, noise_ratio);
  return wf;
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Linear: return "linear";
    case EstimatorKind::LmmseLegacy: return "lmmse-legacy";
    case EstimatorKind::ElmmseIdeal: return "elmmse-ideal";
    case EstimatorKind::ElmmseEstimated: return "elmmse-estimated";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(std::string_view name) {
  for (auto k : {EstimatorKind::Linear, EstimatorKind::LmmseLegacy, EstimatorKind::ElmmseIdeal,
                 EstimatorKind::ElmmseEstimated})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

ChannelEstimate lmmse_estimate(const PilotObservations& obs, const WienerFilters& filters,
                               const ResourceGrid& grid, EstimatorKind tag) {
  const std::size_t n = obs.h.cols();
  const int used = grid.used_count();
  if (filters.time.cols() != n || static_cast<int>(filters.time.rows()) != grid.symbols_per_frame)
    throw std::invalid_argument("lmmse_estimate: time filter does not match the pilot layout");

  // frequency stage: used subcarriers x pilot symbols
  CMatrix hf(used, n);
  for (const auto& blk : filters.freq) {
    if (blk.first_used + blk.count > used || blk.filter.rows() != static_cast<std::size_t>(blk.count) ||
        blk.filter.cols() != blk.pilot_rows.size())
      throw std::invalid_argument("lmmse_estimate: frequency filter does not match the pilot layout");
    for (std::size_t r : blk.pilot_rows)
      if (r >= obs.h.rows()) throw std::invalid_argument("lmmse_estimate: pilot row out of range");
    for (int t = 0; t < blk.count; ++t) {
      auto wrow = blk.filter.row(t);
      auto out = hf.row(blk.first_used + t);
      for (std::size_t j = 0; j < blk.pilot_rows.size(); ++j) {
        const cplx w = wrow[j];
        auto src = obs.h.row(blk.pilot_rows[j]);
        for (std::size_t i = 0; i < n; ++i) out[i] += w * src[i];
      }
    }
  }

  // time stage
  ChannelEstimate est{CMatrix(grid.symbols_per_frame, used), tag};
  for (int l = 0; l < grid.symbols_per_frame; ++l) {
    auto wrow = filters.time.row(l);
    auto out = est.h.row(l);
    for (int u = 0; u < used; ++u) {
      auto src = hf.row(u);
      cplx acc{};
      for (std::size_t i = 0; i < n; ++i) acc += wrow[i] * src[i];
      out[u] = acc;
    }
  }
  return est;
}

namespace {

/// Piecewise-linear interpolation of samples (xs, ys) at x; outside the
/// sample range the first or last segment is extended.
cplx interp_at(std::span<const double> xs, std::span<const cplx> ys, double x, std::size_t& seg) {
  while (seg + 2 < xs.size() && x > xs[seg + 1]) ++seg;
  const double x0 = xs[seg], x1 = xs[seg + 1];
  const double a = (x - x0) / (x1 - x0);
  return ys[seg] + a * (ys[seg + 1] - ys[seg]);
}

}  // namespace

ChannelEstimate linear_interp_estimate(const PilotObservations& obs, const PilotPattern& pilots,
                                       const ResourceGrid& grid) {
  pilots.validate(grid);
  if (pilots.m() < 2 || pilots.n() < 2)
    throw std::invalid_argument("linear_interp_estimate: need two pilots per dimension");
  if (obs.h.rows() != pilots.m() || obs.h.cols() != pilots.n())
    throw std::invalid_argument("linear_interp_estimate: observations do not match the pilot layout");
  const int used = grid.used_count();
  const std::size_t n = pilots.n();

  std::vector<double> kx(pilots.subcarriers.begin(), pilots.subcarriers.end());
  CMatrix hf(used, n);
  CVector col(pilots.m());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < pilots.m(); ++p) col[p] = obs.h(p, i);
    std::size_t seg = 0;
    for (int u = 0; u < used; ++u) hf(u, i) = interp_at(kx, col, grid.subcarrier(u), seg);
  }

  std::vector<double> lx(pilots.symbol_indices.begin(), pilots.symbol_indices.end());
  ChannelEstimate est{CMatrix(grid.symbols_per_frame, used), EstimatorKind::Linear};
  for (int u = 0; u < used; ++u) {
    auto row = hf.row(u);
    std::size_t seg = 0;
    for (int l = 0; l < grid.symbols_per_frame; ++l) est.h(l, u) = interp_at(lx, row, l, seg);
  }
  return est;
}

}  // namespace hsr
