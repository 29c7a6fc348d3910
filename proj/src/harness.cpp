#include "hsr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <numeric>
#include <thread>

#include "hsr/channel.hpp"
#include "hsr/dfo.hpp"
#include "hsr/ofdm.hpp"
#include "hsr/random.hpp"

namespace hsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kBitsPerSymbol = 4;
// keeps the Wiener solve well posed at infinite SNR, where R_pp has rank Q
constexpr double kMinNoiseRatio = 1e-9;

}  // namespace

double find_p3db(const ScenarioGeometry& geometry, double pathloss_exponent) {
  geometry.validate();
  auto excess = [&](double x) {
    const auto p = tap_powers_at(x, geometry, pathloss_exponent);
    return p[0] / p[1] - 2.0;
  };
  double lo = 0.0;
  double hi = geometry.inter_rrh_distance_m / 2.0;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> resolve_positions(const SimConfig& config) {
  const auto& pos = config.sweep.position;
  switch (pos.mode) {
    case PositionMode::Fixed: return {pos.x_m};
    case PositionMode::P3db: return {find_p3db(config.geometry, config.pathloss_exponent)};
    case PositionMode::Sweep: {
      std::vector<double> out(pos.sweep_points);
      const double ds = config.geometry.inter_rrh_distance_m;
      for (int i = 0; i < pos.sweep_points; ++i) out[i] = ds * i / (pos.sweep_points - 1);
      return out;
    }
  }
  return {};
}

double throughput_proxy(std::span<const std::uint8_t> block_errored, int modulation_bits) {
  if (block_errored.empty()) return 0.0;
  const auto ok = std::count(block_errored.begin(), block_errored.end(), 0);
  return modulation_bits * static_cast<double>(ok) / static_cast<double>(block_errored.size());
}

CellContext::CellContext(const SimConfig& config, double snr_db, double position_m)
    : config_(&config), snr_db_(snr_db), position_m_(position_m) {
  config.validate();
  pilots_ = make_pilot_pattern(config.grid, config.pilots);
  powers_ = tap_powers_at(position_m, config.geometry, config.pathloss_exponent);
  dfos_ = tap_dfos_at(position_m, config.geometry);
  noise_ratio_ = std::isinf(snr_db) ? 0.0 : std::pow(10.0, -snr_db / 10.0);

  const auto& sel = config.estimators.selected;
  if (std::find(sel.begin(), sel.end(), EstimatorKind::LmmseLegacy) != sel.end()) {
    std::vector<double> delays(config.taps.delays.begin(), config.taps.delays.end());
    const auto model = CorrelationModel::legacy(powers_, delays, max_dfo(config.geometry), config.grid);
    double lambda = noise_ratio_;
    if (config.estimators.ici_inflation && config.sweep.channel_model == ChannelModel::TimeDomain) {
      // expected ICI at the band centre for the nominal tap powers and Dopplers
      std::vector<TapState> nominal(2);
      for (int q = 0; q < 2; ++q) nominal[q] = {cplx(std::sqrt(powers_[q])), 0, dfos_[q]};
      lambda += ici_power(nominal, config.grid);
    }
    legacy_ = make_wiener_filters(model, pilots_, config.grid, std::max(lambda, kMinNoiseRatio),
                                  config.estimators.block_rb);
  }
}

const WienerFilters& CellContext::legacy_filters() const {
  if (!legacy_) throw std::logic_error("legacy filters requested but the legacy estimator is not selected");
  return *legacy_;
}

std::uint64_t drop_seed(std::uint64_t master, double snr_db, double position_m, std::uint64_t drop) {
  return mix_seed({master, bits_of(snr_db), bits_of(position_m), drop});
}

namespace {

struct DfoOutcome {
  std::vector<double> hz;
  std::vector<double> weights;  // mean |Z_q|^2 over pilot symbols
  std::uint64_t multiplications = 0;
  bool valid = false;
};

DfoOutcome estimate_dfo_stage(const PilotObservations& obs, const CellContext& cell) {
  const SimConfig& cfg = cell.config();
  DfoOutcome out;
  try {
    const DelayBasis basis = build_delay_basis(cfg.taps.delays, cell.pilots().subcarriers, cfg.grid.fft_size);
    const TapSeparation sep = separate_taps(obs.h, basis);
    out.weights.assign(sep.z.rows(), 0.0);
    for (std::size_t q = 0; q < sep.z.rows(); ++q) {
      for (std::size_t i = 0; i < sep.z.cols(); ++i) out.weights[q] += std::norm(sep.z(q, i));
      out.weights[q] /= static_cast<double>(sep.z.cols());
    }
    if (cfg.dfo.method == DfoMethod::Proposed) {
      const DfoEstimate est = estimate_dfos(sep, cell.pilots(), cfg.grid, cfg.dfo.pair_policy);
      out.hz = est.hz;
      out.multiplications = est.multiplications;
    } else {
      const EsEstimate est = es_estimate(obs.h, cfg.taps.delays, cfg.dfo.es, cfg.grid, cell.pilots());
      out.hz = est.hz;
      out.multiplications = est.multiplications;
    }
    out.valid = true;
    for (double f : out.hz) out.valid = out.valid && std::isfinite(f);
  } catch (const EstimationError&) {
    out.valid = false;
  } catch (const IdentifiabilityError&) {
    out.valid = false;
  }
  return out;
}

/// ZF-equalizes the data elements with `h_est`, demaps and scores bits and
/// RB x subframe blocks.
void score_data(const Frame& frame, const CMatrix& h_est, const std::vector<std::uint8_t>& mask,
                const ResourceGrid& grid, int subframe_length, EstimatorDropMetrics& m) {
  if (frame.payload_bits.empty()) return;
  const int used = grid.used_count();
  const int rbs = grid.resource_blocks;
  const int subframes = (grid.symbols_per_frame + subframe_length - 1) / subframe_length;
  std::vector<std::uint8_t> errored(static_cast<std::size_t>(rbs) * subframes, 0);
  std::size_t s = 0;
  for (int l = 0; l < grid.symbols_per_frame; ++l) {
    for (int u = 0; u < used; ++u) {
      if (mask[static_cast<std::size_t>(l) * used + u]) continue;
      const cplx h = h_est(l, u);
      const cplx eq = h == cplx{} ? cplx{} : frame.rx_grid(l, u) / h;
      const auto bits = qam16_demap(std::span<const cplx>(&eq, 1));
      std::size_t e = 0;
      for (int b = 0; b < kBitsPerSymbol; ++b) e += bits[b] != frame.payload_bits[kBitsPerSymbol * s + b];
      m.bit_errors += e;
      if (e) errored[static_cast<std::size_t>(l / subframe_length) * rbs + u / ResourceGrid::kSubcarriersPerRb] = 1;
      ++s;
    }
  }
  m.bits = kBitsPerSymbol * s;
  m.blocks = errored.size();
  m.blocks_errored = static_cast<std::size_t>(std::count(errored.begin(), errored.end(), 1));
}

void score_mse(const CMatrix& est, const CMatrix& truth, EstimatorDropMetrics& m) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < truth.data().size(); ++i) {
    err += std::norm(est.data()[i] - truth.data()[i]);
    ref += std::norm(truth.data()[i]);
  }
  m.error_energy = err;
  m.channel_energy = ref;
  m.mse_linear = ref > 0.0 ? err / ref : kNaN;
}

}  // namespace

DropMetrics run_drop(const CellContext& cell, std::uint64_t seed) {
  const SimConfig& cfg = cell.config();
  const ResourceGrid& grid = cfg.grid;
  Rng rng(seed);

  std::vector<double> powers(cell.powers().begin(), cell.powers().end());
  std::vector<double> ks;
  for (double k : cfg.taps.rician_k_db) ks.push_back(rician_k_linear(k));
  const CVector gains = draw_tap_gains(powers, ks, rng);
  std::vector<TapState> taps(gains.size());
  for (std::size_t q = 0; q < taps.size(); ++q)
    taps[q] = {gains[q], cfg.taps.delays[q], cell.dfos_hz()[q], ks[q]};

  Frame frame = build_frame(grid, cell.pilots(), cfg.sweep.traffic, rng);
  const CMatrix h_true = fading_grid(taps, grid);
  if (cfg.sweep.channel_model == ChannelModel::TimeDomain) {
    const CVector tx = modulate(frame.tx_grid, grid);
    // sample 0 is the first CP sample, so symbol 0's FFT window starts at t = 0
    CVector rx = apply_channel_time_domain(tx, taps, -grid.cp_len * grid.sample_period(), grid);
    add_awgn(rx, cell.snr_db(), subcarrier_power_ref(grid), rng);
    frame.rx_grid = demodulate(rx, grid);
  } else {
    frame.rx_grid = CMatrix(grid.symbols_per_frame, grid.used_count());
    for (std::size_t i = 0; i < frame.rx_grid.data().size(); ++i)
      frame.rx_grid.data()[i] = h_true.data()[i] * frame.tx_grid.data()[i];
    if (!std::isinf(cell.snr_db()))
      for (auto& v : frame.rx_grid.data()) v += complex_normal(rng, cell.noise_ratio());
  }

  const PilotObservations obs = ls_estimate(frame.rx_grid, cell.pilots(), grid);

  DropMetrics dm;
  dm.dfo_true_hz.assign(cell.dfos_hz().begin(), cell.dfos_hz().end());
  const DfoOutcome dfo = estimate_dfo_stage(obs, cell);
  dm.dfo_valid = dfo.valid;
  dm.dfo_multiplications = dfo.multiplications;
  if (dfo.valid) {
    dm.dfo_est_hz = dfo.hz;
    const double fd = kDfoReferenceHz;
    double acc = 0.0;
    for (std::size_t q = 0; q < dfo.hz.size(); ++q) acc += std::abs(dfo.hz[q] - dm.dfo_true_hz[q]) / fd;
    dm.dfo_rel_err = acc / static_cast<double>(dfo.hz.size());
  } else {
    dm.dfo_rel_err = kNaN;
  }

  double lambda = std::max(cell.noise_ratio(), kMinNoiseRatio);
  if (cfg.estimators.ici_inflation && cfg.sweep.channel_model == ChannelModel::TimeDomain)
    lambda += ici_power(taps, grid);

  const auto mask = cell.pilots().mask(grid);
  std::vector<double> delays(cfg.taps.delays.begin(), cfg.taps.delays.end());
  for (EstimatorKind kind : cfg.estimators.selected) {
    EstimatorDropMetrics m;
    m.kind = kind;
    ChannelEstimate est;
    switch (kind) {
      case EstimatorKind::Linear:
        est = linear_interp_estimate(obs, cell.pilots(), grid);
        break;
      case EstimatorKind::LmmseLegacy:
        est = lmmse_estimate(obs, cell.legacy_filters(), grid, kind);
        break;
      case EstimatorKind::ElmmseIdeal: {
        std::vector<double> pw(taps.size());
        for (std::size_t q = 0; q < taps.size(); ++q) pw[q] = std::norm(taps[q].amplitude);
        const auto model = CorrelationModel::hsr(pw, delays, dm.dfo_true_hz, grid);
        est = lmmse_estimate(obs, make_wiener_filters(model, cell.pilots(), grid, lambda, cfg.estimators.block_rb),
                             grid, kind);
        break;
      }
      case EstimatorKind::ElmmseEstimated: {
        if (!dfo.valid) {
          m.valid = false;
          break;
        }
        const auto model = CorrelationModel::hsr_weighted(dfo.weights, delays, dfo.hz, grid);
        est = lmmse_estimate(obs, make_wiener_filters(model, cell.pilots(), grid, lambda, cfg.estimators.block_rb),
                             grid, kind);
        break;
      }
    }
    if (m.valid) {
      score_mse(est.h, h_true, m);
      score_data(frame, est.h, mask, grid, cfg.pilots.subframe_length, m);
    }
    dm.estimators.push_back(m);
  }
  return dm;
}

DropMetrics run_drop(const SimConfig& config, double snr_db, double position_m, std::uint64_t seed) {
  const CellContext cell(config, snr_db, position_m);
  return run_drop(cell, seed);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<MetricsRecord> aggregate(const CellContext& cell, std::span<const DropMetrics> drops) {
  const SimConfig& cfg = cell.config();
  const PilotPattern& pil = cell.pilots();
  const double mult = multiplication_count(cfg.dfo.method, static_cast<double>(pil.m()),
                                           static_cast<double>(pil.n()), cfg.dfo.es.f_max_hz, cfg.dfo.es.step_hz);

  std::vector<double> dfo_errs;
  std::vector<double> dfo_all;
  for (const auto& d : drops) {
    dfo_all.push_back(d.dfo_valid ? d.dfo_rel_err : kNaN);
    if (d.dfo_valid) dfo_errs.push_back(d.dfo_rel_err);
  }
  const double dfo_mean =
      dfo_errs.empty() ? kNaN : std::accumulate(dfo_errs.begin(), dfo_errs.end(), 0.0) / dfo_errs.size();
  const double dfo_p95 = quantile(dfo_errs, 0.95);

  std::vector<MetricsRecord> out;
  for (std::size_t e = 0; e < cfg.estimators.selected.size(); ++e) {
    MetricsRecord r;
    r.snr_db = cell.snr_db();
    r.position_m = cell.position_m();
    r.estimator = cfg.estimators.selected[e];
    r.dfo_method = cfg.dfo.method;
    r.dfo_rel_err_mean = dfo_mean;
    r.dfo_rel_err_p95 = dfo_p95;
    r.mult_count = mult;
    r.dfo_rel_errs = dfo_all;

    std::vector<double> err, ref;
    std::size_t bit_errors = 0, bits = 0, blocks = 0, blocks_errored = 0;
    for (const auto& d : drops) {
      const auto& m = d.estimators.at(e);
      if (!m.valid || !std::isfinite(m.mse_linear)) {
        r.drop_mse_linear.push_back(kNaN);
        r.drop_ber.push_back(kNaN);
        continue;
      }
      ++r.drops_used;
      err.push_back(m.error_energy);
      ref.push_back(m.channel_energy);
      bit_errors += m.bit_errors;
      bits += m.bits;
      blocks += m.blocks;
      blocks_errored += m.blocks_errored;
      r.drop_mse_linear.push_back(m.mse_linear);
      r.drop_ber.push_back(m.bits ? static_cast<double>(m.bit_errors) / m.bits : kNaN);
    }
    const double n = static_cast<double>(r.drops_used);
    if (r.drops_used == 0) {
      r.mse_db = r.ber = r.tp_bits_per_symbol = r.ci95_mse_db = kNaN;
    } else {
      const double err_sum = std::accumulate(err.begin(), err.end(), 0.0);
      const double ref_sum = std::accumulate(ref.begin(), ref.end(), 0.0);
      const double ratio = err_sum / ref_sum;
      r.mse_db = 10.0 * std::log10(ratio);
      if (r.drops_used > 1) {
        // ratio estimator: linearize around R, then map the half-width to dB
        double ss = 0.0;
        for (std::size_t i = 0; i < err.size(); ++i) ss += std::pow(err[i] - ratio * ref[i], 2);
        const double se = std::sqrt(ss / (n * (n - 1.0))) / (ref_sum / n);
        r.ci95_mse_db = 10.0 / std::log(10.0) * 1.96 * se / ratio;
      } else {
        r.ci95_mse_db = kNaN;
      }
      r.ber = bits ? static_cast<double>(bit_errors) / bits : kNaN;
      r.tp_bits_per_symbol =
          blocks ? kBitsPerSymbol * static_cast<double>(blocks - blocks_errored) / blocks : kNaN;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsRecord> sweep(const SimConfig& config) {
  config.validate();
  const auto positions = resolve_positions(config);
  std::vector<CellContext> cells;
  for (double snr : config.sweep.snr_db)
    for (double x : positions) cells.emplace_back(config, snr, x);

  const auto drops = static_cast<std::size_t>(config.sweep.drops);
  const std::size_t jobs = cells.size() * drops;
  std::vector<DropMetrics> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const CellContext& cell = cells[j / drops];
      results[j] = run_drop(cell, drop_seed(config.sweep.seed, cell.snr_db(), cell.position_m(), j % drops));
    }
  };
  unsigned threads = config.sweep.threads > 0 ? static_cast<unsigned>(config.sweep.threads)
                                              : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs;
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<MetricsRecord> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto recs = aggregate(cells[c], std::span<const DropMetrics>(results.data() + c * drops, drops));
    for (auto& r : recs) out.push_back(std::move(r));
  }
  return out;
}

std::string csv_header() {
  return "snr_db,position_m,estimator,dfo_method,dfo_rel_err_mean,dfo_rel_err_p95,mse_db,ber,"
         "tp_bits_per_symbol,mult_count,drops_used,ci95_mse_db";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << csv_header() << '\n';
  for (const auto& r : records) {
    out << format_number(r.snr_db) << ',' << format_number(r.position_m) << ',' << to_string(r.estimator) << ','
        << to_string(r.dfo_method) << ',' << format_number(r.dfo_rel_err_mean) << ','
        << format_number(r.dfo_rel_err_p95) << ',' << format_number(r.mse_db) << ',' << format_number(r.ber)
        << ',' << format_number(r.tp_bits_per_symbol) << ',' << format_number(r.mult_count) << ','
        << r.drops_used << ',' << format_number(r.ci95_mse_db) << '\n';
  }
}

}  // namespace hsr
