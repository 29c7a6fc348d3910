// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional: --csv PATH writes the estimator sweep behind 7 and 8.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsr/channel.hpp"
#include "hsr/chanest.hpp"
#include "hsr/config.hpp"
#include "hsr/dfo.hpp"
#include "hsr/harness.hpp"
#include "hsr/ofdm.hpp"

using namespace hsr;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail, double seconds) {
  std::printf("criterion %2d: %s  %s (%s) [%.1f s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename F>
void run(int id, const std::string& what, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, pass, what, detail, s);
}

struct PairedCi {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
};

/// 95% interval on the mean of a[i] - b[i] over drops where both are finite.
PairedCi paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (std::isfinite(a[i]) && std::isfinite(b[i])) d.push_back(a[i] - b[i]);
  PairedCi ci;
  ci.n = d.size();
  if (d.size() < 2) return ci;
  double s = 0.0, s2 = 0.0;
  for (double v : d) s += v;
  ci.mean = s / d.size();
  for (double v : d) s2 += (v - ci.mean) * (v - ci.mean);
  ci.half_width = 1.96 * std::sqrt(s2 / (d.size() - 1) / d.size());
  return ci;
}

const MetricsRecord& find(const std::vector<MetricsRecord>& recs, double snr, EstimatorKind k) {
  for (const auto& r : recs)
    if (r.snr_db == snr && r.estimator == k) return r;
  throw std::runtime_error("record missing");
}

std::vector<double> to_db(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x > 0.0 ? 10.0 * std::log10(x) : NAN);
  return out;
}

/// DFO relative error per drop for one method over a set of SNRs. Every SNR
/// reuses the same drop seeds, so channel draws and payloads are common and
/// only the noise level changes between SNR points.
std::vector<std::vector<double>> dfo_errors(SimConfig cfg, DfoMethod method, const std::vector<double>& snrs,
                                            int drops) {
  cfg.dfo.method = method;
  cfg.estimators.selected = {EstimatorKind::Linear};
  const double x = find_p3db(cfg.geometry, cfg.pathloss_exponent);
  std::vector<std::vector<double>> out;
  for (double snr : snrs) {
    const CellContext cell(cfg, snr, x);
    std::vector<double> errs;
    for (int d = 0; d < drops; ++d) {
      const DropMetrics m = run_drop(cell, drop_seed(cfg.sweep.seed, 0.0, x, d));
      errs.push_back(m.dfo_valid ? m.dfo_rel_err : NAN);
    }
    out.push_back(std::move(errs));
  }
  return out;
}

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) s += x, ++n;
  return n ? s / n : NAN;
}

double median_finite(const std::vector<double>& v) {
  std::vector<double> f;
  for (double x : v)
    if (std::isfinite(x)) f.push_back(x);
  return quantile(f, 0.5);
}

}  // namespace

int main(int argc, char** argv) {
  std::string csv_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--csv") == 0) csv_path = argv[i + 1];

  const ScenarioGeometry geo;
  const ResourceGrid grid;

  run(1, "maximum DFO in [840, 844] Hz", [&](std::string& d) {
    const double f = max_dfo(geo);
    d = fmt("f_D = %.4f Hz", f);
    return f >= 840.0 && f <= 844.0;
  });

  run(2, "SIR between the RRHs is 20 +- 3 dB", [&](std::string& d) {
    const auto f = tap_dfos_at(geo.inter_rrh_distance_m / 2.0, geo);
    std::vector<TapState> taps(2);
    taps[0] = {cplx(std::sqrt(0.5)), 0, f[0]};
    taps[1] = {cplx(std::sqrt(0.5)), 0, f[1]};
    const double s = sir_db(taps, grid);
    d = fmt("SIR = %.4f dB", s) + fmt(" at |f| = %.2f Hz", std::abs(f[1]));
    return std::abs(s - 20.0) <= 3.0;
  });

  run(3, "multiplication counts 80 and 34200", [&](std::string& d) {
    const double p = multiplication_count(DfoMethod::Proposed, 2, 4);
    const double e = multiplication_count(DfoMethod::ExhaustiveSearch, 2, 4, 900, 2);
    d = fmt("proposed %.0f", p) + fmt(", ES %.0f", e) + fmt(", ratio %.1f", e / p);
    return p == 80.0 && e == 34200.0 && e / p == 427.5;
  });

  run(4, "noiseless DFO recovery over 100 random cases", [&](std::string& d) {
    const PilotPattern pil = make_pilot_pattern(grid, PilotLayout{});
    const double bound = alias_bound(pil, grid, PairPolicy::Consecutive);
    const double fd = max_dfo(geo);
    Rng rng(4004);
    std::uniform_real_distribution<double> uf(-0.95 * bound, 0.95 * bound);
    std::uniform_int_distribution<int> ud(0, grid.cp_len - 1);
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
      std::vector<int> delays{ud(rng), ud(rng)};
      while (delays[1] == delays[0]) delays[1] = ud(rng);
      const double p0 = 0.1 + 0.8 * uniform01(rng);
      std::vector<TapState> taps(2);
      taps[0] = {std::polar(std::sqrt(p0), kTwoPi * uniform01(rng)), delays[0], uf(rng)};
      taps[1] = {std::polar(std::sqrt(1.0 - p0), kTwoPi * uniform01(rng)), delays[1], uf(rng)};
      Frame frame = build_frame(grid, pil, Traffic::PilotsOnly, rng);
      const CMatrix h = fading_grid(taps, grid);
      frame.rx_grid = frame.tx_grid;
      for (std::size_t i = 0; i < h.data().size(); ++i) frame.rx_grid.data()[i] *= h.data()[i];
      const auto obs = ls_estimate(frame.rx_grid, pil, grid);
      const auto est = estimate_dfos_from_pilots(obs.h, delays, pil, grid);
      for (int q = 0; q < 2; ++q) worst = std::max(worst, std::abs(est.hz[q] - taps[q].dfo_hz) / fd);
    }
    d = fmt("worst |error| / f_D = %.3g", worst);
    return worst < 1e-6;
  });

  run(5, "time-domain channel equals fading plus ICI at N = 16", [&](std::string& d) {
    ResourceGrid g;
    g.fft_size = 16;
    g.cp_len = 4;
    g.resource_blocks = 1;
    g.symbols_per_frame = 3;
    std::mt19937_64 rng(5005);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> uf(-0.45, 0.45);
    std::uniform_int_distribution<int> ud(0, g.cp_len - 1);
    double worst = 0.0;
    for (int c = 0; c < 50; ++c) {
      std::vector<TapState> taps(2);
      for (auto& t : taps) t = {cplx(nd(rng), nd(rng)), ud(rng), uf(rng) * g.subcarrier_spacing_hz};
      CMatrix txg(g.symbols_per_frame, g.used_count());
      for (auto& v : txg.data()) v = {nd(rng), nd(rng)};
      const CMatrix rx =
          demodulate(apply_channel_time_domain(modulate(txg, g), taps, -g.cp_len * g.sample_period(), g), g);
      double err = 0.0, ref = 0.0;
      for (int l = 0; l < g.symbols_per_frame; ++l) {
        const auto row = txg.row(l);
        for (int u = 0; u < g.used_count(); ++u) {
          const int k = g.subcarrier(u);
          const cplx model = analytic_freq_response(k, l, taps, g).fading * txg(l, u) + ici_term(k, l, taps, row, g);
          err = std::max(err, std::abs(model - rx(l, u)));
          ref = std::max(ref, std::abs(rx(l, u)));
        }
      }
      worst = std::max(worst, err / ref);
    }
    d = fmt("worst relative deviation %.3g", worst);
    return worst < 1e-9;
  });

  run(6, "HSR correlations match Monte Carlo moments within 2%", [&](std::string& d) {
    Rng rng(6006);
    std::uniform_real_distribution<double> uf(-0.06, 0.06);
    std::uniform_int_distribution<int> ud(0, grid.cp_len - 1);
    const int draws = 10000;
    const int k = 17, l = 33;
    double worst = 0.0;
    for (int set = 0; set < 10; ++set) {
      const double p0 = 0.1 + 0.8 * uniform01(rng);
      std::vector<TapState> taps(2);
      taps[0] = {cplx(std::sqrt(p0)), ud(rng), uf(rng) * grid.subcarrier_spacing_hz};
      taps[1] = {cplx(std::sqrt(1.0 - p0)), ud(rng), uf(rng) * grid.subcarrier_spacing_hz};
      const std::vector<double> pw{p0, 1.0 - p0};
      const std::vector<double> dl{double(taps[0].delay_samples), double(taps[1].delay_samples)};
      const std::vector<double> fl{taps[0].dfo_hz, taps[1].dfo_hz};
      const auto model = CorrelationModel::hsr(pw, dl, fl, grid);
      const std::vector<int> lags{0, 1, 3, 12};
      std::vector<cplx> rf(lags.size()), rt(lags.size());
      for (int i = 0; i < draws; ++i) {
        auto t = taps;
        for (auto& tap : t) tap.amplitude *= std::polar(1.0, kTwoPi * uniform01(rng));
        const cplx h0 = analytic_freq_response(k, l, t, grid).fading;
        for (std::size_t j = 0; j < lags.size(); ++j) {
          rf[j] += analytic_freq_response(k + lags[j], l, t, grid).fading * std::conj(h0);
          rt[j] += analytic_freq_response(k, l + lags[j], t, grid).fading * std::conj(h0);
        }
      }
      const double r0 = corr_freq_hsr(0, model).real();
      for (std::size_t j = 0; j < lags.size(); ++j) {
        worst = std::max(worst, std::abs(rf[j] / double(draws) - corr_freq_hsr(lags[j], model)) / r0);
        worst = std::max(worst, std::abs(rt[j] / double(draws) - corr_time_hsr(lags[j], model)) / r0);
      }
    }
    d = fmt("worst deviation %.4f of R(0)", worst);
    return worst < 0.02;
  });

  // 7 and 8 share one sweep at the p3db position
  SimConfig est_cfg;
  est_cfg.sweep.snr_db = {10.0, 20.0, 30.0};
  est_cfg.sweep.drops = 500;
  est_cfg.sweep.seed = 7;
  std::vector<MetricsRecord> est_recs;
  const auto t_sweep = std::chrono::steady_clock::now();
  std::string sweep_error;
  try {
    est_recs = sweep(est_cfg);
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      write_csv(out, est_recs);
    }
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_sweep).count();
  std::printf("estimator sweep: %zu records, %.1f s\n", est_recs.size(), sweep_s);

  run(7, "E-LMMSE gain over legacy LMMSE at 30 dB", [&](std::string& d) {
    if (!sweep_error.empty()) throw std::runtime_error(sweep_error);
    const auto& leg = find(est_recs, 30.0, EstimatorKind::LmmseLegacy);
    const auto& ide = find(est_recs, 30.0, EstimatorKind::ElmmseIdeal);
    const auto& est = find(est_recs, 30.0, EstimatorKind::ElmmseEstimated);
    const double gain = leg.mse_db - est.mse_db;
    const double gap = std::abs(est.mse_db - ide.mse_db);
    d = fmt("legacy %.2f dB", leg.mse_db) + fmt(", estimated %.2f dB", est.mse_db) +
        fmt(", ideal %.2f dB", ide.mse_db) + fmt(", gain %.2f dB", gain) + fmt(", |est - ideal| %.2f dB", gap) +
        fmt(", drops %.0f", double(est.drops_used));
    return est.drops_used >= 500 && gain >= 6.0 && gap <= 1.0;
  });

  run(8, "ordering E-LMMSE <= legacy <= linear beyond 95% intervals, linear / legacy / estimated", [&](std::string& d) {
    if (!sweep_error.empty()) throw std::runtime_error(sweep_error);
    bool ok = true;
    std::ostringstream msg;
    for (double snr : est_cfg.sweep.snr_db) {
      const auto& lin = find(est_recs, snr, EstimatorKind::Linear);
      const auto& leg = find(est_recs, snr, EstimatorKind::LmmseLegacy);
      for (EstimatorKind e : {EstimatorKind::ElmmseIdeal, EstimatorKind::ElmmseEstimated}) {
        const auto& el = find(est_recs, snr, e);
        // paired per-drop differences, MSE on the dB scale
        const auto m1 = paired_difference(to_db(leg.drop_mse_linear), to_db(el.drop_mse_linear));
        const auto b1 = paired_difference(leg.drop_ber, el.drop_ber);
        const bool pass = m1.mean - m1.half_width > 0.0 && b1.mean - b1.half_width > 0.0;
        if (!pass)
          msg << "snr " << snr << " " << to_string(e) << " vs legacy: dMSE " << m1.mean << "+-" << m1.half_width
              << " dB, dBER " << b1.mean << "+-" << b1.half_width << "; ";
        ok = ok && pass;
      }
      const auto m2 = paired_difference(to_db(lin.drop_mse_linear), to_db(leg.drop_mse_linear));
      const auto b2 = paired_difference(lin.drop_ber, leg.drop_ber);
      const bool pass = m2.mean - m2.half_width > 0.0 && b2.mean - b2.half_width > 0.0;
      if (!pass)
        msg << "snr " << snr << " legacy vs linear: dMSE " << m2.mean << "+-" << m2.half_width << " dB, dBER "
            << b2.mean << "+-" << b2.half_width << "; ";
      ok = ok && pass;
      const auto& el = find(est_recs, snr, EstimatorKind::ElmmseEstimated);
      msg << "snr " << snr << ": MSE dB " << lin.mse_db << " / " << leg.mse_db << " / " << el.mse_db << ", BER "
          << lin.ber << " / " << leg.ber << " / " << el.ber << "; ";
    }
    d = msg.str();
    return ok;
  });

  // 9 and 10 share the data-mode DFO runs
  SimConfig dfo_cfg;
  dfo_cfg.sweep.seed = 9;
  const int dfo_drops = 200;
  const std::vector<double> data_snrs{20.0, 30.0, 35.0, 40.0, 45.0, 50.0};
  std::vector<std::vector<double>> prop_err, es_err;
  std::string dfo_error;
  try {
    prop_err = dfo_errors(dfo_cfg, DfoMethod::Proposed, data_snrs, dfo_drops);
    es_err = dfo_errors(dfo_cfg, DfoMethod::ExhaustiveSearch, data_snrs, dfo_drops);
  } catch (const std::exception& e) {
    dfo_error = e.what();
  }

  run(9, "DFO error floor with data, none below 1e-5 with pilots only", [&](std::string& d) {
    if (!dfo_error.empty()) throw std::runtime_error(dfo_error);
    bool ok = true;
    std::ostringstream msg;
    msg << "data mode mean rel err (proposed | ES) at 35..50 dB:";
    for (std::size_t i = 2; i < data_snrs.size(); ++i) {
      const double pp = mean_finite(prop_err[i]), pe = mean_finite(es_err[i]);
      msg << " " << pp << "|" << pe;
      if (i > 2) {
        const double ip = (mean_finite(prop_err[i - 1]) - pp) / mean_finite(prop_err[i - 1]);
        const double ie = (mean_finite(es_err[i - 1]) - pe) / mean_finite(es_err[i - 1]);
        ok = ok && ip < 0.10 && ie < 0.10;
      }
    }
    SimConfig pilots_cfg = dfo_cfg;
    pilots_cfg.sweep.traffic = Traffic::PilotsOnly;
    pilots_cfg.sweep.channel_model = ChannelModel::IciFree;
    const std::vector<double> psnr{35.0, 40.0, 45.0, 50.0, 55.0, 60.0};
    const auto pil = dfo_errors(pilots_cfg, DfoMethod::Proposed, psnr, 100);
    msg << "; pilots-only proposed:";
    for (std::size_t i = 0; i < psnr.size(); ++i) {
      const double e = mean_finite(pil[i]);
      msg << " " << e;
      if (i > 0) ok = ok && (mean_finite(pil[i - 1]) - e) / mean_finite(pil[i - 1]) >= 0.10;
    }
    ok = ok && mean_finite(pil.back()) < 1e-5;
    d = msg.str();
    return ok;
  });

  run(10, "proposed median DFO error <= ES median at SNR >= 20 dB", [&](std::string& d) {
    if (!dfo_error.empty()) throw std::runtime_error(dfo_error);
    bool ok = true;
    std::ostringstream msg;
    for (std::size_t i = 0; i < data_snrs.size(); ++i) {
      const double mp = median_finite(prop_err[i]), me = median_finite(es_err[i]);
      msg << data_snrs[i] << " dB: " << mp << " vs " << me << "; ";
      ok = ok && mp <= me;
    }
    d = msg.str();
    return ok;
  });

  run(11, "identical sweeps give byte-identical CSV", [&](std::string& d) {
    SimConfig cfg;
    cfg.sweep.threads = 2;
    std::ostringstream a, b;
    write_csv(a, sweep(cfg));
    write_csv(b, sweep(cfg));
    SimConfig serial = cfg;
    serial.sweep.threads = 1;
    std::ostringstream c;
    write_csv(c, sweep(serial));
    d = std::to_string(a.str().size()) + " bytes, serial run " + (a.str() == c.str() ? "identical" : "differs");
    return a.str() == b.str() && a.str() == c.str();
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
