#include "hsr/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace hsr {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void allow_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + key + "' in section '" + std::string(section) + "'");
  }
}

double number_or_inf(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
  }
  throw ConfigError(what + ": expected a number or \"inf\"");
}

json number_out(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(section + "." + key + ": wrong type");
  }
}

void read_geometry(const json& j, SimConfig& c) {
  allow_keys(j, "geometry", {"inter_rrh_distance_m", "track_offset_m", "speed_kmh", "carrier_hz", "rrh_count",
                             "light_speed_mps", "pathloss_exponent"});
  auto& g = c.geometry;
  read(j, "inter_rrh_distance_m", g.inter_rrh_distance_m, "geometry");
  read(j, "track_offset_m", g.track_offset_m, "geometry");
  double kmh = g.speed_mps * 3.6;
  read(j, "speed_kmh", kmh, "geometry");
  g.speed_mps = kmh / 3.6;
  read(j, "carrier_hz", g.carrier_hz, "geometry");
  read(j, "rrh_count", g.rrh_count, "geometry");
  read(j, "light_speed_mps", g.light_speed_mps, "geometry");
  read(j, "pathloss_exponent", c.pathloss_exponent, "geometry");
}

void read_grid(const json& j, ResourceGrid& g) {
  allow_keys(j, "grid", {"fft_size", "cp_len", "subcarrier_spacing_hz", "resource_blocks", "symbols_per_frame"});
  read(j, "fft_size", g.fft_size, "grid");
  read(j, "cp_len", g.cp_len, "grid");
  read(j, "subcarrier_spacing_hz", g.subcarrier_spacing_hz, "grid");
  read(j, "resource_blocks", g.resource_blocks, "grid");
  read(j, "symbols_per_frame", g.symbols_per_frame, "grid");
}

void read_pilots(const json& j, PilotLayout& p) {
  allow_keys(j, "pilots", {"symbols_in_subframe", "subframe_length", "rb_offsets", "seed"});
  read(j, "symbols_in_subframe", p.symbols_in_subframe, "pilots");
  read(j, "subframe_length", p.subframe_length, "pilots");
  read(j, "rb_offsets", p.rb_offsets, "pilots");
  read(j, "seed", p.seed, "pilots");
}

void read_taps(const json& j, TapConfig& t) {
  allow_keys(j, "taps", {"delays", "rician_k_db"});
  read(j, "delays", t.delays, "taps");
  if (j.contains("rician_k_db")) {
    const auto& arr = j.at("rician_k_db");
    if (!arr.is_array()) throw ConfigError("taps.rician_k_db: expected an array");
    t.rician_k_db.clear();
    for (const auto& v : arr) t.rician_k_db.push_back(number_or_inf(v, "taps.rician_k_db"));
  }
}

void read_estimators(const json& j, EstimatorConfig& e) {
  allow_keys(j, "estimators", {"selected", "block_rb", "ici_inflation"});
  if (j.contains("selected")) {
    std::vector<std::string> names;
    read(j, "selected", names, "estimators");
    e.selected.clear();
    for (const auto& n : names) {
      try {
        e.selected.push_back(estimator_from_string(n));
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("estimators.selected: ") + ex.what());
      }
    }
  }
  read(j, "block_rb", e.block_rb, "estimators");
  read(j, "ici_inflation", e.ici_inflation, "estimators");
}

PairPolicy pair_policy_from_string(const std::string& s) {
  if (s == "consecutive") return PairPolicy::Consecutive;
  if (s == "all") return PairPolicy::AllPairs;
  throw ConfigError("dfo.pair_policy: expected \"consecutive\" or \"all\"");
}

void read_dfo(const json& j, DfoConfig& d) {
  allow_keys(j, "dfo", {"method", "pair_policy", "es_f_max_hz", "es_step_hz"});
  if (j.contains("method")) {
    std::string m;
    read(j, "method", m, "dfo");
    try {
      d.method = dfo_method_from_string(m);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("dfo.method: ") + ex.what());
    }
  }
  if (j.contains("pair_policy")) {
    std::string p;
    read(j, "pair_policy", p, "dfo");
    d.pair_policy = pair_policy_from_string(p);
  }
  read(j, "es_f_max_hz", d.es.f_max_hz, "dfo");
  read(j, "es_step_hz", d.es.step_hz, "dfo");
}

void read_sweep(const json& j, SweepConfig& s) {
  allow_keys(j, "sweep", {"snr_db", "position", "sweep_points", "drops", "seed", "traffic", "channel_model",
                          "threads"});
  if (j.contains("snr_db")) {
    const auto& v = j.at("snr_db");
    s.snr_db.clear();
    if (v.is_array()) {
      for (const auto& e : v) s.snr_db.push_back(number_or_inf(e, "sweep.snr_db"));
    } else if (v.is_string() && v.get<std::string>().find(':') != std::string::npos) {
      s.snr_db = parse_snr_range(v.get<std::string>());
    } else {
      s.snr_db.push_back(number_or_inf(v, "sweep.snr_db"));
    }
  }
  if (j.contains("position")) {
    const auto& p = j.at("position");
    if (p.is_number()) {
      s.position.mode = PositionMode::Fixed;
      s.position.x_m = p.get<double>();
    } else if (p == "p3db") {
      s.position.mode = PositionMode::P3db;
    } else if (p == "sweep") {
      s.position.mode = PositionMode::Sweep;
    } else {
      throw ConfigError("sweep.position: expected a number, \"p3db\" or \"sweep\"");
    }
  }
  read(j, "sweep_points", s.position.sweep_points, "sweep");
  read(j, "drops", s.drops, "sweep");
  read(j, "seed", s.seed, "sweep");
  if (j.contains("traffic")) {
    std::string t;
    read(j, "traffic", t, "sweep");
    if (t == "data") s.traffic = Traffic::Data;
    else if (t == "pilots") s.traffic = Traffic::PilotsOnly;
    else throw ConfigError("sweep.traffic: expected \"data\" or \"pilots\"");
  }
  if (j.contains("channel_model")) {
    std::string m;
    read(j, "channel_model", m, "sweep");
    if (m == "time_domain") s.channel_model = ChannelModel::TimeDomain;
    else if (m == "ici_free") s.channel_model = ChannelModel::IciFree;
    else throw ConfigError("sweep.channel_model: expected \"time_domain\" or \"ici_free\"");
  }
  read(j, "threads", s.threads, "sweep");
}

}  // namespace

std::string_view to_string(DfoMethod method) {
  return method == DfoMethod::Proposed ? "proposed" : "es";
}

DfoMethod dfo_method_from_string(std::string_view name) {
  if (name == "proposed") return DfoMethod::Proposed;
  if (name == "es") return DfoMethod::ExhaustiveSearch;
  throw std::invalid_argument("unknown DFO method '" + std::string(name) + "'");
}

double rician_k_linear(double k_db) {
  if (std::isinf(k_db) && k_db > 0) return kInf;
  return std::pow(10.0, k_db / 10.0);
}

std::vector<double> parse_snr_range(std::string_view text) {
  std::vector<double> parts;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("SNR range '" + s + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw ConfigError("SNR range '" + s + "': expected a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || b < a) throw ConfigError("SNR range '" + s + "': need step > 0 and b >= a");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = a + i * step;
    if (v > b + step * 1e-6) break;
    out.push_back(v);
  }
  return out;
}

void SimConfig::validate() const {
  try {
    geometry.validate();
    grid.validate();
    const PilotPattern p = make_pilot_pattern(grid, pilots);
    p.validate(grid, taps.delays.size());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(pathloss_exponent >= 2.0)) throw ConfigError("geometry.pathloss_exponent must be >= 2");
  if (taps.delays.size() != static_cast<std::size_t>(geometry.rrh_count))
    throw ConfigError("taps.delays: need one delay per RRH");
  if (taps.rician_k_db.size() != taps.delays.size())
    throw ConfigError("taps.rician_k_db: need one K factor per tap");
  for (int d : taps.delays)
    if (d < 0 || d >= grid.cp_len) throw ConfigError("taps.delays: each delay must lie in [0, cp_len)");
  for (std::size_t i = 0; i < taps.delays.size(); ++i)
    for (std::size_t j = i + 1; j < taps.delays.size(); ++j)
      if (taps.delays[i] == taps.delays[j]) throw ConfigError("taps.delays: delays must be distinct");
  for (double k : taps.rician_k_db)
    if (std::isnan(k) || (std::isinf(k) && k < 0)) throw ConfigError("taps.rician_k_db: invalid K factor");
  if (estimators.selected.empty()) throw ConfigError("estimators.selected: at least one estimator");
  if (estimators.block_rb < 1 || estimators.block_rb > grid.resource_blocks)
    throw ConfigError("estimators.block_rb: out of range");
  if (dfo.method == DfoMethod::ExhaustiveSearch) {
    if (!(dfo.es.step_hz > 0.0) || !(dfo.es.f_max_hz > 0.0))
      throw ConfigError("dfo: ES needs es_f_max_hz > 0 and es_step_hz > 0");
    if (taps.delays.size() > 2) throw ConfigError("dfo: ES supports at most two taps");
  }
  if (sweep.snr_db.empty()) throw ConfigError("sweep.snr_db: at least one SNR");
  for (double s : sweep.snr_db)
    if (std::isnan(s) || (std::isinf(s) && s < 0)) throw ConfigError("sweep.snr_db: invalid SNR");
  if (sweep.drops < 1) throw ConfigError("sweep.drops must be >= 1");
  if (sweep.threads < 0) throw ConfigError("sweep.threads must be >= 0");
  if (sweep.position.mode == PositionMode::Fixed &&
      !(sweep.position.x_m >= 0.0 && sweep.position.x_m <= geometry.inter_rrh_distance_m))
    throw ConfigError("sweep.position: must lie in [0, inter_rrh_distance_m]");
  if (sweep.position.mode == PositionMode::Sweep && sweep.position.sweep_points < 2)
    throw ConfigError("sweep.sweep_points must be >= 2");
}

std::vector<std::string> SimConfig::warnings() const {
  std::vector<std::string> out;
  const PilotPattern p = make_pilot_pattern(grid, pilots);
  const double bound = alias_bound(p, grid, dfo.pair_policy);
  if (max_dfo(geometry) > bound)
    out.push_back("maximum Doppler " + std::to_string(max_dfo(geometry)) + " Hz exceeds the pilot alias bound " +
                  std::to_string(bound) + " Hz; phase-ratio DFO estimates will wrap");
  if (dfo.method == DfoMethod::ExhaustiveSearch && dfo.es.f_max_hz < max_dfo(geometry))
    out.push_back("ES search range is narrower than the maximum Doppler");
  return out;
}

SimConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "root", {"geometry", "grid", "pilots", "taps", "estimators", "dfo", "sweep"});
  SimConfig c;
  if (j.contains("geometry")) read_geometry(j.at("geometry"), c);
  if (j.contains("grid")) read_grid(j.at("grid"), c.grid);
  if (j.contains("pilots")) read_pilots(j.at("pilots"), c.pilots);
  if (j.contains("taps")) read_taps(j.at("taps"), c.taps);
  if (j.contains("estimators")) read_estimators(j.at("estimators"), c.estimators);
  if (j.contains("dfo")) read_dfo(j.at("dfo"), c.dfo);
  if (j.contains("sweep")) read_sweep(j.at("sweep"), c.sweep);
  c.validate();
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const SimConfig& c) {
  json j;
  j["geometry"] = {{"inter_rrh_distance_m", c.geometry.inter_rrh_distance_m},
                   {"track_offset_m", c.geometry.track_offset_m},
                   {"speed_kmh", c.geometry.speed_mps * 3.6},
                   {"carrier_hz", c.geometry.carrier_hz},
                   {"rrh_count", c.geometry.rrh_count},
                   {"light_speed_mps", c.geometry.light_speed_mps},
                   {"pathloss_exponent", c.pathloss_exponent}};
  j["grid"] = {{"fft_size", c.grid.fft_size},
               {"cp_len", c.grid.cp_len},
               {"subcarrier_spacing_hz", c.grid.subcarrier_spacing_hz},
               {"resource_blocks", c.grid.resource_blocks},
               {"symbols_per_frame", c.grid.symbols_per_frame}};
  j["pilots"] = {{"symbols_in_subframe", c.pilots.symbols_in_subframe},
                 {"subframe_length", c.pilots.subframe_length},
                 {"rb_offsets", c.pilots.rb_offsets},
                 {"seed", c.pilots.seed}};
  json ks = json::array();
  for (double k : c.taps.rician_k_db) ks.push_back(number_out(k));
  j["taps"] = {{"delays", c.taps.delays}, {"rician_k_db", ks}};
  json sel = json::array();
  for (auto e : c.estimators.selected) sel.push_back(std::string(to_string(e)));
  j["estimators"] = {{"selected", sel}, {"block_rb", c.estimators.block_rb},
                     {"ici_inflation", c.estimators.ici_inflation}};
  j["dfo"] = {{"method", std::string(to_string(c.dfo.method))},
              {"pair_policy", c.dfo.pair_policy == PairPolicy::Consecutive ? "consecutive" : "all"},
              {"es_f_max_hz", c.dfo.es.f_max_hz},
              {"es_step_hz", c.dfo.es.step_hz}};
  json snr = json::array();
  for (double s : c.sweep.snr_db) snr.push_back(number_out(s));
  json pos;
  switch (c.sweep.position.mode) {
    case PositionMode::Fixed: pos = c.sweep.position.x_m; break;
    case PositionMode::P3db: pos = "p3db"; break;
    case PositionMode::Sweep: pos = "sweep"; break;
  }
  j["sweep"] = {{"snr_db", snr},
                {"position", pos},
                {"sweep_points", c.sweep.position.sweep_points},
                {"drops", c.sweep.drops},
                {"seed", c.sweep.seed},
                {"traffic", c.sweep.traffic == Traffic::Data ? "data" : "pilots"},
                {"channel_model", c.sweep.channel_model == ChannelModel::TimeDomain ? "time_domain" : "ici_free"},
                {"threads", c.sweep.threads}};
  return j.dump(2);
}

}  // namespace hsr
