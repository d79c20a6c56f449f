// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mdmsim/errors.hpp"
#include "mdmsim/modulation.hpp"

namespace mdmsim::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int lineno) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (...) {
    throw ParseError("bad number '" + t + "'", lineno);
  }
}

std::uint64_t parse_u64(const std::string& s, int lineno) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (...) {
    throw ParseError("bad integer '" + t + "'", lineno);
  }
}

int parse_int(const std::string& s, int lineno) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (...) {
    throw ParseError("bad integer '" + t + "'", lineno);
  }
}

bool parse_bool(const std::string& s, int lineno) {
  const std::string t = trim(s);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParseError("bad boolean '" + t + "' (use true/false)", lineno);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  const char* type;
  const char* doc;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, int)> set;
};

#define F_DOUBLE(sec, key, member, doc)                                   \
  Field{sec, key, "float", doc,                                           \
        [](const ExperimentConfig& c) { return fmt_double(c.member); },   \
        [](ExperimentConfig& c, const std::string& v, int ln) {           \
          c.member = parse_double(v, ln);                                 \
        }}
#define F_INT(sec, key, member, doc)                                      \
  Field{sec, key, "int", doc,                                             \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& v, int ln) {           \
          c.member = parse_int(v, ln);                                    \
        }}
#define F_U64(sec, key, member, doc)                                      \
  Field{sec, key, "uint", doc,                                            \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& v, int ln) {           \
          c.member = parse_u64(v, ln);                                    \
        }}
#define F_BOOL(sec, key, member, doc)                                     \
  Field{sec, key, "bool", doc,                                            \
        [](const ExperimentConfig& c) {                                   \
          return std::string(c.member ? "true" : "false");                \
        },                                                                \
        [](ExperimentConfig& c, const std::string& v, int ln) {           \
          c.member = parse_bool(v, ln);                                   \
        }}
#define F_STR(sec, key, member, doc)                                      \
  Field{sec, key, "string", doc,                                          \
        [](const ExperimentConfig& c) { return c.member; },               \
        [](ExperimentConfig& c, const std::string& v, int) {              \
          c.member = trim(v);                                             \
        }}
#define F_DLIST(sec, key, member, doc)                                    \
  Field{sec, key, "float list", doc,                                      \
        [](const ExperimentConfig& c) { return join(c.member); },         \
        [](ExperimentConfig& c, const std::string& v, int ln) {           \
          c.member.clear();                                               \
          for (const auto& item : split_list(v))                          \
            c.member.push_back(parse_double(item, ln));                   \
        }}
#define F_SLIST(sec, key, member, doc)                                    \
  Field{sec, key, "string list", doc,                                     \
        [](const ExperimentConfig& c) { return join(c.member); },         \
        [](ExperimentConfig& c, const std::string& v, int) {              \
          c.member = split_list(v);                                       \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> defs = {
      F_STR("signal", "format", format, "modulation format: qpsk | qam16"),
      F_DOUBLE("signal", "baud_hz", baud_hz, "symbol rate in Hz"),
      F_INT("signal", "samples_per_symbol", samples_per_symbol,
            "transmit oversampling (>= 2)"),
      F_DOUBLE("signal", "rolloff", rolloff, "RRC roll-off factor"),
      F_INT("signal", "rrc_span_symbols", rrc_span_symbols, "RRC filter span in symbols"),
      F_INT("signal", "modes", modes, "number of waveguide modes (2..16)"),

      F_U64("data", "training_symbols", training_symbols, "training prefix per mode"),
      F_U64("data", "payload_symbols", payload_symbols, "payload symbols per mode"),
      F_STR("data", "prbs", prbs, "bit source: uniform | prbs17"),
      F_BOOL("data", "shared_pattern_emulation", shared_pattern_emulation,
             "all modes carry delay-shifted replicas of one pattern"),
      F_U64("data", "seed", seed, "master seed; every stage derives from it"),

      F_STR("channel", "source", source, "channel matrix source: synth | file"),
      F_SLIST("channel", "matrix_files", matrix_files,
              "matrix CSV per wavelength when source = file"),
      F_STR("channel", "matrix_phases", matrix_phases,
            "entry phases: random | zero"),
      F_U64("channel", "matrix_seed", matrix_seed, "seed for synthesis/phases"),
      F_DOUBLE("channel", "crosstalk_db", crosstalk_db,
               "override: worst crosstalk for every mode (nan = builtin profile)"),
      F_DOUBLE("channel", "il_spread_db", il_spread_db, "insertion-loss spread"),
      F_DOUBLE("channel", "mdl_db", mdl_db, "mode-dependent loss spread"),
      F_DLIST("channel", "launch_power_db", launch_power_db,
              "per-mode launch offsets (empty = uniform)"),
      F_DOUBLE("channel", "decorrelation_delay_s", decorrelation_delay_s,
               "relative delay between pattern replicas"),
      F_STR("channel", "jones", jones, "polarization mixing: random | identity"),
      F_U64("channel", "jones_seed", jones_seed, "seed for per-slot Jones draws"),
      F_DLIST("channel", "echo_delay_symbols", echo_delay_symbols,
              "reflection delays in symbols"),
      F_DLIST("channel", "echo_level_db", echo_level_db,
              "reflection levels in dB (<= -10)"),

      F_DOUBLE("impairments", "snr_db", snr_db,
               "per-mode loaded SNR at the waveform sample rate (inf = off)"),
      F_DOUBLE("impairments", "linewidth_hz", linewidth_hz, "laser linewidth"),
      F_DOUBLE("impairments", "freq_offset_hz", freq_offset_hz,
               "residual carrier offset"),
      F_U64("impairments", "noise_seed", noise_seed, "seed for noise draws"),

      F_DOUBLE("tdm", "jitter_samples", jitter_samples,
               "spool placement jitter, +- samples"),
      F_INT("tdm", "guard_samples", guard_samples, "allowed slot overlap"),
      F_INT("tdm", "sync_search_samples", sync_search_samples,
            "stitch alignment search radius"),
      F_DOUBLE("tdm", "sync_threshold", sync_threshold,
               "normalized correlation floor for slot sync"),

      F_INT("equalizer", "num_taps", num_taps, "symbol-spaced taps per element"),
      F_DOUBLE("equalizer", "step", step, "LMS step (per-bin when normalized)"),
      F_INT("equalizer", "passes", passes, "training passes"),
      F_BOOL("equalizer", "normalized", normalized, "per-bin NLMS scaling"),
      F_STR("equalizer", "equalizer_mode", equalizer_mode,
            "mimo | single (diagonal-only)"),
      F_BOOL("equalizer", "drop_empty_tributary", drop_empty_tributary,
             "use 11 of the 12 stitched tributaries"),
      F_INT("equalizer", "phase_track_block", phase_track_block,
            "phase tracking block length in symbols"),

      F_DLIST("run", "wavelengths_nm", wavelengths_nm, "wavelengths to simulate"),
      F_DOUBLE("run", "fec_overhead", fec_overhead, "FEC overhead fraction"),
      F_DOUBLE("run", "grid_hz", grid_hz, "WDM grid for spectral efficiency"),
      F_U64("run", "ber_skip_bits", ber_skip_bits,
            "payload bits discarded before counting"),
      F_INT("run", "constellation_points", constellation_points,
            "equalized symbols kept per mode for plotting"),
  };
  return defs;
}

#undef F_DOUBLE
#undef F_INT
#undef F_U64
#undef F_BOOL
#undef F_STR
#undef F_DLIST
#undef F_SLIST

}  // namespace

void ExperimentConfig::validate() const {
  ModulationFormat::from_name(format);  // throws on junk
  if (baud_hz <= 0) throw std::invalid_argument("config: baud_hz must be > 0");
  if (samples_per_symbol < 2)
    throw std::invalid_argument("config: samples_per_symbol must be >= 2");
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("config: rolloff must be in [0, 1]");
  if (rrc_span_symbols <= 0 || rrc_span_symbols % 2 != 0)
    throw std::invalid_argument("config: rrc_span_symbols must be even and positive");
  if (modes < 2 || modes > 16)
    throw std::invalid_argument("config: modes must be in 2..16");
  if (prbs != "uniform" && prbs != "prbs17")
    throw std::invalid_argument("config: prbs must be uniform or prbs17");
  if (source != "synth" && source != "file")
    throw std::invalid_argument("config: source must be synth or file");
  if (matrix_phases != "random" && matrix_phases != "zero")
    throw std::invalid_argument("config: matrix_phases must be random or zero");
  if (jones != "random" && jones != "identity")
    throw std::invalid_argument("config: jones must be random or identity");
  if (equalizer_mode != "mimo" && equalizer_mode != "single")
    throw std::invalid_argument("config: equalizer_mode must be mimo or single");
  if (source == "file" && matrix_files.empty())
    throw std::invalid_argument("config: source=file needs matrix_files");
  if (!launch_power_db.empty() &&
      launch_power_db.size() != static_cast<std::size_t>(modes))
    throw std::invalid_argument("config: launch_power_db must list one entry per mode");
  if (echo_delay_symbols.size() != echo_level_db.size())
    throw std::invalid_argument("config: echo lists must have equal lengths");
  if (num_taps < 2 || num_taps % 2 != 0)
    throw std::invalid_argument("config: num_taps must be even and >= 2");
  if (training_symbols < 2 * static_cast<std::uint64_t>(num_taps))
    throw std::invalid_argument("config: training_symbols must be >= 2 * num_taps");
  if (payload_symbols == 0)
    throw std::invalid_argument("config: payload_symbols must be > 0");
  if (passes < 1) throw std::invalid_argument("config: passes must be >= 1");
  if (step <= 0.0) throw std::invalid_argument("config: step must be > 0");
  if (sync_threshold <= 0.0 || sync_threshold > 1.0)
    throw std::invalid_argument("config: sync_threshold must be in (0, 1]");
  if (phase_track_block < 16)
    throw std::invalid_argument("config: phase_track_block must be >= 16");
  if (wavelengths_nm.empty())
    throw std::invalid_argument("config: wavelengths_nm must not be empty");
  if (fec_overhead < 0.0)
    throw std::invalid_argument("config: fec_overhead must be >= 0");
  if (grid_hz <= 0.0) throw std::invalid_argument("config: grid_hz must be > 0");
  for (double l : echo_level_db) {
    if (l > -10.0)
      throw std::invalid_argument("config: echo levels must be <= -10 dB");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, const Field*> lookup;
  std::map<std::string, bool> known_sections;
  for (const auto& f : fields()) {
    lookup[std::string(f.section) + "." + f.key] = &f;
    known_sections[f.section] = true;
  }

  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("unterminated section header", lineno);
      section = trim(t.substr(1, t.size() - 2));
      if (!known_sections.count(section))
        throw ParseError("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw ParseError("key '" + key + "' outside any section", lineno);
    const auto it = lookup.find(section + "." + key);
    if (it == lookup.end())
      throw ParseError("unknown key '" + key + "' in section [" + section + "]",
                       lineno);
    it->second->set(cfg, value, lineno);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string config_schema() {
  const ExperimentConfig defaults;
  std::string out = "Configuration schema (key = value under [section]; "
                    "unknown keys are rejected)\n";
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += "\n[" + section + "]\n";
    }
    std::string def = f.get(defaults);
    if (def.empty()) def = "(empty)";
    out += "  " + std::string(f.key) + "  (" + f.type + ", default " + def +
           ") -- " + f.doc + "\n";
  }
  return out;
}

}  // namespace mdmsim::io
