// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace mdmsim::io {

/// Every knob of a run. Defaults reproduce the paper-faithful scenario:
/// 11 modes, 30 GBaud, rolloff 0.01, 512-tap 11x11 equalizer, 7 wavelengths
/// spanning 1530-1560 nm. The config file is plain text, `key = value` under
/// [section] headers; unknown keys are rejected.
struct ExperimentConfig {
  // [signal]
  std::string format = "qam16";  // qpsk | qam16
  double baud_hz = 30e9;
  int samples_per_symbol = 2;
  double rolloff = 0.01;
  int rrc_span_symbols = 512;
  int modes = 11;

  // [data]
  std::uint64_t training_symbols = 32768;
  std::uint64_t payload_symbols = 131072;
  std::string prbs = "uniform";  // uniform | prbs17
  bool shared_pattern_emulation = false;
  std::uint64_t seed = 1;

  // [channel]
  std::string source = "synth";  // synth | file
  std::vector<std::string> matrix_files;
  std::string matrix_phases = "random";  // random | zero
  std::uint64_t matrix_seed = 7;
  double crosstalk_db = std::numeric_limits<double>::quiet_NaN();
  double il_spread_db = 1.0;
  double mdl_db = 7.0;
  std::vector<double> launch_power_db;
  double decorrelation_delay_s = 25e-9;
  std::string jones = "random";  // random | identity
  std::uint64_t jones_seed = 11;
  std::vector<double> echo_delay_symbols;
  std::vector<double> echo_level_db;

  // [impairments]
  double snr_db = 18.0;  // inf = no noise loading
  double linewidth_hz = 0.0;
  double freq_offset_hz = 0.0;
  std::uint64_t noise_seed = 3;

  // [tdm]
  double jitter_samples = 0.0;
  int guard_samples = 2;
  int sync_search_samples = 16;
  double sync_threshold = 0.5;

  // [equalizer]
  int num_taps = 512;
  double step = 1.0;
  int passes = 10;
  bool normalized = true;
  std::string equalizer_mode = "mimo";  // mimo | single
  bool drop_empty_tributary = true;
  int phase_track_block = 64;

  // [run]
  std::vector<double> wavelengths_nm = {1530, 1535, 1540, 1545, 1550, 1555, 1560};
  double fec_overhead = 0.07;
  double grid_hz = 33e9;
  std::uint64_t ber_skip_bits = 0;
  int constellation_points = 2000;

  void validate() const;

  std::uint64_t slot_symbols() const { return training_symbols + payload_symbols; }
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Human-readable schema: every key with its type, default, and meaning.
std::string config_schema();

}  // namespace mdmsim::io
