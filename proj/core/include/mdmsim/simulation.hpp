// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mdmsim/config.hpp"
#include "mdmsim/metrics.hpp"
#include "mdmsim/types.hpp"

namespace mdmsim::sim {

struct ModeResult {
  int mode = 0;
  metrics::BerEntry ber;
  double evm_percent = 0.0;
};

struct WavelengthResult {
  double wavelength_nm = 0.0;
  double snr_db = 0.0;
  std::vector<ModeResult> modes;
  double mean_ber = 0.0;
  double best_ber = 0.0;
  double worst_ber = 0.0;
  Eigen::MatrixXd intensity_db;            // estimated system matrix
  std::vector<double> impulse_profile_db;  // peak-normalized
  int impulse_peak_lag = 0;
  std::vector<double> mse_history;
  bool converged = false;
  double channel_mdl_db = 0.0;             // of the applied matrix incl. loss vector
  std::vector<long> stitch_lags;
  std::vector<std::vector<cd>> constellations;  // subsampled equalized payload
};

/// Everything a run produced, self-describing through the embedded config.
struct RunResult {
  io::ExperimentConfig config;
  std::vector<WavelengthResult> per_wavelength;
  metrics::CapacityReport capacity;
};

/// Full chain: generate -> map -> shape (-> decorrelate) -> impair -> couple
/// -> pair -> gate/combine -> stitch -> sync -> equalize -> metrics, once per
/// configured wavelength. Deterministic per (config, seed).
RunResult run_simulation(const io::ExperimentConfig& cfg);

enum class SweepAxis { wavelength, snr };

struct SweepPoint {
  double value = 0.0;
  bool failed = false;
  std::string error;
  RunResult result;
};

/// Independent runs per point (seed = config seed + index). Failed points are
/// recorded and the sweep continues.
std::vector<SweepPoint> sweep(const io::ExperimentConfig& cfg, SweepAxis axis,
                              const std::vector<double>& values);

struct ModeCharacterization {
  int mode = 0;
  double worst_crosstalk_db = 0.0;
  double insertion_loss_db = 0.0;
};

struct WavelengthCharacterization {
  std::string file;
  double wavelength_nm = 0.0;
  std::vector<ModeCharacterization> modes;
  double mdl_db = 0.0;
  int worst_mode = 0;
};

/// Crosstalk/IL/MDL report over a set of measured matrix files.
std::vector<WavelengthCharacterization> characterize(
    const std::vector<std::string>& matrix_files);

}  // namespace mdmsim::sim
