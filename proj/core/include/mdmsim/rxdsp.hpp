// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "mdmsim/channel.hpp"
#include "mdmsim/modulation.hpp"
#include "mdmsim/types.hpp"

namespace mdmsim::rxdsp {

/// Where a tributary came from: slot index, polarization (0 = X, 1 = Y) and
/// the mode nominally carried there (-1 for the EMPTY position).
struct TributaryMap {
  int slot = 0;
  int pol = 0;
  int mode = -1;
};

/// Symbol-spaced streams cut out of the TDM record, one per slot and
/// polarization (12 for 11 modes).
struct TributarySet {
  std::vector<std::vector<cd>> tribs;
  std::vector<TributaryMap> mapping;
  double baud = 0.0;
  /// Fine alignment found per slot, in samples relative to the nominal
  /// window boundary (empty when not produced by tdm_stitch).
  std::vector<long> slot_lags;

  std::size_t size() const { return tribs.size(); }

  /// Drop tributaries whose mapped mode is EMPTY (the 12 -> 11 reduction).
  TributarySet without_empty() const;
};

struct StitchOptions {
  int sps = 2;
  double rolloff = 0.01;
  int rrc_span = 512;
  int search_samples = 16;       // +- lag search around the nominal boundary
  double sync_threshold = 0.5;   // normalized correlation floor
  std::size_t corr_samples = 4096;
  std::size_t corr_chunk = 128;  // piecewise-coherent correlation chunk
};

/// Cut the dual-polarization record into per-slot segments, fine-align each
/// against the shaped training prefix of the modes mapped there, and matched
/// filter down to symbol rate.
TributarySet tdm_stitch(const channel::DualPol& record,
                        const channel::TdmPlan& plan,
                        const std::vector<SymbolFrame>& training,
                        const StitchOptions& opt = {});

/// Offset (in symbols) of the training sequence within the tributary,
/// located by normalized circular cross-correlation magnitude. When `peak`
/// is given it receives the normalized correlation at the winning offset.
std::size_t frame_sync(const std::vector<cd>& tributary,
                       const SymbolFrame& training, double* peak = nullptr);

/// Fourth-power spectral estimate of residual carrier offset in Hz. For
/// 16QAM only symbols near the corner ring (QPSK-like phases) contribute.
double estimate_freq_offset(const std::vector<cd>& symbols,
                            const ModulationFormat& format, double baud);

struct EqualizerConfig {
  int num_taps = 512;            // symbol-spaced taps per MIMO element
  double step = 0.1;             // per-bin step when normalized
  std::size_t training_symbols = 0;  // 0 = full training frame
  int passes = 3;
  bool normalized = true;        // per-bin NLMS scaling by |X|^2 + eps
  bool diagonal_only = false;    // single-mode equalization (no MIMO terms)
  bool decision_directed = false;  // adapt on decisions after training
  double epsilon = 1e-6;

  int fft_size() const { return 2 * num_taps; }
};

struct EqualizerState {
  int n_out = 0;
  int n_in = 0;
  int num_taps = 0;
  /// weights[i][j]: fft_size-long tap spectrum from input j to output i.
  std::vector<std::vector<std::vector<cd>>> weights;
  std::vector<double> mse_history;  // per adaptation block
  bool converged = false;
  std::vector<int> input_modes;     // nominal mode per input (-1 EMPTY)
};

struct EqualizeResult {
  std::vector<SymbolFrame> outputs;  // one per training frame, mode order
  EqualizerState state;
};

/// Frequency-domain block-LMS MIMO equalizer: overlap-save with 50% overlap
/// (block = num_taps, fft = 2*num_taps), data-aided updates with the
/// gradient constraint (time-domain tail zeroed) so a valid num_taps
/// response can always be extracted. Tributaries are treated as circular.
EqualizeResult fd_lms_equalize(const TributarySet& tribs,
                               const std::vector<SymbolFrame>& training,
                               const EqualizerConfig& cfg);

/// Classic sample-by-sample time-domain multichannel LMS, kept as an
/// independent verification oracle for fd_lms_equalize. Small instances only.
std::vector<SymbolFrame> td_lms_reference(const TributarySet& tribs,
                                          const std::vector<SymbolFrame>& training,
                                          int taps, double step, int passes = 3,
                                          std::vector<double>* mse_history = nullptr);

/// Remove per-block average phase against a known reference.
SymbolFrame phase_track(const SymbolFrame& symbols, const SymbolFrame& reference,
                        int block = 64);

/// Decision-directed variant for payload symbols.
SymbolFrame phase_track_decision_directed(const SymbolFrame& symbols,
                                          int block = 64);

struct ImpulseResponse {
  int n_out = 0;
  int n_in = 0;
  int num_taps = 0;
  std::vector<std::vector<std::vector<cd>>> h;  // [out][in][num_taps]
  std::vector<double> intensity_profile_db;     // peak-normalized, max = 0 dB
  int peak_lag = 0;
};

/// Time-domain responses implied by the converged weights and the averaged
/// normalized intensity profile over all port pairs.
ImpulseResponse extract_impulse_response(const EqualizerState& state);

/// Complex least-squares response from every training input to every
/// tributary over lags [-lag_radius, +lag_radius]. This is a forward channel
/// estimate, not the equalizer inverse.
struct ChannelEstimate {
  int lag_radius = 0;
  /// response[trib][mode][tau + lag_radius]
  std::vector<std::vector<std::vector<cd>>> response;

  /// Predict tributary `trib` at time n from the training symbols.
  cd predict(const std::vector<SymbolFrame>& training, std::size_t trib,
             long n) const;
};

ChannelEstimate estimate_channel_response(const TributarySet& tribs,
                                          const std::vector<SymbolFrame>& training,
                                          int lag_radius = 8);

/// Least-squares channel estimate reduced to the N x N intensity matrix in
/// dB, normalized so the largest entry is 0; rows are ordered by the nominal
/// mode of each tributary, columns by transmitted mode.
Eigen::MatrixXd estimate_intensity_transfer_matrix(
    const EqualizerState& state, const TributarySet& tribs,
    const std::vector<SymbolFrame>& training, int lag_radius = 8);

}  // namespace mdmsim::rxdsp
