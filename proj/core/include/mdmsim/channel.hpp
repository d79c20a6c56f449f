// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "mdmsim/types.hpp"

namespace mdmsim::channel {

/// Per-wavelength N x N mode-coupling matrix, stored as complex field
/// amplitudes. Measured files carry intensities; the field view is what the
/// propagation code multiplies with.
struct TransferMatrix {
  double wavelength_nm = 0.0;
  Eigen::MatrixXcd field;

  int modes() const { return static_cast<int>(field.rows()); }

  /// Intensity view, 10*log10(|h|^2) per entry.
  Eigen::MatrixXd intensity_db() const;
};

/// Scale the whole matrix so the largest singular value is <= 1.
TransferMatrix normalize_passive(TransferMatrix m);

/// Worst crosstalk received by `mode`: max off-diagonal intensity of its row
/// relative to the through (diagonal) intensity, in dB (negative = below).
double worst_crosstalk_db(const TransferMatrix& m, int mode);

/// Through-path insertion loss of `mode` in dB (positive = loss).
double insertion_loss_db(const TransferMatrix& m, int mode);

enum class PhaseMode {
  random,  // phases drawn deterministically from the seed
  zero,    // all-real entries (phase-free synthesis)
};

/// Per-wavelength, per-mode worst-crosstalk levels and insertion-loss spread
/// used to synthesize transfer matrices when no measured file is available.
struct CrosstalkProfile {
  std::vector<double> wavelengths_nm;  // strictly increasing
  Eigen::MatrixXd xt_db;               // modes x wavelengths, entries <= 0
  std::vector<double> il_spread_db;    // per wavelength

  int modes() const { return static_cast<int>(xt_db.rows()); }
  void validate() const;
};

/// Built-in profile shaped after a fabricated 11-mode multiplexer: one
/// dominant worst mode around -7 dB at the blue end of the band, the rest
/// spread between roughly -12 and -27 dB.
CrosstalkProfile default_crosstalk_profile(int n_modes);

/// Interpolate the profile at `wavelength_nm` and draw a deterministic matrix
/// whose per-row worst off-diagonal matches the profile level. Passivity is
/// enforced by global scaling.
TransferMatrix synthesize_transfer_matrix(const CrosstalkProfile& profile,
                                          double wavelength_nm,
                                          std::uint64_t seed,
                                          PhaseMode phases = PhaseMode::random);

/// Read a matrix CSV (intensities in dB). Field magnitudes are the square
/// roots of the linear intensities; phases come from `phase_seed` since the
/// measurement caries none.
TransferMatrix load_transfer_matrix(const std::string& path,
                                    std::uint64_t phase_seed,
                                    PhaseMode phases = PhaseMode::random);

/// Write the intensity view back out in the same CSV schema.
void save_transfer_matrix(const std::string& path, const TransferMatrix& m);

/// How 2N' modes map onto time slots: each slot carries one mode per
/// polarization; a -1 entry marks the EMPTY position of an odd mode count.
struct TdmPlan {
  struct Slot {
    int pol_x = -1;
    int pol_y = -1;
  };
  std::vector<Slot> slots;
  double slot_duration_s = 0.0;
  std::vector<double> slot_delays_s;

  int mode_count() const;
  void validate(int n_modes) const;
};

/// Default pairing: consecutive modes two per slot. For the 11-mode case the
/// plan is (TE0,TE1),(TE2,TE3),(TE4,TE6),(TE7,TE8),(TE9,TE10) with TE5 alone
/// in the last slot. Slot k is delayed by k slot durations.
TdmPlan default_tdm_plan(int n_modes, std::size_t slot_symbols, double baud);

struct DualPol {
  Waveform x, y;
};

struct JonesSpec {
  bool identity = false;          // force U = I on every slot
  std::uint64_t seed = 0;
  bool lone_slot_identity = true;  // slots with an EMPTY position keep U = I
};

/// The 2x2 unitary applied to a slot (exposed for tests).
Eigen::Matrix2cd jones_matrix(const JonesSpec& spec, int slot, bool lone_slot);

/// Cyclically shift waveform k by round(k * delay * fs) samples.
std::vector<Waveform> delay_decorrelate(const std::vector<Waveform>& wfs,
                                        double delay_s);

/// Memoryless per-sample mix: out = diag(10^(-mdl/20)) * m.field * in.
std::vector<Waveform> apply_mode_coupling(const std::vector<Waveform>& wfs,
                                          const TransferMatrix& m,
                                          const std::vector<double>& mdl_db);

/// Evenly spread per-mode loss vector with the given max-min spread in dB.
std::vector<double> default_mdl_vector(int n_modes, double spread_db);

/// Combine mode pairs into dual-polarization slots through per-slot Jones
/// rotation. EMPTY positions contribute zero waveforms.
std::vector<DualPol> pair_polarizations(const std::vector<Waveform>& wfs,
                                        const TdmPlan& plan,
                                        const JonesSpec& jones);

/// Zero samples outside window slot_index of the gating cycle. When baud is
/// given, windows shorter than 10 symbols raise DegenerateWindowError.
Waveform gate(const Waveform& wf, double duty, double period_s, int slot_index,
              double baud = 0.0);

/// Sum the delayed slots into one dual-pol record. Slots whose supports
/// overlap by more than `guard_samples` per boundary raise OverlapError.
DualPol tdm_combine(const std::vector<DualPol>& slots, const TdmPlan& plan,
                    int guard_samples = 2);

struct Echo {
  double delay_s = 0.0;
  double level_db = -30.0;
};

/// out = in + sum of attenuated cyclic-shifted copies. Echo levels are
/// limited to -10 dB and below.
Waveform add_reflection_echo(const Waveform& wf, const std::vector<Echo>& echoes);

}  // namespace mdmsim::channel
