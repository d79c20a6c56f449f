// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mdmsim/modulation.hpp"
#include "mdmsim/types.hpp"

namespace mdmsim::sigproc {

// Long span because the rolloff-0.01 tail decays like 1/t. 512 symbols keeps
// both the worst symbol-instant ISI of the Tx+Rx cascade (2e-4) and the
// aggregate round-trip RMS symbol error (8e-4) below the 1e-3 budget.
inline constexpr int kDefaultRrcSpan = 512;

enum class PrbsMode {
  seeded_uniform,  // xoshiro-driven fair coin (default)
  lfsr_prbs17,     // hardware-faithful PRBS-17, x^17 + x^14 + 1
};

/// Deterministic pseudo random bits. In lfsr_prbs17 mode the seed selects the
/// (nonzero) start state of the shift register; the sequence period is 2^17-1.
BitSequence generate_prbs(std::uint64_t seed, std::size_t length,
                          PrbsMode mode = PrbsMode::seeded_uniform);

/// Gray-map bits onto constellation symbols. Bit count must divide evenly.
SymbolFrame map_bits(const BitSequence& bits, const ModulationFormat& format,
                     double baud);

/// Nearest-point hard decisions back to bits. Inverse of map_bits on
/// noiseless frames.
BitSequence hard_decide(const SymbolFrame& frame);

/// Root-raised-cosine taps: unit energy, symmetric, length span*sps + 1.
/// The closed form's singular points (t = 0, |t| = 1/(4*rolloff)) are
/// evaluated by their analytic limits.
std::vector<double> rrc_taps(double rolloff, int span, int sps);

/// Upsample and RRC-shape a frame into a waveform at baud*sps. The frame is
/// treated as circular, so a shaped record convolves cleanly end to end.
Waveform shape_pulses(const SymbolFrame& frame, int sps, double rolloff,
                      int span = kDefaultRrcSpan);

/// Resample to 2 samples/symbol if needed, matched-filter, and pick one
/// sample per symbol at the given timing phase (samples at 2 sps).
SymbolFrame matched_filter_downsample(const Waveform& wf, double baud,
                                      double rolloff, int timing_phase = 0,
                                      int span = kDefaultRrcSpan,
                                      const ModulationFormat* format = nullptr);

/// FFT-based band-limited rational resampling (the record is circular).
/// When the ratio is not representable on this record length, the nearest
/// achievable length is used and the output carries the exact realized rate.
Waveform resample(const Waveform& wf, double target_rate);

/// Complex circular AWGN at the given SNR relative to measured signal power.
/// snr_db = +infinity is the documented "no noise" sentinel.
Waveform add_awgn(const Waveform& wf, double snr_db, std::uint64_t seed);

/// Wiener laser phase noise: phase increments are N(0, 2*pi*linewidth/fs).
Waveform add_phase_noise(const Waveform& wf, double linewidth_hz,
                         std::uint64_t seed);

/// Multiply by exp(j*2*pi*offset*n/fs). |offset| must be below fs/2.
Waveform add_freq_offset(const Waveform& wf, double offset_hz);

/// Circular cyclic shift by an integer number of samples (positive = delay).
std::vector<cd> cyclic_shift(const std::vector<cd>& x, long shift);

}  // namespace mdmsim::sigproc
