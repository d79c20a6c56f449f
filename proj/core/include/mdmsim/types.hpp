// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace mdmsim {

using cd = std::complex<double>;

/// Ordered binary sequence, values restricted to {0, 1}.
using BitSequence = std::vector<std::uint8_t>;

/// Uniformly sampled complex baseband record. The universal signal carrier
/// between pipeline stages.
struct Waveform {
  std::vector<cd> samples;
  double sample_rate = 0.0;  // Hz
  std::string label;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Mean |x|^2 over the record. Zero for an empty waveform.
double mean_power(const std::vector<cd>& samples);
inline double mean_power(const Waveform& wf) { return mean_power(wf.samples); }

/// "TE0", "TE1", ... naming used by file formats and reports.
std::string mode_label(int mode);

/// Inverse of mode_label; returns -1 if the label does not parse.
int mode_from_label(const std::string& label);

}  // namespace mdmsim
