// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mdmsim/types.hpp"

namespace mdmsim::io {

// Binary waveform container: magic "MDMSIMWF", u32 version (1), f64 sample
// rate in Hz, u32 channel count, u64 sample count, then sample-major
// interleaved complex pairs of little-endian 8-byte floats.

void save_waveforms(const std::string& path, const std::vector<Waveform>& channels);
std::vector<Waveform> load_waveforms(const std::string& path);

}  // namespace mdmsim::io
