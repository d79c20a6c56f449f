// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "mdmsim/types.hpp"

namespace mdmsim::fft {

// Thin wrapper over FFTW double-precision c2c transforms. Plans are cached
// per (size, direction) behind a mutex and created with FFTW_ESTIMATE so
// that plan selection, and therefore rounding, is deterministic run to run.

/// out = FFT(in) (unscaled) or IFFT(in) (scaled by 1/n). in == out is allowed.
void transform(const cd* in, cd* out, std::size_t n, bool inverse);

std::vector<cd> forward(const std::vector<cd>& in);
std::vector<cd> inverse(const std::vector<cd>& in);

void forward_inplace(std::vector<cd>& x);
void inverse_inplace(std::vector<cd>& x);

}  // namespace mdmsim::fft
