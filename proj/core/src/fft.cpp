// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace mdmsim::fft {

namespace {

std::mutex g_plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> g_plans;

fftw_plan plan_for(std::size_t n, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  // Dummy buffers only shape the plan; FFTW_UNALIGNED lets us execute on
  // whatever the caller hands us later.
  std::vector<cd> dummy_in(n), dummy_out(n);
  fftw_plan p = fftw_plan_dft_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(dummy_in.data()),
      reinterpret_cast<fftw_complex*>(dummy_out.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  g_plans.emplace(key, p);
  return p;
}

}  // namespace

void transform(const cd* in, cd* out, std::size_t n, bool inverse) {
  if (n == 0) return;
  const int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
  fftw_plan p = plan_for(n, sign);
  if (in == out) {
    std::vector<cd> tmp(in, in + n);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out));
  } else {
    fftw_execute_dft(p,
                     reinterpret_cast<fftw_complex*>(const_cast<cd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
  }
}

std::vector<cd> forward(const std::vector<cd>& in) {
  std::vector<cd> out(in.size());
  ::mdmsim::fft::transform(in.data(), out.data(), in.size(), false);
  return out;
}

std::vector<cd> inverse(const std::vector<cd>& in) {
  std::vector<cd> out(in.size());
  ::mdmsim::fft::transform(in.data(), out.data(), in.size(), true);
  return out;
}

void forward_inplace(std::vector<cd>& x) {
  ::mdmsim::fft::transform(x.data(), x.data(), x.size(), false);
}

void inverse_inplace(std::vector<cd>& x) {
  ::mdmsim::fft::transform(x.data(), x.data(), x.size(), true);
}

}  // namespace mdmsim::fft
