// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdmsim/fft.hpp"
#include "mdmsim/rng.hpp"

namespace mdmsim::sigproc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Circular zero-phase FIR: taps are wrapped so the center tap sits at index
// 0, then applied by spectral multiplication. Filtering a record this way
// keeps symbol k centered at sample k*sps with no group delay to track.
std::vector<cd> circular_filter(const std::vector<cd>& x,
                                const std::vector<double>& taps) {
  const std::size_t n = x.size();
  std::vector<cd> h(n, cd(0.0, 0.0));
  const long center = static_cast<long>(taps.size() / 2);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const long pos = (static_cast<long>(i) - center) % static_cast<long>(n);
    const std::size_t idx = static_cast<std::size_t>(pos < 0 ? pos + static_cast<long>(n) : pos);
    h[idx] += taps[i];
  }
  fft::forward_inplace(h);
  std::vector<cd> y = fft::forward(x);
  for (std::size_t k = 0; k < n; ++k) y[k] *= h[k];
  fft::inverse_inplace(y);
  return y;
}

}  // namespace

BitSequence generate_prbs(std::uint64_t seed, std::size_t length, PrbsMode mode) {
  if (length == 0) throw std::invalid_argument("generate_prbs: length must be >= 1");
  BitSequence bits(length);
  if (mode == PrbsMode::seeded_uniform) {
    Rng rng(seed);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
  } else {
    // Fibonacci LFSR, polynomial x^17 + x^14 + 1. Any nonzero start state
    // yields the full 2^17 - 1 period.
    const std::uint32_t mask = (1u << 17) - 1u;
    std::uint32_t state = static_cast<std::uint32_t>(seed % mask) + 1u;
    for (auto& b : bits) {
      const std::uint32_t out = (state >> 16) & 1u;
      const std::uint32_t fb = ((state >> 16) ^ (state >> 13)) & 1u;
      state = ((state << 1) | fb) & mask;
      b = static_cast<std::uint8_t>(out);
    }
  }
  return bits;
}

SymbolFrame map_bits(const BitSequence& bits, const ModulationFormat& format,
                     double baud) {
  const int bps = format.bits_per_symbol();
  if (bits.empty() || bits.size() % static_cast<std::size_t>(bps) != 0) {
    throw std::invalid_argument("map_bits: bit count not divisible by bits/symbol");
  }
  SymbolFrame frame;
  frame.format = &format;
  frame.baud = baud;
  frame.symbols.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    unsigned value = 0;
    for (int b = 0; b < bps; ++b) value = (value << 1) | (bits[i + b] & 1u);
    frame.symbols.push_back(format.map(value));
  }
  return frame;
}

BitSequence hard_decide(const SymbolFrame& frame) {
  if (!frame.format) throw std::invalid_argument("hard_decide: frame has no format");
  const int bps = frame.format->bits_per_symbol();
  BitSequence bits;
  bits.reserve(frame.symbols.size() * bps);
  for (const cd s : frame.symbols) {
    const unsigned value = frame.format->decide(s);
    for (int b = bps - 1; b >= 0; --b) {
      bits.push_back(static_cast<std::uint8_t>((value >> b) & 1u));
    }
  }
  return bits;
}

std::vector<double> rrc_taps(double rolloff, int span, int sps) {
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("rrc_taps: rolloff must be in [0, 1]");
  if (span <= 0 || span % 2 != 0)
    throw std::invalid_argument("rrc_taps: span must be positive and even");
  if (sps < 1) throw std::invalid_argument("rrc_taps: sps must be >= 1");

  const int n = span * sps + 1;
  const int center = span * sps / 2;
  std::vector<double> taps(n);
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k - center) / sps;  // in symbols
    double v;
    if (rolloff == 0.0) {
      v = (t == 0.0) ? 1.0 : std::sin(kPi * t) / (kPi * t);
    } else if (t == 0.0) {
      v = 1.0 - rolloff + 4.0 * rolloff / kPi;
    } else {
      const double x = 4.0 * rolloff * t;
      if (std::abs(1.0 - x * x) < 1e-9) {
        // analytic limit at |t| = 1/(4*rolloff)
        const double a = kPi / (4.0 * rolloff);
        v = (rolloff / std::sqrt(2.0)) *
            ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
      } else {
        v = (std::sin(kPi * t * (1.0 - rolloff)) +
             x * std::cos(kPi * t * (1.0 + rolloff))) /
            (kPi * t * (1.0 - x * x));
      }
    }
    taps[k] = v;
  }
  double energy = 0.0;
  for (double v : taps) energy += v * v;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : taps) v *= scale;
  return taps;
}

Waveform shape_pulses(const SymbolFrame& frame, int sps, double rolloff, int span) {
  if (sps < 2) throw std::invalid_argument("shape_pulses: sps must be >= 2");
  if (frame.empty()) throw std::invalid_argument("shape_pulses: empty frame");

  const std::size_t n = frame.size() * static_cast<std::size_t>(sps);
  std::vector<cd> x(n, cd(0.0, 0.0));
  for (std::size_t k = 0; k < frame.size(); ++k) {
    x[k * static_cast<std::size_t>(sps)] = frame.symbols[k];
  }
  Waveform wf;
  wf.samples = circular_filter(x, rrc_taps(rolloff, span, sps));
  wf.sample_rate = frame.baud * sps;
  return wf;
}

SymbolFrame matched_filter_downsample(const Waveform& wf, double baud,
                                      double rolloff, int timing_phase,
                                      int span, const ModulationFormat* format) {
  if (wf.empty()) throw std::invalid_argument("matched_filter_downsample: empty input");
  if (baud <= 0.0) throw std::invalid_argument("matched_filter_downsample: baud must be > 0");

  constexpr int kSps = 2;
  const double want_rate = baud * kSps;
  const Waveform* src = &wf;
  Waveform resampled;
  if (std::abs(wf.sample_rate - want_rate) > 1e-6 * want_rate) {
    resampled = resample(wf, want_rate);
    src = &resampled;
  }
  std::vector<cd> filtered = circular_filter(src->samples, rrc_taps(rolloff, span, kSps));

  const std::size_t n = filtered.size();
  SymbolFrame out;
  out.format = format;
  out.baud = baud;
  out.symbols.reserve(n / kSps);
  for (std::size_t k = 0; k * kSps < n; ++k) {
    long idx = static_cast<long>(k) * kSps + timing_phase;
    idx %= static_cast<long>(n);
    if (idx < 0) idx += static_cast<long>(n);
    out.symbols.push_back(filtered[static_cast<std::size_t>(idx)]);
  }
  return out;
}

Waveform resample(const Waveform& wf, double target_rate) {
  if (target_rate <= 0.0) throw std::invalid_argument("resample: target_rate must be > 0");
  if (wf.empty()) throw std::invalid_argument("resample: empty input");
  if (target_rate == wf.sample_rate) return wf;

  const std::size_t L = wf.size();
  const auto M = static_cast<std::size_t>(
      std::llround(static_cast<double>(L) * target_rate / wf.sample_rate));
  if (M == 0) throw std::invalid_argument("resample: record too short for target rate");

  Waveform out;
  out.label = wf.label;
  out.sample_rate = wf.sample_rate * static_cast<double>(M) / static_cast<double>(L);
  if (M == L) {
    out.samples = wf.samples;
    return out;
  }

  std::vector<cd> X = fft::forward(wf.samples);
  std::vector<cd> Y(M, cd(0.0, 0.0));
  const std::size_t K = std::min(L, M);
  const std::size_t nyq = K / 2;
  for (std::size_t k = 0; k < nyq; ++k) Y[k] = X[k];
  for (std::size_t k = 1; k + nyq < K + 1 && k < M; ++k) Y[M - k] = X[L - k];
  if (K % 2 == 0) {
    if (M > L) {
      // upsampling: split the Nyquist bin so real inputs stay real
      Y[nyq] = 0.5 * X[nyq];
      Y[M - nyq] = 0.5 * X[nyq];
    } else {
      // downsampling: fold the two contributions of the new Nyquist bin
      Y[nyq] = X[nyq] + X[L - nyq];
    }
  }
  fft::inverse_inplace(Y);
  const double scale = static_cast<double>(M) / static_cast<double>(L);
  for (auto& v : Y) v *= scale;
  out.samples = std::move(Y);
  return out;
}

Waveform add_awgn(const Waveform& wf, double snr_db, std::uint64_t seed) {
  if (wf.empty()) throw std::invalid_argument("add_awgn: empty input");
  if (std::isinf(snr_db) && snr_db > 0.0) return wf;

  const double power = mean_power(wf);
  const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
  Waveform out = wf;
  Rng rng(seed);
  for (auto& s : out.samples) s += sigma * rng.complex_normal();
  return out;
}

Waveform add_phase_noise(const Waveform& wf, double linewidth_hz,
                         std::uint64_t seed) {
  if (linewidth_hz < 0.0)
    throw std::invalid_argument("add_phase_noise: linewidth must be >= 0");
  if (linewidth_hz == 0.0 || wf.empty()) return wf;

  const double inc_std = std::sqrt(2.0 * kPi * linewidth_hz / wf.sample_rate);
  Waveform out = wf;
  Rng rng(seed);
  double phase = 0.0;
  for (auto& s : out.samples) {
    phase += inc_std * rng.normal();
    s *= cd(std::cos(phase), std::sin(phase));
  }
  return out;
}

Waveform add_freq_offset(const Waveform& wf, double offset_hz) {
  if (std::abs(offset_hz) >= wf.sample_rate / 2.0)
    throw std::invalid_argument("add_freq_offset: |offset| must be below fs/2");
  if (offset_hz == 0.0) return wf;

  Waveform out = wf;
  const double w = 2.0 * kPi * offset_hz / wf.sample_rate;
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    const double phi = w * static_cast<double>(n);
    out.samples[n] *= cd(std::cos(phi), std::sin(phi));
  }
  return out;
}

std::vector<cd> cyclic_shift(const std::vector<cd>& x, long shift) {
  const long n = static_cast<long>(x.size());
  if (n == 0) return x;
  std::vector<cd> out(x.size());
  long s = shift % n;
  if (s < 0) s += n;
  for (long i = 0; i < n; ++i) {
    long src = i - s;
    if (src < 0) src += n;
    out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace mdmsim::sigproc
