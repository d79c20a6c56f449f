// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/rxdsp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdmsim/errors.hpp"
#include "mdmsim/fft.hpp"
#include "mdmsim/sigproc.hpp"

namespace mdmsim::rxdsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

cd cyclic_at(const std::vector<cd>& x, long idx) {
  const long n = static_cast<long>(x.size());
  idx %= n;
  if (idx < 0) idx += n;
  return x[static_cast<std::size_t>(idx)];
}

/// Piecewise-coherent normalized correlation of `ref` against the record
/// window starting at `start`. Chunked magnitudes tolerate residual carrier
/// offset up to about fs / (2 * chunk).
double chunked_correlation(const std::vector<cd>& record, long start,
                           const std::vector<cd>& ref, std::size_t chunk) {
  double num = 0.0;
  double seg_energy = 0.0;
  double ref_energy = 0.0;
  std::size_t m = 0;
  while (m < ref.size()) {
    const std::size_t end = std::min(ref.size(), m + chunk);
    cd acc(0.0, 0.0);
    for (; m < end; ++m) {
      const cd s = cyclic_at(record, start + static_cast<long>(m));
      acc += s * std::conj(ref[m]);
      seg_energy += std::norm(s);
      ref_energy += std::norm(ref[m]);
    }
    num += std::abs(acc);
  }
  const double denom = std::sqrt(seg_energy * ref_energy);
  return denom > 0.0 ? num / denom : 0.0;
}

}  // namespace

TributarySet tdm_stitch(const channel::DualPol& record,
                        const channel::TdmPlan& plan,
                        const std::vector<SymbolFrame>& training,
                        const StitchOptions& opt) {
  if (record.x.empty() || record.y.size() != record.x.size())
    throw std::invalid_argument("tdm_stitch: record polarizations must match");
  if (training.empty()) throw std::invalid_argument("tdm_stitch: no training frames");
  const double fs = record.x.sample_rate;
  const double baud = training.front().baud;
  const long window = std::lround(plan.slot_duration_s * fs);
  if (window <= 0) throw std::invalid_argument("tdm_stitch: bad slot duration");
  if (record.x.size() < static_cast<std::size_t>(window))
    throw std::invalid_argument("tdm_stitch: record shorter than one slot");

  // Shaped training prefixes used as alignment references.
  std::vector<std::vector<cd>> refs(training.size());
  auto ref_for = [&](int mode) -> const std::vector<cd>& {
    auto& ref = refs[static_cast<std::size_t>(mode)];
    if (ref.empty()) {
      const Waveform shaped = sigproc::shape_pulses(
          training[static_cast<std::size_t>(mode)], opt.sps, opt.rolloff, opt.rrc_span);
      const std::size_t len = std::min(opt.corr_samples, shaped.size());
      ref.assign(shaped.samples.begin(), shaped.samples.begin() + static_cast<long>(len));
    }
    return ref;
  };

  TributarySet out;
  out.baud = baud;
  const std::vector<cd>* pols[2] = {&record.x.samples, &record.y.samples};

  for (std::size_t k = 0; k < plan.slots.size(); ++k) {
    const long nominal = std::lround(plan.slot_delays_s[k] * fs);
    const int modes[2] = {plan.slots[k].pol_x, plan.slots[k].pol_y};

    double best_peak = -1.0;
    long best_lag = 0;
    for (long lag = -opt.search_samples; lag <= opt.search_samples; ++lag) {
      double peak = 0.0;
      for (int p = 0; p < 2; ++p) {
        for (int c = 0; c < 2; ++c) {
          if (modes[c] < 0) continue;
          peak = std::max(peak, chunked_correlation(*pols[p], nominal + lag,
                                                    ref_for(modes[c]), opt.corr_chunk));
        }
      }
      if (peak > best_peak) {
        best_peak = peak;
        best_lag = lag;
      }
    }
    if (best_peak < opt.sync_threshold)
      throw SyncError("tdm_stitch: no correlation peak for slot " + std::to_string(k),
                      static_cast<int>(k), best_peak);
    out.slot_lags.push_back(best_lag);

    for (int p = 0; p < 2; ++p) {
      Waveform seg;
      seg.sample_rate = fs;
      seg.samples.resize(static_cast<std::size_t>(window));
      const long start = nominal + best_lag;
      for (long m = 0; m < window; ++m)
        seg.samples[static_cast<std::size_t>(m)] = cyclic_at(*pols[p], start + m);

      SymbolFrame symbols = sigproc::matched_filter_downsample(
          seg, baud, opt.rolloff, 0, opt.rrc_span,
          training.front().format);
      out.tribs.push_back(std::move(symbols.symbols));
      out.mapping.push_back({static_cast<int>(k), p, modes[p]});
    }
  }
  return out;
}

std::size_t frame_sync(const std::vector<cd>& tributary,
                       const SymbolFrame& training, double* peak) {
  if (training.size() < 256)
    throw std::invalid_argument("frame_sync: training must be >= 256 symbols");
  if (tributary.size() < training.size())
    throw std::invalid_argument("frame_sync: tributary shorter than training");

  const std::size_t n = tributary.size();
  // circular cross-correlation via FFT
  std::vector<cd> t(n, cd(0.0, 0.0));
  std::copy(training.symbols.begin(), training.symbols.end(), t.begin());
  std::vector<cd> tf = fft::forward(t);
  std::vector<cd> xf = fft::forward(tributary);
  for (std::size_t f = 0; f < n; ++f) xf[f] *= std::conj(tf[f]);
  fft::inverse_inplace(xf);

  // normalize by the sliding window energy of the tributary
  std::vector<double> prefix(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < 2 * n; ++i)
    prefix[i + 1] = prefix[i] + std::norm(tributary[i % n]);
  double ref_energy = 0.0;
  for (const cd s : training.symbols) ref_energy += std::norm(s);

  double best = -1.0, second = -1.0;
  std::size_t best_lag = 0, second_lag = 0;
  for (std::size_t lag = 0; lag < n; ++lag) {
    const double win = prefix[lag + training.size()] - prefix[lag];
    const double denom = std::sqrt(win * ref_energy);
    const double v = denom > 0.0 ? std::abs(xf[lag]) / denom : 0.0;
    if (v > best) {
      second = best;
      second_lag = best_lag;
      best = v;
      best_lag = lag;
    } else if (v > second) {
      second = v;
      second_lag = lag;
    }
  }
  const long dist = std::abs(static_cast<long>(best_lag) - static_cast<long>(second_lag));
  const long wrap_dist = static_cast<long>(n) - dist;
  if (second > 0.0 && std::min(dist, wrap_dist) > 1 &&
      20.0 * std::log10(best / second) < 1.0) {
    throw SyncAmbiguityError("frame_sync: two peaks within 1 dB");
  }
  if (peak) *peak = best;
  return best_lag;
}

double estimate_freq_offset(const std::vector<cd>& symbols,
                            const ModulationFormat& format, double baud) {
  if (symbols.size() < 4096)
    throw std::invalid_argument("estimate_freq_offset: need >= 4096 symbols");

  // 4th power collapses the QPSK phases; for 16QAM only the corner ring has
  // QPSK-like phases, so gate the rest out (keeping time positions).
  std::vector<cd> z(symbols.size(), cd(0.0, 0.0));
  const bool ring_assist = format.bits_per_symbol() > 2;
  const double ring = std::sqrt(18.0 / 10.0);  // corner ring of unit-power 16QAM
  std::size_t kept = 0;
  for (std::size_t n = 0; n < symbols.size(); ++n) {
    const cd s = symbols[n];
    if (ring_assist) {
      const double r = std::abs(s);
      if (std::abs(r - ring) > 0.1 * ring) continue;
    }
    const cd s2 = s * s;
    z[n] = s2 * s2;
    ++kept;
  }
  if (kept < 256)
    throw EstimateUnreliableError("estimate_freq_offset: too few usable symbols");

  std::size_t nfft = 1;
  while (nfft < 2 * z.size()) nfft <<= 1;
  z.resize(nfft, cd(0.0, 0.0));
  fft::forward_inplace(z);

  double peak = 0.0, acc = 0.0;
  std::size_t peak_bin = 0;
  for (std::size_t f = 0; f < nfft; ++f) {
    const double mag = std::abs(z[f]);
    acc += mag * mag;
    if (mag > peak) {
      peak = mag;
      peak_bin = f;
    }
  }
  const double rms = std::sqrt(acc / static_cast<double>(nfft));
  if (peak < 8.0 * rms)
    throw EstimateUnreliableError("estimate_freq_offset: peak below noise floor");

  double freq = static_cast<double>(peak_bin) / static_cast<double>(nfft);
  if (freq >= 0.5) freq -= 1.0;  // map to (-1/2, 1/2)
  return freq * baud / 4.0;
}

SymbolFrame phase_track(const SymbolFrame& symbols, const SymbolFrame& reference,
                        int block) {
  if (block < 16) throw std::invalid_argument("phase_track: block must be >= 16");
  if (reference.size() < symbols.size())
    throw std::invalid_argument("phase_track: reference shorter than symbols");

  SymbolFrame out = symbols;
  for (std::size_t b0 = 0; b0 < symbols.size(); b0 += static_cast<std::size_t>(block)) {
    const std::size_t b1 = std::min(symbols.size(), b0 + static_cast<std::size_t>(block));
    cd acc(0.0, 0.0);
    for (std::size_t n = b0; n < b1; ++n)
      acc += reference.symbols[n] * std::conj(symbols.symbols[n]);
    if (acc == cd(0.0, 0.0)) continue;
    const cd rot = acc / std::abs(acc);
    for (std::size_t n = b0; n < b1; ++n) out.symbols[n] *= rot;
  }
  return out;
}

SymbolFrame phase_track_decision_directed(const SymbolFrame& symbols, int block) {
  if (block < 16) throw std::invalid_argument("phase_track: block must be >= 16");
  if (!symbols.format)
    throw std::invalid_argument("phase_track: frame needs a format for decisions");

  SymbolFrame out = symbols;
  cd carry(1.0, 0.0);  // phase continuity across blocks
  for (std::size_t b0 = 0; b0 < symbols.size(); b0 += static_cast<std::size_t>(block)) {
    const std::size_t b1 = std::min(symbols.size(), b0 + static_cast<std::size_t>(block));
    cd acc(0.0, 0.0);
    for (std::size_t n = b0; n < b1; ++n) {
      const cd pre = symbols.symbols[n] * carry;
      const cd dec = symbols.format->map(symbols.format->decide(pre));
      acc += dec * std::conj(pre);
    }
    if (acc != cd(0.0, 0.0)) carry *= acc / std::abs(acc);
    for (std::size_t n = b0; n < b1; ++n) out.symbols[n] = symbols.symbols[n] * carry;
  }
  return out;
}

ImpulseResponse extract_impulse_response(const EqualizerState& state) {
  if (!state.converged)
    throw StaleStateError("extract_impulse_response: equalizer not converged");

  ImpulseResponse ir;
  ir.n_out = state.n_out;
  ir.n_in = state.n_in;
  ir.num_taps = state.num_taps;
  const std::size_t taps = static_cast<std::size_t>(state.num_taps);
  ir.h.assign(static_cast<std::size_t>(state.n_out),
              std::vector<std::vector<cd>>(static_cast<std::size_t>(state.n_in)));

  std::vector<double> profile(taps, 0.0);
  for (int i = 0; i < state.n_out; ++i) {
    for (int j = 0; j < state.n_in; ++j) {
      std::vector<cd> ht =
          fft::inverse(state.weights[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      ht.resize(taps);
      for (std::size_t tau = 0; tau < taps; ++tau) profile[tau] += std::norm(ht[tau]);
      ir.h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(ht);
    }
  }
  const double count = static_cast<double>(state.n_out) * state.n_in;
  double peak = 0.0;
  for (std::size_t tau = 0; tau < taps; ++tau) {
    profile[tau] /= count;
    if (profile[tau] > peak) {
      peak = profile[tau];
      ir.peak_lag = static_cast<int>(tau);
    }
  }
  if (peak <= 0.0)
    throw StaleStateError("extract_impulse_response: all-zero weights");
  ir.intensity_profile_db.resize(taps);
  for (std::size_t tau = 0; tau < taps; ++tau) {
    const double rel = profile[tau] / peak;
    ir.intensity_profile_db[tau] = rel > 0.0 ? 10.0 * std::log10(rel) : -300.0;
  }
  return ir;
}

cd ChannelEstimate::predict(const std::vector<SymbolFrame>& training,
                            std::size_t trib, long n) const {
  cd acc(0.0, 0.0);
  const auto& row = response.at(trib);
  const long t = static_cast<long>(training.front().size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    const auto& h = row[j];
    for (int tau = -lag_radius; tau <= lag_radius; ++tau) {
      const long idx = n - tau;
      if (idx < 0 || idx >= t) continue;
      acc += h[static_cast<std::size_t>(tau + lag_radius)] *
             training[j].symbols[static_cast<std::size_t>(idx)];
    }
  }
  return acc;
}

ChannelEstimate estimate_channel_response(const TributarySet& tribs,
                                          const std::vector<SymbolFrame>& training,
                                          int lag_radius) {
  if (training.empty() || tribs.tribs.empty())
    throw std::invalid_argument("estimate_channel_response: empty inputs");
  const int n_modes = static_cast<int>(training.size());
  const long t_train = static_cast<long>(training.front().size());
  const int l = lag_radius;
  const int lags = 2 * l + 1;
  const int dim = n_modes * lags;
  if (t_train < 8L * lags)
    throw std::invalid_argument("estimate_channel_response: training too short");

  // Exact least squares over n in [l, t_train - l): Gram matrix entries are
  // windowed cross-correlations; a safe inner window plus per-entry edge
  // corrections keeps the cost at O(N^2 L T).
  const long inner_lo = 2L * l;
  const long inner_hi = t_train - 2L * l;
  Eigen::MatrixXcd gram(dim, dim);
  std::vector<std::vector<std::vector<cd>>> base(
      static_cast<std::size_t>(n_modes),
      std::vector<std::vector<cd>>(static_cast<std::size_t>(n_modes),
                                   std::vector<cd>(static_cast<std::size_t>(4 * l + 1))));
  for (int j = 0; j < n_modes; ++j) {
    const auto& sj = training[static_cast<std::size_t>(j)].symbols;
    for (int jp = 0; jp < n_modes; ++jp) {
      const auto& sp = training[static_cast<std::size_t>(jp)].symbols;
      for (int d = -2 * l; d <= 2 * l; ++d) {
        cd acc(0.0, 0.0);
        for (long m = inner_lo; m < inner_hi; ++m) {
          const long mp = m + d;
          if (mp >= 0 && mp < t_train) acc += std::conj(sj[static_cast<std::size_t>(m)]) * sp[static_cast<std::size_t>(mp)];
        }
        base[static_cast<std::size_t>(j)][static_cast<std::size_t>(jp)][static_cast<std::size_t>(d + 2 * l)] = acc;
      }
    }
  }
  auto basis_index = [&](int mode, int tau) { return mode * lags + (tau + l); };
  for (int j = 0; j < n_modes; ++j) {
    const auto& sj = training[static_cast<std::size_t>(j)].symbols;
    for (int tau = -l; tau <= l; ++tau) {
      for (int jp = 0; jp < n_modes; ++jp) {
        const auto& sp = training[static_cast<std::size_t>(jp)].symbols;
        for (int taup = -l; taup <= l; ++taup) {
          // sum over n in [l, t_train - l) of conj(sj[n - tau]) sp[n - taup]
          // = sum over m in [l - tau, t_train - l - tau) at lag d = tau - taup
          const int d = tau - taup;
          cd acc = base[static_cast<std::size_t>(j)][static_cast<std::size_t>(jp)][static_cast<std::size_t>(d + 2 * l)];
          const long lo = l - tau, hi = t_train - l - tau;
          for (long m = lo; m < inner_lo; ++m) {
            const long mp = m + d;
            if (mp >= 0 && mp < t_train) acc += std::conj(sj[static_cast<std::size_t>(m)]) * sp[static_cast<std::size_t>(mp)];
          }
          for (long m = inner_hi; m < hi; ++m) {
            const long mp = m + d;
            if (mp >= 0 && mp < t_train) acc += std::conj(sj[static_cast<std::size_t>(m)]) * sp[static_cast<std::size_t>(mp)];
          }
          gram(basis_index(j, tau), basis_index(jp, taup)) = acc;
        }
      }
    }
  }

  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw EstimateUnreliableError("estimate_channel_response: Gram factorization failed");
  const auto dvec = ldlt.vectorD();
  const double dmax = dvec.real().maxCoeff();
  const double dmin = dvec.real().minCoeff();
  if (dmin <= 0.0 || dmin < 1e-10 * dmax)
    throw EstimateUnreliableError("estimate_channel_response: rank-deficient training");

  ChannelEstimate est;
  est.lag_radius = l;
  est.response.resize(tribs.size());
  for (std::size_t t = 0; t < tribs.size(); ++t) {
    const auto& r = tribs.tribs[t];
    if (static_cast<long>(r.size()) < t_train)
      throw std::invalid_argument("estimate_channel_response: tributary shorter than training");

    Eigen::VectorXcd rhs(dim);
    for (int j = 0; j < n_modes; ++j) {
      const auto& sj = training[static_cast<std::size_t>(j)].symbols;
      for (int tau = -l; tau <= l; ++tau) {
        cd acc(0.0, 0.0);
        for (long n = l; n < t_train - l; ++n)
          acc += std::conj(sj[static_cast<std::size_t>(n - tau)]) * r[static_cast<std::size_t>(n)];
        rhs(basis_index(j, tau)) = acc;
      }
    }
    const Eigen::VectorXcd theta = ldlt.solve(rhs);
    est.response[t].resize(static_cast<std::size_t>(n_modes));
    for (int j = 0; j < n_modes; ++j) {
      auto& h = est.response[t][static_cast<std::size_t>(j)];
      h.resize(static_cast<std::size_t>(lags));
      for (int tau = -l; tau <= l; ++tau)
        h[static_cast<std::size_t>(tau + l)] = theta(basis_index(j, tau));
    }
  }
  return est;
}

Eigen::MatrixXd estimate_intensity_transfer_matrix(
    const EqualizerState& state, const TributarySet& tribs,
    const std::vector<SymbolFrame>& training, int lag_radius) {
  if (!state.converged)
    throw StaleStateError("estimate_intensity_transfer_matrix: equalizer not converged");
  const auto est = estimate_channel_response(tribs, training, lag_radius);
  const int n_modes = static_cast<int>(training.size());

  // rows ordered by the tributaries' nominal modes
  Eigen::MatrixXd energy(n_modes, n_modes);
  for (int m = 0; m < n_modes; ++m) {
    int trib_idx = -1;
    for (std::size_t j = 0; j < tribs.mapping.size(); ++j) {
      if (tribs.mapping[j].mode == m) trib_idx = static_cast<int>(j);
    }
    if (trib_idx < 0)
      throw std::invalid_argument("estimate_intensity_transfer_matrix: no tributary for " +
                                  mode_label(m));
    for (int j = 0; j < n_modes; ++j) {
      double e = 0.0;
      for (const cd h : est.response[static_cast<std::size_t>(trib_idx)][static_cast<std::size_t>(j)])
        e += std::norm(h);
      energy(m, j) = e;
    }
  }

  const double emax = energy.maxCoeff();
  if (emax <= 0.0)
    throw EstimateUnreliableError("estimate_intensity_transfer_matrix: zero estimate");
  Eigen::MatrixXd db(n_modes, n_modes);
  for (int r = 0; r < n_modes; ++r)
    for (int c = 0; c < n_modes; ++c)
      db(r, c) = energy(r, c) > 0.0 ? 10.0 * std::log10(energy(r, c) / emax) : -300.0;
  return db;
}

}  // namespace mdmsim::rxdsp
