// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdmsim/errors.hpp"
#include "mdmsim/fft.hpp"
#include "mdmsim/rxdsp.hpp"

namespace mdmsim::rxdsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

void fill_cyclic(const std::vector<cd>& x, long start, std::vector<cd>& buf) {
  const long t = static_cast<long>(x.size());
  for (std::size_t m = 0; m < buf.size(); ++m) {
    long idx = (start + static_cast<long>(m)) % t;
    if (idx < 0) idx += t;
    buf[m] = x[static_cast<std::size_t>(idx)];
  }
}

/// Input tributary that nominally carries output mode `mode`; falls back to
/// positional pairing when the mapping has no entry for it.
int diag_input(const TributarySet& tribs, int mode, bool required) {
  for (std::size_t j = 0; j < tribs.mapping.size(); ++j) {
    if (tribs.mapping[j].mode == mode) return static_cast<int>(j);
  }
  if (required)
    throw std::invalid_argument(
        "equalizer: diagonal-only mode needs a tributary mapped to " +
        mode_label(mode));
  return mode < static_cast<int>(tribs.size()) ? mode : -1;
}

void check_inputs(const TributarySet& tribs,
                  const std::vector<SymbolFrame>& training) {
  if (tribs.tribs.empty()) throw std::invalid_argument("equalizer: no tributaries");
  if (training.empty()) throw std::invalid_argument("equalizer: no training frames");
  const std::size_t t = tribs.tribs.front().size();
  for (const auto& u : tribs.tribs) {
    if (u.size() != t)
      throw std::invalid_argument("equalizer: tributaries must share length");
  }
  const std::size_t tt = training.front().size();
  for (const auto& d : training) {
    if (d.size() != tt)
      throw std::invalid_argument("equalizer: training frames must share length");
  }
}

// Converged when the final quarter of the adaptation still reaches within 2x
// of the best block MSE seen, i.e. the filter has not regressed. The
// absolute floor covers channels equalized exactly from the start.
bool converged_from_history(const std::vector<double>& mse) {
  if (mse.empty()) return false;
  const std::size_t quarter = std::max<std::size_t>(1, mse.size() / 4);
  const double tail_best =
      *std::min_element(mse.end() - static_cast<long>(quarter), mse.end());
  const double best = *std::min_element(mse.begin(), mse.end());
  return tail_best < 2.0 * best + 1e-15;
}

}  // namespace

TributarySet TributarySet::without_empty() const {
  TributarySet out;
  out.baud = baud;
  for (std::size_t j = 0; j < tribs.size(); ++j) {
    if (j < mapping.size() && mapping[j].mode < 0) continue;
    out.tribs.push_back(tribs[j]);
    if (j < mapping.size()) out.mapping.push_back(mapping[j]);
  }
  return out;
}

EqualizeResult fd_lms_equalize(const TributarySet& tribs,
                               const std::vector<SymbolFrame>& training,
                               const EqualizerConfig& cfg) {
  check_inputs(tribs, training);
  const int num_taps = cfg.num_taps;
  if (num_taps < 2 || num_taps % 2 != 0)
    throw std::invalid_argument("equalizer: num_taps must be even and >= 2");
  const int fft_size = cfg.fft_size();
  const int delay = num_taps / 2;  // reference delay, centers the response

  const int n_in = static_cast<int>(tribs.size());
  const int n_out = static_cast<int>(training.size());
  const std::size_t total = tribs.tribs.front().size();
  if (total < static_cast<std::size_t>(fft_size))
    throw std::invalid_argument("equalizer: tributaries shorter than fft_size");

  std::size_t train_len = training.front().size();
  if (cfg.training_symbols > 0) train_len = std::min(train_len, cfg.training_symbols);
  if (train_len < static_cast<std::size_t>(num_taps))
    throw std::invalid_argument("equalizer: training shorter than num_taps");
  if (train_len > total)
    throw std::invalid_argument("equalizer: training longer than tributaries");

  EqualizerState state;
  state.n_out = n_out;
  state.n_in = n_in;
  state.num_taps = num_taps;
  state.input_modes.resize(static_cast<std::size_t>(n_in), -1);
  for (std::size_t j = 0; j < tribs.mapping.size() && j < static_cast<std::size_t>(n_in); ++j)
    state.input_modes[j] = tribs.mapping[j].mode;

  std::vector<int> diag(static_cast<std::size_t>(n_out));
  for (int i = 0; i < n_out; ++i)
    diag[static_cast<std::size_t>(i)] = diag_input(tribs, i, cfg.diagonal_only);

  // Initial weights: spike at the reference delay on the diagonal pair,
  // scaled by the inverse RMS of that tributary so convergence (and hence
  // decisions) does not depend on the absolute input level.
  state.weights.assign(
      static_cast<std::size_t>(n_out),
      std::vector<std::vector<cd>>(static_cast<std::size_t>(n_in),
                                   std::vector<cd>(static_cast<std::size_t>(fft_size),
                                                   cd(0.0, 0.0))));
  for (int i = 0; i < n_out; ++i) {
    const int dj = diag[static_cast<std::size_t>(i)];
    if (dj < 0) continue;
    const double rms =
        std::sqrt(mean_power(tribs.tribs[static_cast<std::size_t>(dj)]));
    const double gain = rms > 0.0 ? 1.0 / rms : 1.0;
    auto& w = state.weights[static_cast<std::size_t>(i)][static_cast<std::size_t>(dj)];
    for (int f = 0; f < fft_size; ++f) {
      const double phi = -2.0 * kPi * static_cast<double>(f) * delay / fft_size;
      w[static_cast<std::size_t>(f)] = gain * cd(std::cos(phi), std::sin(phi));
    }
  }

  const std::size_t blocks_train = train_len / static_cast<std::size_t>(num_taps);
  if (blocks_train < 2)
    throw std::invalid_argument("equalizer: need at least two training blocks");

  // Input spectra of the training blocks repeat across passes; compute once.
  const std::size_t first_block = 1;  // block 0's desired indices would precede t=0
  std::vector<std::vector<std::vector<cd>>> xcache(
      blocks_train, std::vector<std::vector<cd>>(static_cast<std::size_t>(n_in)));
  {
    std::vector<cd> buf(static_cast<std::size_t>(fft_size));
    for (std::size_t b = first_block; b < blocks_train; ++b) {
      const long start = static_cast<long>(b) * num_taps - num_taps;
      for (int j = 0; j < n_in; ++j) {
        fill_cyclic(tribs.tribs[static_cast<std::size_t>(j)], start, buf);
        xcache[b][static_cast<std::size_t>(j)] = fft::forward(buf);
      }
    }
  }

  std::vector<cd> yspec(static_cast<std::size_t>(fft_size));
  std::vector<cd> ytime(static_cast<std::size_t>(fft_size));
  std::vector<cd> espec(static_cast<std::size_t>(fft_size));
  std::vector<cd> grad(static_cast<std::size_t>(fft_size));
  std::vector<cd> gtime(static_cast<std::size_t>(fft_size));

  // Normalization power: exponentially smoothed per-bin branch powers,
  // summed over the branches feeding an output. Summing keeps the aggregate
  // update gain below one for any input count (multichannel NLMS); smoothing
  // tames the heavy-tailed 1/|X|^2 steps of single-block estimates.
  constexpr double kPowerForget = 0.7;
  std::vector<std::vector<double>> branch_power(
      static_cast<std::size_t>(n_in),
      std::vector<double>(static_cast<std::size_t>(fft_size), 0.0));
  bool power_primed = false;
  std::vector<double> xpower(static_cast<std::size_t>(fft_size));
  auto update_power = [&](const std::vector<std::vector<cd>>& xf) {
    for (int j = 0; j < n_in; ++j) {
      const auto& x = xf[static_cast<std::size_t>(j)];
      auto& p = branch_power[static_cast<std::size_t>(j)];
      for (int f = 0; f < fft_size; ++f) {
        const double inst = std::norm(x[static_cast<std::size_t>(f)]);
        p[static_cast<std::size_t>(f)] =
            power_primed ? kPowerForget * p[static_cast<std::size_t>(f)] +
                               (1.0 - kPowerForget) * inst
                         : inst;
      }
    }
    power_primed = true;
    if (!cfg.diagonal_only) {
      std::fill(xpower.begin(), xpower.end(), 0.0);
      for (int j = 0; j < n_in; ++j) {
        const auto& p = branch_power[static_cast<std::size_t>(j)];
        for (int f = 0; f < fft_size; ++f)
          xpower[static_cast<std::size_t>(f)] += p[static_cast<std::size_t>(f)];
      }
    }
  };

  auto adapt_block = [&](const std::vector<std::vector<cd>>& xf,
                         const std::vector<const cd*>& desired) -> double {
    double block_err = 0.0;
    if (cfg.normalized) update_power(xf);
    for (int i = 0; i < n_out; ++i) {
      auto& wrow = state.weights[static_cast<std::size_t>(i)];
      std::fill(yspec.begin(), yspec.end(), cd(0.0, 0.0));
      if (cfg.diagonal_only) {
        const int j = diag[static_cast<std::size_t>(i)];
        const auto& x = xf[static_cast<std::size_t>(j)];
        const auto& w = wrow[static_cast<std::size_t>(j)];
        for (int f = 0; f < fft_size; ++f)
          yspec[static_cast<std::size_t>(f)] = w[static_cast<std::size_t>(f)] * x[static_cast<std::size_t>(f)];
      } else {
        for (int j = 0; j < n_in; ++j) {
          const auto& x = xf[static_cast<std::size_t>(j)];
          const auto& w = wrow[static_cast<std::size_t>(j)];
          for (int f = 0; f < fft_size; ++f)
            yspec[static_cast<std::size_t>(f)] += w[static_cast<std::size_t>(f)] * x[static_cast<std::size_t>(f)];
        }
      }
      fft::transform(yspec.data(), ytime.data(), static_cast<std::size_t>(fft_size), true);

      // error over the valid (second) half of the block
      std::fill(espec.begin(), espec.begin() + num_taps, cd(0.0, 0.0));
      const cd* d = desired[static_cast<std::size_t>(i)];
      for (int m = 0; m < num_taps; ++m) {
        const cd e = d[m] - ytime[static_cast<std::size_t>(num_taps + m)];
        espec[static_cast<std::size_t>(num_taps + m)] = e;
        block_err += std::norm(e);
      }
      fft::forward_inplace(espec);

      for (int j = 0; j < n_in; ++j) {
        if (cfg.diagonal_only && j != diag[static_cast<std::size_t>(i)]) continue;
        const auto& x = xf[static_cast<std::size_t>(j)];
        const auto& pj =
            branch_power[static_cast<std::size_t>(cfg.diagonal_only ? j : 0)];
        for (int f = 0; f < fft_size; ++f) {
          const cd xc = x[static_cast<std::size_t>(f)];
          double mu = cfg.step;
          if (cfg.normalized) {
            const double p = cfg.diagonal_only ? pj[static_cast<std::size_t>(f)]
                                               : xpower[static_cast<std::size_t>(f)];
            mu /= p + cfg.epsilon;
          }
          grad[static_cast<std::size_t>(f)] =
              mu * std::conj(xc) * espec[static_cast<std::size_t>(f)];
        }
        // gradient constraint: keep only the first num_taps time-domain taps
        fft::transform(grad.data(), gtime.data(), static_cast<std::size_t>(fft_size), true);
        std::fill(gtime.begin() + num_taps, gtime.end(), cd(0.0, 0.0));
        fft::forward_inplace(gtime);
        auto& w = wrow[static_cast<std::size_t>(j)];
        for (int f = 0; f < fft_size; ++f)
          w[static_cast<std::size_t>(f)] += gtime[static_cast<std::size_t>(f)];
      }
    }
    return block_err / (static_cast<double>(num_taps) * n_out);
  };

  std::vector<const cd*> desired(static_cast<std::size_t>(n_out));
  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (std::size_t b = first_block; b < blocks_train; ++b) {
      const long n0 = static_cast<long>(b) * num_taps;
      for (int i = 0; i < n_out; ++i)
        desired[static_cast<std::size_t>(i)] =
            training[static_cast<std::size_t>(i)].symbols.data() + (n0 - delay);
      const double mse = adapt_block(xcache[b], desired);
      state.mse_history.push_back(mse);
      const double initial = state.mse_history.front();
      if (!std::isfinite(mse) || mse > 10.0 * std::max(initial, 1e-12))
        throw DivergenceError("fd_lms_equalize: MSE diverged", state.mse_history);
    }
  }
  state.converged = converged_from_history(state.mse_history);

  // Output pass over the whole record with frozen (or decision-directed)
  // weights. Records are circular so every symbol gets equalized.
  EqualizeResult result;
  result.outputs.resize(static_cast<std::size_t>(n_out));
  std::vector<std::vector<cd>> yfull(
      static_cast<std::size_t>(n_out),
      std::vector<cd>(total, cd(0.0, 0.0)));

  const std::size_t blocks_total =
      (total + static_cast<std::size_t>(num_taps) - 1) / static_cast<std::size_t>(num_taps);
  std::vector<std::vector<cd>> xf(static_cast<std::size_t>(n_in),
                                  std::vector<cd>(static_cast<std::size_t>(fft_size)));
  std::vector<cd> buf(static_cast<std::size_t>(fft_size));
  std::vector<cd> dd_desired(static_cast<std::size_t>(num_taps));

  for (std::size_t b = 0; b < blocks_total; ++b) {
    const long start = static_cast<long>(b) * num_taps - num_taps;
    for (int j = 0; j < n_in; ++j) {
      fill_cyclic(tribs.tribs[static_cast<std::size_t>(j)], start, buf);
      fft::transform(buf.data(), xf[static_cast<std::size_t>(j)].data(),
                     static_cast<std::size_t>(fft_size), false);
    }
    for (int i = 0; i < n_out; ++i) {
      auto& wrow = state.weights[static_cast<std::size_t>(i)];
      std::fill(yspec.begin(), yspec.end(), cd(0.0, 0.0));
      for (int j = 0; j < n_in; ++j) {
        if (cfg.diagonal_only && j != diag[static_cast<std::size_t>(i)]) continue;
        const auto& x = xf[static_cast<std::size_t>(j)];
        const auto& w = wrow[static_cast<std::size_t>(j)];
        for (int f = 0; f < fft_size; ++f)
          yspec[static_cast<std::size_t>(f)] += w[static_cast<std::size_t>(f)] * x[static_cast<std::size_t>(f)];
      }
      fft::transform(yspec.data(), ytime.data(), static_cast<std::size_t>(fft_size), true);
      for (int m = 0; m < num_taps; ++m) {
        const std::size_t n = b * static_cast<std::size_t>(num_taps) + static_cast<std::size_t>(m);
        if (n < total) yfull[static_cast<std::size_t>(i)][n] = ytime[static_cast<std::size_t>(num_taps + m)];
      }
    }
    if (cfg.decision_directed &&
        b * static_cast<std::size_t>(num_taps) >= train_len) {
      // one more adaptation step driven by decisions
      double mse = 0.0;
      std::vector<const cd*> dptr(static_cast<std::size_t>(n_out));
      std::vector<std::vector<cd>> dec(static_cast<std::size_t>(n_out),
                                       std::vector<cd>(static_cast<std::size_t>(num_taps)));
      for (int i = 0; i < n_out; ++i) {
        const ModulationFormat* fmt = training[static_cast<std::size_t>(i)].format;
        if (!fmt) continue;
        for (int m = 0; m < num_taps; ++m) {
          const std::size_t n = b * static_cast<std::size_t>(num_taps) + static_cast<std::size_t>(m);
          const cd y = n < total ? yfull[static_cast<std::size_t>(i)][n] : cd(0.0, 0.0);
          dec[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)] = fmt->map(fmt->decide(y));
        }
        dptr[static_cast<std::size_t>(i)] = dec[static_cast<std::size_t>(i)].data();
      }
      mse = adapt_block(xf, dptr);
      state.mse_history.push_back(mse);
      if (!std::isfinite(mse))
        throw DivergenceError("fd_lms_equalize: decision-directed MSE diverged",
                              state.mse_history);
    }
  }

  for (int i = 0; i < n_out; ++i) {
    auto& frame = result.outputs[static_cast<std::size_t>(i)];
    frame.format = training[static_cast<std::size_t>(i)].format;
    frame.baud = tribs.baud > 0.0 ? tribs.baud : training[static_cast<std::size_t>(i)].baud;
    frame.symbols.resize(total);
    const auto& y = yfull[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < total; ++m)
      frame.symbols[m] = y[(m + static_cast<std::size_t>(delay)) % total];
  }
  result.state = std::move(state);
  return result;
}

std::vector<SymbolFrame> td_lms_reference(const TributarySet& tribs,
                                          const std::vector<SymbolFrame>& training,
                                          int taps, double step, int passes,
                                          std::vector<double>* mse_history) {
  check_inputs(tribs, training);
  if (static_cast<int>(tribs.size()) > 4 || taps > 64)
    throw std::invalid_argument("td_lms_reference: small instances only (N <= 4, taps <= 64)");
  if (taps < 2 || taps % 2 != 0)
    throw std::invalid_argument("td_lms_reference: taps must be even and >= 2");

  const int n_in = static_cast<int>(tribs.size());
  const int n_out = static_cast<int>(training.size());
  const long total = static_cast<long>(tribs.tribs.front().size());
  const long train_len = static_cast<long>(training.front().size());
  const int delay = taps / 2;

  std::vector<std::vector<std::vector<cd>>> w(
      static_cast<std::size_t>(n_out),
      std::vector<std::vector<cd>>(static_cast<std::size_t>(n_in),
                                   std::vector<cd>(static_cast<std::size_t>(taps),
                                                   cd(0.0, 0.0))));
  for (int i = 0; i < n_out; ++i) {
    const int dj = diag_input(tribs, i, false);
    if (dj < 0) continue;
    const double rms = std::sqrt(mean_power(tribs.tribs[static_cast<std::size_t>(dj)]));
    w[static_cast<std::size_t>(i)][static_cast<std::size_t>(dj)][static_cast<std::size_t>(delay)] =
        cd(rms > 0.0 ? 1.0 / rms : 1.0, 0.0);
  }

  auto sample = [&](int j, long n) -> cd {
    long idx = n % total;
    if (idx < 0) idx += total;
    return tribs.tribs[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx)];
  };
  auto output_at = [&](int i, long n) -> cd {
    cd y(0.0, 0.0);
    for (int j = 0; j < n_in; ++j) {
      const auto& wj = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (int tau = 0; tau < taps; ++tau) y += wj[static_cast<std::size_t>(tau)] * sample(j, n - tau);
    }
    return y;
  };

  std::vector<double> history;
  double block_err = 0.0;
  long block_count = 0;
  constexpr long kMseBlock = 256;

  for (int pass = 0; pass < passes; ++pass) {
    for (long n = delay; n < train_len; ++n) {
      for (int i = 0; i < n_out; ++i) {
        const cd y = output_at(i, n);
        const cd e = training[static_cast<std::size_t>(i)].symbols[static_cast<std::size_t>(n - delay)] - y;
        block_err += std::norm(e);
        const cd me = step * e;
        for (int j = 0; j < n_in; ++j) {
          auto& wj = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          for (int tau = 0; tau < taps; ++tau)
            wj[static_cast<std::size_t>(tau)] += me * std::conj(sample(j, n - tau));
        }
      }
      if (++block_count == kMseBlock) {
        const double mse = block_err / (static_cast<double>(kMseBlock) * n_out);
        history.push_back(mse);
        block_err = 0.0;
        block_count = 0;
        const double initial = history.front();
        if (!std::isfinite(mse) || mse > 10.0 * std::max(initial, 1e-12))
          throw DivergenceError("td_lms_reference: MSE diverged", history);
      }
    }
  }
  if (mse_history) *mse_history = history;

  std::vector<SymbolFrame> out(static_cast<std::size_t>(n_out));
  for (int i = 0; i < n_out; ++i) {
    auto& frame = out[static_cast<std::size_t>(i)];
    frame.format = training[static_cast<std::size_t>(i)].format;
    frame.baud = tribs.baud > 0.0 ? tribs.baud : training[static_cast<std::size_t>(i)].baud;
    frame.symbols.resize(static_cast<std::size_t>(total));
    for (long m = 0; m < total; ++m)
      frame.symbols[static_cast<std::size_t>(m)] = output_at(i, m + delay);
  }
  return out;
}

}  // namespace mdmsim::rxdsp
