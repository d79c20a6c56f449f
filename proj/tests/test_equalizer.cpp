// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mdmsim/channel.hpp"
#include "mdmsim/errors.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/rxdsp.hpp"
#include "mdmsim/sigproc.hpp"

using namespace mdmsim;
using namespace mdmsim::rxdsp;

namespace {

std::vector<SymbolFrame> random_frames(int n, std::size_t len, std::uint64_t seed,
                                       const ModulationFormat& fmt = ModulationFormat::qpsk()) {
  std::vector<SymbolFrame> frames;
  for (int i = 0; i < n; ++i) {
    const auto bits =
        sigproc::generate_prbs(Rng::derive(seed, static_cast<std::uint64_t>(i)),
                               len * static_cast<std::size_t>(fmt.bits_per_symbol()));
    frames.push_back(sigproc::map_bits(bits, fmt, 30e9));
  }
  return frames;
}

/// Memoryless symbol-level channel: tribs = H * frames.
TributarySet mix_frames(const std::vector<SymbolFrame>& frames,
                        const Eigen::MatrixXcd& h) {
  TributarySet set;
  set.baud = frames.front().baud;
  const int n_out = static_cast<int>(h.rows());
  const int n_in = static_cast<int>(h.cols());
  const std::size_t len = frames.front().size();
  for (int i = 0; i < n_out; ++i) {
    std::vector<cd> trib(len, cd(0.0, 0.0));
    for (int j = 0; j < n_in; ++j) {
      for (std::size_t t = 0; t < len; ++t)
        trib[t] += h(i, j) * frames[static_cast<std::size_t>(j)].symbols[t];
    }
    set.tribs.push_back(std::move(trib));
    set.mapping.push_back({i / 2, i % 2, i});
  }
  return set;
}

double payload_mse(const SymbolFrame& out, const SymbolFrame& ref,
                   std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t n = from; n < to; ++n) acc += std::norm(out.symbols[n] - ref.symbols[n]);
  return acc / static_cast<double>(to - from);
}

/// Test-side least-squares fit of a memoryless channel matrix from equalized
/// outputs back to the tributaries.
Eigen::MatrixXcd ls_channel_from_outputs(const TributarySet& tribs,
                                         const std::vector<SymbolFrame>& outputs,
                                         std::size_t from, std::size_t to) {
  const int n_out = static_cast<int>(tribs.size());
  const int n_ref = static_cast<int>(outputs.size());
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n_ref, n_ref);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n_ref, n_out);
  for (std::size_t n = from; n < to; ++n) {
    for (int a = 0; a < n_ref; ++a) {
      for (int b = 0; b < n_ref; ++b)
        gram(a, b) += std::conj(outputs[static_cast<std::size_t>(a)].symbols[n]) *
                      outputs[static_cast<std::size_t>(b)].symbols[n];
      for (int j = 0; j < n_out; ++j)
        rhs(a, j) += std::conj(outputs[static_cast<std::size_t>(a)].symbols[n]) *
                     tribs.tribs[static_cast<std::size_t>(j)][n];
    }
  }
  const Eigen::MatrixXcd sol = gram.ldlt().solve(rhs);  // rows: ref, cols: trib
  return sol.transpose();                               // h_est(j, i)
}

/// Max per-entry deviation after removing one phase per column (output).
double channel_error_up_to_phase(const Eigen::MatrixXcd& est,
                                 const Eigen::MatrixXcd& truth) {
  double worst = 0.0;
  for (int i = 0; i < est.cols(); ++i) {
    cd align(0.0, 0.0);
    for (int j = 0; j < est.rows(); ++j) align += truth(j, i) * std::conj(est(j, i));
    const cd rot = std::abs(align) > 0.0 ? align / std::abs(align) : cd(1.0, 0.0);
    for (int j = 0; j < est.rows(); ++j)
      worst = std::max(worst, std::abs(est(j, i) * rot - truth(j, i)));
  }
  return worst;
}

}  // namespace

TEST_CASE("identity channel: single dominant tap, deep convergence") {
  const auto frames = random_frames(1, 8192, 17);
  TributarySet tribs;
  tribs.baud = 30e9;
  tribs.tribs.push_back(frames[0].symbols);
  tribs.mapping.push_back({0, 0, 0});

  EqualizerConfig cfg;
  cfg.num_taps = 32;
  cfg.step = 0.1;
  cfg.training_symbols = 4096;
  const auto res = fd_lms_equalize(tribs, frames, cfg);

  CHECK(res.state.converged);
  CHECK(res.state.mse_history.back() < 1e-4);

  const auto ir = extract_impulse_response(res.state);
  CHECK(ir.peak_lag == cfg.num_taps / 2);
  double off_peak_energy = 0.0, peak_energy = 0.0;
  for (int tau = 0; tau < cfg.num_taps; ++tau) {
    const double p = std::norm(ir.h[0][0][static_cast<std::size_t>(tau)]);
    if (tau == ir.peak_lag)
      peak_energy = p;
    else
      off_peak_energy += p;
  }
  CHECK(peak_energy > 1e3 * off_peak_energy);

  CHECK(payload_mse(res.outputs[0], frames[0], 4096, 8192) < 1e-4);
}

TEST_CASE("td reference: identity channel converges, huge step diverges") {
  const auto frames = random_frames(1, 4096, 3);
  TributarySet tribs;
  tribs.baud = 30e9;
  tribs.tribs.push_back(frames[0].symbols);
  tribs.mapping.push_back({0, 0, 0});

  std::vector<double> history;
  const auto out = td_lms_reference(tribs, frames, 32, 0.005, 2, &history);
  REQUIRE_FALSE(history.empty());
  CHECK(history.back() < 1e-4);
  CHECK(payload_mse(out[0], frames[0], 0, 4096) < 1e-4);

  TributarySet scaled = tribs;
  for (auto& s : scaled.tribs[0]) s *= 2.0;  // nonzero error drives the blow-up
  CHECK_THROWS_AS(td_lms_reference(scaled, frames, 32, 1.0), DivergenceError);
  CHECK_THROWS_AS(td_lms_reference(tribs, frames, 128, 0.005), std::invalid_argument);
}

TEST_CASE("oracle equivalence on a 2x2 unitary channel") {
  const std::size_t total = 8192, train = 4096;
  const auto frames = random_frames(2, total, 23);

  channel::JonesSpec spec;
  spec.seed = 99;
  spec.lone_slot_identity = false;
  const Eigen::Matrix2cd u = channel::jones_matrix(spec, 0, false);
  const auto tribs = mix_frames(frames, u);

  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  EqualizerConfig cfg;
  cfg.num_taps = 32;
  cfg.step = 0.1;
  cfg.passes = 3;
  const auto fd = fd_lms_equalize(tribs, training, cfg);
  CHECK(fd.state.mse_history.back() < 1e-3);

  std::vector<double> td_history;
  const auto td = td_lms_reference(tribs, training, 32, 0.005, 3, &td_history);
  CHECK(td_history.back() < 1e-3);

  // both recover the payload
  for (int i = 0; i < 2; ++i) {
    CHECK(payload_mse(fd.outputs[static_cast<std::size_t>(i)],
                      frames[static_cast<std::size_t>(i)], train, total) < 1e-3);
    CHECK(payload_mse(td[static_cast<std::size_t>(i)],
                      frames[static_cast<std::size_t>(i)], train, total) < 1e-3);
  }

  // and their implied least-squares channel estimates agree with the truth
  const auto h_fd = ls_channel_from_outputs(tribs, fd.outputs, train, total);
  const auto h_td = ls_channel_from_outputs(tribs, td, train, total);
  CHECK(channel_error_up_to_phase(h_fd, u) < 1e-2);
  CHECK(channel_error_up_to_phase(h_td, u) < 1e-2);

  // the two routes agree with each other sample by sample
  for (int i = 0; i < 2; ++i) {
    double diff = 0.0;
    for (std::size_t n = train; n < total; ++n)
      diff += std::norm(fd.outputs[static_cast<std::size_t>(i)].symbols[n] -
                        td[static_cast<std::size_t>(i)].symbols[n]);
    diff = std::sqrt(diff / static_cast<double>(total - train));
    CHECK(diff < 2e-3);
  }
}

TEST_CASE("mse non-increasing across passes on a stationary channel") {
  const std::size_t total = 8192, train = 4096;
  const auto frames = random_frames(3, total, 41);
  const auto profile = channel::default_crosstalk_profile(3);
  const auto tm = channel::synthesize_transfer_matrix(profile, 1550.0, 6);
  const auto tribs = mix_frames(frames, tm.field);

  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  EqualizerConfig cfg;
  cfg.num_taps = 64;
  cfg.step = 0.1;
  cfg.passes = 4;
  const auto res = fd_lms_equalize(tribs, training, cfg);

  const std::size_t per_pass = res.state.mse_history.size() / 4;
  double prev = 1e300;
  for (int p = 0; p < 4; ++p) {
    double mean = 0.0;
    for (std::size_t b = 0; b < per_pass; ++b)
      mean += res.state.mse_history[p * per_pass + b];
    mean /= static_cast<double>(per_pass);
    CHECK(mean <= prev * 1.01);
    prev = mean;
  }
}

TEST_CASE("input order does not change the equalized outputs") {
  const std::size_t total = 4096, train = 2048;
  const auto frames = random_frames(3, total, 55);
  const auto profile = channel::default_crosstalk_profile(3);
  const auto tm = channel::synthesize_transfer_matrix(profile, 1550.0, 8);
  auto tribs = mix_frames(frames, tm.field);

  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  EqualizerConfig cfg;
  cfg.num_taps = 32;
  cfg.step = 0.1;
  const auto a = fd_lms_equalize(tribs, training, cfg);

  TributarySet shuffled;
  shuffled.baud = tribs.baud;
  for (int j : {2, 0, 1}) {
    shuffled.tribs.push_back(tribs.tribs[static_cast<std::size_t>(j)]);
    shuffled.mapping.push_back(tribs.mapping[static_cast<std::size_t>(j)]);
  }
  const auto b = fd_lms_equalize(shuffled, training, cfg);

  for (int i = 0; i < 3; ++i) {
    double diff = 0.0;
    for (std::size_t n = 0; n < total; ++n)
      diff += std::norm(a.outputs[static_cast<std::size_t>(i)].symbols[n] -
                        b.outputs[static_cast<std::size_t>(i)].symbols[n]);
    CHECK(std::sqrt(diff / static_cast<double>(total)) < 1e-7);
  }
}

TEST_CASE("normalized step makes decisions invariant to input scaling") {
  const std::size_t total = 4096, train = 2048;
  const auto frames = random_frames(2, total, 77, ModulationFormat::qam16());
  channel::JonesSpec spec;
  spec.seed = 5;
  spec.lone_slot_identity = false;
  const auto tribs = mix_frames(frames, channel::jones_matrix(spec, 1, false));

  TributarySet scaled = tribs;
  for (auto& t : scaled.tribs)
    for (auto& s : t) s *= 123.4;

  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  EqualizerConfig cfg;
  cfg.num_taps = 32;
  cfg.step = 0.1;
  cfg.normalized = true;
  const auto a = fd_lms_equalize(tribs, training, cfg);
  const auto b = fd_lms_equalize(scaled, training, cfg);

  for (int i = 0; i < 2; ++i) {
    const auto bits_a = sigproc::hard_decide(a.outputs[static_cast<std::size_t>(i)]);
    const auto bits_b = sigproc::hard_decide(b.outputs[static_cast<std::size_t>(i)]);
    CHECK(bits_a == bits_b);
  }
}

TEST_CASE("diagonal-only equalization cannot untangle crosstalk") {
  const std::size_t total = 8192, train = 4096;
  const auto frames = random_frames(3, total, 91, ModulationFormat::qam16());
  const auto profile = channel::default_crosstalk_profile(3);
  auto tm = channel::synthesize_transfer_matrix(profile, 1530.0, 2);
  const auto tribs = mix_frames(frames, tm.field);

  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  EqualizerConfig cfg;
  cfg.num_taps = 32;
  cfg.step = 0.1;
  const auto mimo = fd_lms_equalize(tribs, training, cfg);

  cfg.diagonal_only = true;
  const auto single = fd_lms_equalize(tribs, training, cfg);

  double mimo_mse = 0.0, single_mse = 0.0;
  for (int i = 0; i < 3; ++i) {
    mimo_mse += payload_mse(mimo.outputs[static_cast<std::size_t>(i)],
                            frames[static_cast<std::size_t>(i)], train, total);
    single_mse += payload_mse(single.outputs[static_cast<std::size_t>(i)],
                              frames[static_cast<std::size_t>(i)], train, total);
  }
  CHECK(single_mse > 10.0 * mimo_mse);
}

TEST_CASE("equalizer rejects bad configurations") {
  const auto frames = random_frames(1, 1024, 1);
  TributarySet tribs;
  tribs.baud = 30e9;
  tribs.tribs.push_back(frames[0].symbols);
  tribs.mapping.push_back({0, 0, 0});

  EqualizerConfig cfg;
  cfg.num_taps = 33;  // odd
  CHECK_THROWS_AS(fd_lms_equalize(tribs, frames, cfg), std::invalid_argument);

  cfg.num_taps = 2048;  // fft longer than the record
  CHECK_THROWS_AS(fd_lms_equalize(tribs, frames, cfg), std::invalid_argument);

  TributarySet empty;
  CHECK_THROWS_AS(fd_lms_equalize(empty, frames, EqualizerConfig{}), std::invalid_argument);
}
