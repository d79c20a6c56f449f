// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "mdmsim/channel.hpp"
#include "mdmsim/fft.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/rxdsp.hpp"
#include "mdmsim/sigproc.hpp"

using namespace mdmsim;

namespace {

SymbolFrame random_frame(std::size_t n, std::uint64_t seed) {
  const auto bits = sigproc::generate_prbs(seed, 2 * n);
  return sigproc::map_bits(bits, ModulationFormat::qpsk(), 30e9);
}

}  // namespace

static void BM_Fft(benchmark::State& state) {
  std::vector<cd> x(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  for (auto& s : x) s = rng.complex_normal();
  std::vector<cd> y(x.size());
  for (auto _ : state) {
    fft::transform(x.data(), y.data(), x.size(), false);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fft)->Arg(1024)->Arg(4096)->Arg(65536);

static void BM_RrcShaping(benchmark::State& state) {
  const auto frame = random_frame(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    auto wf = sigproc::shape_pulses(frame, 2, 0.01);
    benchmark::DoNotOptimize(wf.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RrcShaping)->Arg(16384)->Arg(65536);

static void BM_MatchedFilter(benchmark::State& state) {
  const auto frame = random_frame(static_cast<std::size_t>(state.range(0)), 3);
  const auto wf = sigproc::shape_pulses(frame, 2, 0.01);
  for (auto _ : state) {
    auto rec = sigproc::matched_filter_downsample(wf, 30e9, 0.01);
    benchmark::DoNotOptimize(rec.symbols.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MatchedFilter)->Arg(16384);

static void BM_ModeCoupling(benchmark::State& state) {
  const int n = 11;
  const std::size_t len = static_cast<std::size_t>(state.range(0));
  std::vector<Waveform> wfs(n);
  Rng rng(4);
  for (auto& wf : wfs) {
    wf.sample_rate = 60e9;
    wf.samples.resize(len);
    for (auto& s : wf.samples) s = rng.complex_normal();
  }
  const auto tm = channel::synthesize_transfer_matrix(
      channel::default_crosstalk_profile(n), 1550.0, 7);
  const auto mdl = channel::default_mdl_vector(n, 7.0);
  for (auto _ : state) {
    auto out = channel::apply_mode_coupling(wfs, tm, mdl);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * len * n * n);
}
BENCHMARK(BM_ModeCoupling)->Arg(16384)->Arg(65536);

static void BM_FdLmsEqualize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::size_t total = 8192, train = 4096;
  std::vector<SymbolFrame> frames;
  for (int i = 0; i < n; ++i)
    frames.push_back(random_frame(total, 100 + static_cast<std::uint64_t>(i)));
  const auto tm = channel::synthesize_transfer_matrix(
      channel::default_crosstalk_profile(n), 1550.0, 9);

  rxdsp::TributarySet tribs;
  tribs.baud = 30e9;
  for (int i = 0; i < n; ++i) {
    std::vector<cd> trib(total, cd(0.0, 0.0));
    for (int j = 0; j < n; ++j)
      for (std::size_t t = 0; t < total; ++t)
        trib[t] += tm.field(i, j) * frames[static_cast<std::size_t>(j)].symbols[t];
    tribs.tribs.push_back(std::move(trib));
    tribs.mapping.push_back({i / 2, i % 2, i});
  }
  std::vector<SymbolFrame> training(frames);
  for (auto& f : training) f.symbols.resize(train);

  rxdsp::EqualizerConfig cfg;
  cfg.num_taps = 256;
  cfg.step = 0.5;
  cfg.passes = 2;
  for (auto _ : state) {
    auto res = rxdsp::fd_lms_equalize(tribs, training, cfg);
    benchmark::DoNotOptimize(res.outputs.data());
  }
  state.SetItemsProcessed(state.iterations() * total * n);
}
BENCHMARK(BM_FdLmsEqualize)->Arg(4)->Arg(11)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
