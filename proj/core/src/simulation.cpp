// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "mdmsim/channel.hpp"
#include "mdmsim/errors.hpp"
#include "mdmsim/metrics.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/rxdsp.hpp"
#include "mdmsim/sigproc.hpp"

namespace mdmsim::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// seed stream bases; every stochastic stage owns a distinct derivation
constexpr std::uint64_t kStreamBits = 1000;
constexpr std::uint64_t kStreamShared = 500;
constexpr std::uint64_t kStreamNoise = 2000;
constexpr std::uint64_t kStreamPhase = 3000;
constexpr std::uint64_t kStreamJitter = 4000;

std::uint64_t wavelength_key(double wavelength_nm) {
  return static_cast<std::uint64_t>(std::llround(wavelength_nm * 1000.0));
}

struct TxData {
  std::vector<BitSequence> bits;
  std::vector<SymbolFrame> frames;
  std::vector<SymbolFrame> training;
};

TxData make_tx_data(const io::ExperimentConfig& cfg) {
  const auto& fmt = ModulationFormat::from_name(cfg.format);
  const std::size_t bps = static_cast<std::size_t>(fmt.bits_per_symbol());
  const std::size_t slot_symbols = cfg.slot_symbols();
  const auto prbs_mode = cfg.prbs == "prbs17" ? sigproc::PrbsMode::lfsr_prbs17
                                              : sigproc::PrbsMode::seeded_uniform;

  TxData tx;
  if (cfg.shared_pattern_emulation) {
    // one modulated pattern, delay-shifted per mode as in the testbed
    const auto base = sigproc::generate_prbs(Rng::derive(cfg.seed, kStreamShared),
                                             slot_symbols * bps, prbs_mode);
    const long shift_symbols =
        std::lround(cfg.decorrelation_delay_s * cfg.baud_hz);
    for (int m = 0; m < cfg.modes; ++m) {
      const std::size_t sym_shift =
          (static_cast<std::size_t>(shift_symbols) * static_cast<std::size_t>(m)) %
          slot_symbols;
      BitSequence bits(base.size());
      for (std::size_t i = 0; i < base.size(); ++i)
        bits[i] = base[(i + sym_shift * bps) % base.size()];
      tx.frames.push_back(sigproc::map_bits(bits, fmt, cfg.baud_hz));
      tx.bits.push_back(std::move(bits));
    }
  } else {
    for (int m = 0; m < cfg.modes; ++m) {
      auto bits = sigproc::generate_prbs(
          Rng::derive(cfg.seed, kStreamBits + static_cast<std::uint64_t>(m)),
          slot_symbols * bps, prbs_mode);
      tx.frames.push_back(sigproc::map_bits(bits, fmt, cfg.baud_hz));
      tx.bits.push_back(std::move(bits));
    }
  }
  for (const auto& f : tx.frames) {
    auto tr = f;
    tr.symbols.resize(cfg.training_symbols);
    tx.training.push_back(std::move(tr));
  }
  return tx;
}

channel::TransferMatrix channel_matrix_for(const io::ExperimentConfig& cfg,
                                           double wavelength_nm,
                                           std::size_t wavelength_index) {
  const auto phases = cfg.matrix_phases == "zero" ? channel::PhaseMode::zero
                                                  : channel::PhaseMode::random;
  if (cfg.source == "file") {
    const auto& files = cfg.matrix_files;
    const std::string& path =
        files.size() == 1 ? files.front() : files.at(wavelength_index % files.size());
    return channel::normalize_passive(
        channel::load_transfer_matrix(path, cfg.matrix_seed, phases));
  }
  auto profile = channel::default_crosstalk_profile(cfg.modes);
  if (!std::isnan(cfg.crosstalk_db)) {
    // shift each wavelength column so its worst mode sits at the override
    for (Eigen::Index w = 0; w < profile.xt_db.cols(); ++w) {
      const double shift = cfg.crosstalk_db - profile.xt_db.col(w).maxCoeff();
      profile.xt_db.col(w).array() += shift;
    }
  }
  for (auto& il : profile.il_spread_db) il = cfg.il_spread_db;
  return channel::synthesize_transfer_matrix(profile, wavelength_nm,
                                             cfg.matrix_seed, phases);
}

/// Place per-slot bursts at their (possibly jittered) delays in a
/// full-period record. Equivalent to gating full-period streams and
/// tdm_combine, without materializing six period-long waveforms.
channel::DualPol place_bursts(const std::vector<channel::DualPol>& slots,
                              const std::vector<long>& delay_samples,
                              std::size_t period_samples, double fs) {
  channel::DualPol rec;
  rec.x.sample_rate = fs;
  rec.y.sample_rate = fs;
  rec.x.samples.assign(period_samples, cd(0.0, 0.0));
  rec.y.samples.assign(period_samples, cd(0.0, 0.0));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& slot = slots[k];
    const long d = delay_samples[k];
    for (std::size_t t = 0; t < slot.x.size(); ++t) {
      const std::size_t pos =
          static_cast<std::size_t>((d + static_cast<long>(t)) %
                                       static_cast<long>(period_samples) +
                                   (d + static_cast<long>(t) < 0
                                        ? static_cast<long>(period_samples)
                                        : 0));
      rec.x.samples[pos] += slot.x.samples[t];
      rec.y.samples[pos] += slot.y.samples[t];
    }
  }
  return rec;
}

/// Data-aided phase tracking over the training prefix, decision-directed
/// beyond it, with phase continuity across the boundary.
SymbolFrame phase_track_hybrid(const SymbolFrame& symbols,
                               const SymbolFrame& training, int block) {
  SymbolFrame out = symbols;
  if (!symbols.format) return out;
  cd carry(1.0, 0.0);
  for (std::size_t b0 = 0; b0 < symbols.size(); b0 += static_cast<std::size_t>(block)) {
    const std::size_t b1 = std::min(symbols.size(), b0 + static_cast<std::size_t>(block));
    cd acc(0.0, 0.0);
    for (std::size_t n = b0; n < b1; ++n) {
      const cd pre = symbols.symbols[n] * carry;
      const cd ref = n < training.size()
                         ? training.symbols[n]
                         : symbols.format->map(symbols.format->decide(pre));
      acc += ref * std::conj(pre);
    }
    if (acc != cd(0.0, 0.0)) carry *= acc / std::abs(acc);
    for (std::size_t n = b0; n < b1; ++n) out.symbols[n] = symbols.symbols[n] * carry;
  }
  return out;
}

WavelengthResult simulate_wavelength(const io::ExperimentConfig& cfg,
                                     double wavelength_nm,
                                     std::size_t wavelength_index,
                                     const TxData& tx) {
  const auto& fmt = ModulationFormat::from_name(cfg.format);
  const int n = cfg.modes;
  const int sps = cfg.samples_per_symbol;
  const std::size_t slot_symbols = cfg.slot_symbols();
  const std::size_t window = slot_symbols * static_cast<std::size_t>(sps);
  const double fs = cfg.baud_hz * sps;
  const std::uint64_t wkey = wavelength_key(wavelength_nm);

  WavelengthResult res;
  res.wavelength_nm = wavelength_nm;
  res.snr_db = cfg.snr_db;

  // transmitter: shape each mode's burst, apply launch power and impairments
  std::vector<Waveform> bursts(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    auto wf = sigproc::shape_pulses(tx.frames[static_cast<std::size_t>(m)], sps,
                                    cfg.rolloff, cfg.rrc_span_symbols);
    if (!cfg.launch_power_db.empty()) {
      const double g =
          std::pow(10.0, cfg.launch_power_db[static_cast<std::size_t>(m)] / 20.0);
      for (auto& s : wf.samples) s *= g;
    }
    wf = sigproc::add_phase_noise(
        wf, cfg.linewidth_hz,
        Rng::derive(cfg.noise_seed, kStreamPhase + static_cast<std::uint64_t>(m) +
                                        (wkey << 8)));
    wf = sigproc::add_awgn(
        wf, cfg.snr_db,
        Rng::derive(cfg.noise_seed, kStreamNoise + static_cast<std::uint64_t>(m) +
                                        (wkey << 8)));
    wf.label = mode_label(m);
    bursts[static_cast<std::size_t>(m)] = std::move(wf);
  }

  // optical path: crosstalk + MDL, polarization pairing, TDM combining
  const auto tm = channel_matrix_for(cfg, wavelength_nm, wavelength_index);
  const auto mdl = channel::default_mdl_vector(n, cfg.mdl_db);
  {
    Eigen::MatrixXcd applied = tm.field;
    for (int i = 0; i < n; ++i)
      applied.row(i) *= std::pow(10.0, -mdl[static_cast<std::size_t>(i)] / 20.0);
    res.channel_mdl_db = metrics::mdl_from_matrix(applied);
  }
  auto coupled = channel::apply_mode_coupling(bursts, tm, mdl);
  bursts.clear();

  auto plan = channel::default_tdm_plan(n, slot_symbols, cfg.baud_hz);
  channel::JonesSpec jones;
  jones.identity = cfg.jones == "identity";
  jones.seed = Rng::derive(cfg.jones_seed, wkey);
  auto slots = channel::pair_polarizations(coupled, plan, jones);
  coupled.clear();

  std::vector<long> delays(plan.slots.size());
  for (std::size_t k = 0; k < plan.slots.size(); ++k) {
    double d = static_cast<double>(k) * static_cast<double>(window);
    if (cfg.jitter_samples > 0.0) {
      Rng rng(Rng::derive(cfg.seed, kStreamJitter + k + (wkey << 8)));
      d += rng.uniform(-cfg.jitter_samples, cfg.jitter_samples);
    }
    delays[k] = std::lround(d);
  }
  auto record = place_bursts(slots, delays, window * plan.slots.size(), fs);
  slots.clear();

  if (!cfg.echo_delay_symbols.empty()) {
    std::vector<channel::Echo> echoes;
    for (std::size_t e = 0; e < cfg.echo_delay_symbols.size(); ++e)
      echoes.push_back({cfg.echo_delay_symbols[e] / cfg.baud_hz, cfg.echo_level_db[e]});
    record.x = channel::add_reflection_echo(record.x, echoes);
    record.y = channel::add_reflection_echo(record.y, echoes);
  }
  if (cfg.freq_offset_hz != 0.0) {
    record.x = sigproc::add_freq_offset(record.x, cfg.freq_offset_hz);
    record.y = sigproc::add_freq_offset(record.y, cfg.freq_offset_hz);
  }

  // receiver: stitch, coarse carrier recovery, MIMO equalization
  rxdsp::StitchOptions sopt;
  sopt.sps = sps;
  sopt.rolloff = cfg.rolloff;
  sopt.rrc_span = cfg.rrc_span_symbols;
  sopt.search_samples = cfg.sync_search_samples;
  sopt.sync_threshold = cfg.sync_threshold;
  auto tribs = rxdsp::tdm_stitch(record, plan, tx.training, sopt);
  res.stitch_lags = tribs.slot_lags;
  record.x.samples.clear();
  record.y.samples.clear();

  if (cfg.freq_offset_hz != 0.0) {
    // one LO: estimate on the first active tributary, derotate all
    double est = 0.0;
    for (std::size_t t = 0; t < tribs.size(); ++t) {
      if (tribs.mapping[t].mode < 0) continue;
      est = rxdsp::estimate_freq_offset(tribs.tribs[t], fmt, cfg.baud_hz);
      break;
    }
    const double w = -2.0 * kPi * est / cfg.baud_hz;
    for (auto& trib : tribs.tribs) {
      for (std::size_t k = 0; k < trib.size(); ++k) {
        const double phi = w * static_cast<double>(k);
        trib[k] *= cd(std::cos(phi), std::sin(phi));
      }
    }
  }

  // Contract check ahead of the equalizer: each active tributary starts on
  // its training prefix (offset 0 after stitch alignment). A polarization
  // can carry almost none of its nominal mode under random Jones mixing, so
  // only confident peaks may trigger a correction. Shifted-replica emulation
  // leaves the whole record self-similar, where symbol sync has no meaning
  // beyond the stitch alignment.
  if (!cfg.shared_pattern_emulation) {
    for (std::size_t t = 0; t < tribs.size(); ++t) {
      const int mode = tribs.mapping[t].mode;
      if (mode < 0) continue;
      try {
        double peak = 0.0;
        const std::size_t offset = rxdsp::frame_sync(
            tribs.tribs[t], tx.training[static_cast<std::size_t>(mode)], &peak);
        if (offset != 0 && peak >= 0.3)
          tribs.tribs[t] = sigproc::cyclic_shift(tribs.tribs[t],
                                                 -static_cast<long>(offset));
      } catch (const SyncAmbiguityError&) {
        // a near-nulled polarization has no usable peak; it is already aligned
      }
    }
  }

  rxdsp::TributarySet eq_in =
      cfg.drop_empty_tributary ? tribs.without_empty() : tribs;
  tribs.tribs.clear();

  rxdsp::EqualizerConfig ecfg;
  ecfg.num_taps = cfg.num_taps;
  ecfg.passes = cfg.passes;
  ecfg.normalized = cfg.normalized;
  ecfg.training_symbols = cfg.training_symbols;
  ecfg.diagonal_only = cfg.equalizer_mode == "single";
  // Single-branch per-bin adaptation is only stable well below the
  // multichannel step; the baseline reaches its interference floor in tens
  // of blocks anyway.
  ecfg.step = ecfg.diagonal_only ? std::min(cfg.step, 0.2) : cfg.step;
  auto eq = rxdsp::fd_lms_equalize(eq_in, tx.training, ecfg);
  res.mse_history = eq.state.mse_history;
  res.converged = eq.state.converged;

  // channel estimates (skipped for shared-pattern emulation, whose training
  // is rank-deficient by construction)
  if (!cfg.shared_pattern_emulation && eq.state.converged) {
    res.intensity_db =
        rxdsp::estimate_intensity_transfer_matrix(eq.state, eq_in, tx.training);
    const auto ir = rxdsp::extract_impulse_response(eq.state);
    res.impulse_profile_db = ir.intensity_profile_db;
    res.impulse_peak_lag = ir.peak_lag;
  }

  // phase tracking and per-mode metrics over the payload
  const std::size_t t_train = cfg.training_symbols;
  const std::size_t bps = static_cast<std::size_t>(fmt.bits_per_symbol());
  double ber_acc = 0.0, best = 1.0, worst = 0.0;
  for (int m = 0; m < n; ++m) {
    auto tracked = phase_track_hybrid(eq.outputs[static_cast<std::size_t>(m)],
                                      tx.training[static_cast<std::size_t>(m)],
                                      cfg.phase_track_block);

    SymbolFrame payload;
    payload.format = &fmt;
    payload.baud = cfg.baud_hz;
    payload.symbols.assign(tracked.symbols.begin() + static_cast<long>(t_train),
                           tracked.symbols.end());
    const auto decided = sigproc::hard_decide(payload);
    const BitSequence reference(
        tx.bits[static_cast<std::size_t>(m)].begin() + static_cast<long>(t_train * bps),
        tx.bits[static_cast<std::size_t>(m)].end());

    ModeResult mr;
    mr.mode = m;
    mr.ber = metrics::count_ber(decided, reference, cfg.ber_skip_bits);
    const std::vector<cd> ref_symbols(
        tx.frames[static_cast<std::size_t>(m)].symbols.begin() + static_cast<long>(t_train),
        tx.frames[static_cast<std::size_t>(m)].symbols.end());
    mr.evm_percent = metrics::evm_percent(payload.symbols, ref_symbols);

    ber_acc += mr.ber.ber;
    best = std::min(best, mr.ber.ber);
    worst = std::max(worst, mr.ber.ber);

    const std::size_t keep =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.constellation_points, 0)),
                              payload.symbols.size());
    res.constellations.emplace_back(payload.symbols.begin(),
                                    payload.symbols.begin() + static_cast<long>(keep));
    res.modes.push_back(std::move(mr));
  }
  res.mean_ber = ber_acc / n;
  res.best_ber = best;
  res.worst_ber = worst;
  return res;
}

}  // namespace

RunResult run_simulation(const io::ExperimentConfig& cfg) {
  cfg.validate();
  RunResult run;
  run.config = cfg;
  const auto& fmt = ModulationFormat::from_name(cfg.format);
  run.capacity = metrics::net_capacity(cfg.modes, cfg.baud_hz,
                                       fmt.bits_per_symbol(), cfg.fec_overhead,
                                       cfg.grid_hz);
  const TxData tx = make_tx_data(cfg);
  for (std::size_t i = 0; i < cfg.wavelengths_nm.size(); ++i) {
    run.per_wavelength.push_back(
        simulate_wavelength(cfg, cfg.wavelengths_nm[i], i, tx));
  }
  return run;
}

std::vector<SweepPoint> sweep(const io::ExperimentConfig& cfg, SweepAxis axis,
                              const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: no values");

  auto run_point = [&](std::size_t idx) {
    SweepPoint point;
    point.value = values[idx];
    io::ExperimentConfig pcfg = cfg;
    pcfg.seed = cfg.seed + idx;
    if (axis == SweepAxis::wavelength)
      pcfg.wavelengths_nm = {values[idx]};
    else
      pcfg.snr_db = values[idx];
    try {
      point.result = run_simulation(pcfg);
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
    }
    return point;
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                     values.size()));
  std::vector<SweepPoint> points(values.size());
  std::size_t next = 0;
  while (next < values.size()) {
    const std::size_t batch = std::min(workers, values.size() - next);
    std::vector<std::future<SweepPoint>> futures;
    for (std::size_t b = 0; b < batch; ++b)
      futures.push_back(std::async(std::launch::async, run_point, next + b));
    for (std::size_t b = 0; b < batch; ++b) points[next + b] = futures[b].get();
    next += batch;
  }
  return points;
}

std::vector<WavelengthCharacterization> characterize(
    const std::vector<std::string>& matrix_files) {
  if (matrix_files.empty())
    throw std::invalid_argument("characterize: no matrix files");
  std::vector<WavelengthCharacterization> report;
  for (const auto& file : matrix_files) {
    const auto tm = channel::load_transfer_matrix(file, 0, channel::PhaseMode::zero);
    WavelengthCharacterization wc;
    wc.file = file;
    wc.wavelength_nm = tm.wavelength_nm;
    wc.mdl_db = metrics::mdl_from_matrix(tm.field);
    double worst = -1e300;
    for (int m = 0; m < tm.modes(); ++m) {
      ModeCharacterization mc;
      mc.mode = m;
      mc.worst_crosstalk_db = channel::worst_crosstalk_db(tm, m);
      mc.insertion_loss_db = channel::insertion_loss_db(tm, m);
      if (mc.worst_crosstalk_db > worst) {
        worst = mc.worst_crosstalk_db;
        wc.worst_mode = m;
      }
      wc.modes.push_back(mc);
    }
    report.push_back(std::move(wc));
  }
  return report;
}

}  // namespace mdmsim::sim
