// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/channel.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdmsim/errors.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/sigproc.hpp"

namespace mdmsim::channel {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_uniform(const std::vector<Waveform>& wfs, const char* who) {
  if (wfs.empty()) throw std::invalid_argument(std::string(who) + ": no waveforms");
  for (const auto& wf : wfs) {
    if (wf.size() != wfs.front().size() || wf.sample_rate != wfs.front().sample_rate)
      throw std::invalid_argument(std::string(who) +
                                  ": waveforms must share length and sample rate");
  }
}

Waveform zero_like(const Waveform& ref) {
  Waveform z;
  z.samples.assign(ref.size(), cd(0.0, 0.0));
  z.sample_rate = ref.sample_rate;
  return z;
}

}  // namespace

Eigen::MatrixXd TransferMatrix::intensity_db() const {
  Eigen::MatrixXd out(field.rows(), field.cols());
  for (Eigen::Index r = 0; r < field.rows(); ++r) {
    for (Eigen::Index c = 0; c < field.cols(); ++c) {
      const double p = std::norm(field(r, c));
      out(r, c) = p > 0.0 ? 10.0 * std::log10(p) : -300.0;
    }
  }
  return out;
}

TransferMatrix normalize_passive(TransferMatrix m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.field);
  const double smax = svd.singularValues()(0);
  if (smax > 1.0) m.field /= smax;
  return m;
}

double worst_crosstalk_db(const TransferMatrix& m, int mode) {
  const int n = m.modes();
  if (mode < 0 || mode >= n) throw std::invalid_argument("worst_crosstalk_db: bad mode");
  const Eigen::MatrixXd idb = m.intensity_db();
  double worst = -300.0;
  for (int j = 0; j < n; ++j) {
    if (j == mode) continue;
    worst = std::max(worst, idb(mode, j));
  }
  return worst - idb(mode, mode);
}

double insertion_loss_db(const TransferMatrix& m, int mode) {
  const int n = m.modes();
  if (mode < 0 || mode >= n) throw std::invalid_argument("insertion_loss_db: bad mode");
  return -m.intensity_db()(mode, mode);
}

void CrosstalkProfile::validate() const {
  if (wavelengths_nm.empty() || xt_db.rows() == 0)
    throw std::invalid_argument("CrosstalkProfile: empty profile");
  if (xt_db.cols() != static_cast<Eigen::Index>(wavelengths_nm.size()) ||
      il_spread_db.size() != wavelengths_nm.size())
    throw std::invalid_argument("CrosstalkProfile: inconsistent table sizes");
  for (std::size_t i = 1; i < wavelengths_nm.size(); ++i) {
    if (wavelengths_nm[i] <= wavelengths_nm[i - 1])
      throw std::invalid_argument("CrosstalkProfile: wavelengths must increase");
  }
  if ((xt_db.array() > 0.0).any())
    throw std::invalid_argument("CrosstalkProfile: crosstalk must be <= 0 dB");
}

CrosstalkProfile default_crosstalk_profile(int n_modes) {
  if (n_modes < 2 || n_modes > 16)
    throw std::invalid_argument("default_crosstalk_profile: mode count out of range");
  CrosstalkProfile p;
  p.wavelengths_nm = {1530, 1535, 1540, 1545, 1550, 1555, 1560};
  const int nw = static_cast<int>(p.wavelengths_nm.size());
  p.il_spread_db.assign(p.wavelengths_nm.size(), 1.0);
  p.xt_db.resize(n_modes, nw);

  if (n_modes == 11) {
    // Worst mode is TE8, peaking near the blue band edge.
    const double table[11][7] = {
        {-26.0, -26.5, -27.0, -27.0, -26.5, -26.0, -25.5},
        {-24.0, -24.0, -24.5, -25.0, -25.0, -24.5, -24.0},
        {-22.0, -22.5, -23.0, -23.0, -22.5, -22.0, -21.5},
        {-20.0, -20.0, -20.5, -21.0, -21.0, -20.5, -20.0},
        {-18.0, -18.5, -19.0, -19.0, -18.5, -18.0, -17.5},
        {-17.0, -17.0, -17.5, -18.0, -18.0, -17.5, -17.0},
        {-15.0, -15.5, -16.0, -16.0, -15.5, -15.0, -14.5},
        {-13.0, -13.0, -13.5, -14.0, -14.0, -13.5, -13.0},
        {-7.0, -7.0, -8.0, -9.0, -10.0, -11.0, -12.0},
        {-14.0, -14.5, -15.0, -15.0, -14.5, -14.0, -13.5},
        {-12.0, -12.0, -12.5, -13.0, -13.0, -12.5, -12.0},
    };
    for (int m = 0; m < 11; ++m)
      for (int w = 0; w < nw; ++w) p.xt_db(m, w) = table[m][w];
  } else {
    // Generic spread: higher-order modes couple harder, worst near -9 dB.
    for (int m = 0; m < n_modes; ++m) {
      const double base = -25.0 + 16.0 * static_cast<double>(m) / (n_modes - 1);
      for (int w = 0; w < nw; ++w) {
        p.xt_db(m, w) = std::min(base - 0.3 * std::abs(w - nw / 2), -7.0);
      }
    }
  }
  return p;
}

TransferMatrix synthesize_transfer_matrix(const CrosstalkProfile& profile,
                                          double wavelength_nm,
                                          std::uint64_t seed,
                                          PhaseMode phases) {
  profile.validate();
  const auto& wls = profile.wavelengths_nm;
  if (wavelength_nm < wls.front() || wavelength_nm > wls.back())
    throw std::invalid_argument("synthesize_transfer_matrix: wavelength out of profile range");

  // linear interpolation between tabulated wavelengths
  std::size_t hi = 1;
  while (hi + 1 < wls.size() && wls[hi] < wavelength_nm) ++hi;
  const std::size_t lo = hi - 1;
  const double span = wls[hi] - wls[lo];
  const double a = span > 0.0 ? (wavelength_nm - wls[lo]) / span : 0.0;

  const int n = profile.modes();
  const double il_spread =
      (1.0 - a) * profile.il_spread_db[lo] + a * profile.il_spread_db[hi];

  Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(std::llround(wavelength_nm * 1000.0))));
  TransferMatrix tm;
  tm.wavelength_nm = wavelength_nm;
  tm.field.resize(n, n);

  for (int i = 0; i < n; ++i) {
    const double xt_db = (1.0 - a) * profile.xt_db(i, static_cast<Eigen::Index>(lo)) +
                         a * profile.xt_db(i, static_cast<Eigen::Index>(hi));
    const double il_db = rng.uniform(0.0, il_spread);
    const double diag_mag = std::pow(10.0, -il_db / 20.0);

    // distribute off-diagonal power so the worst entry lands on the profile
    std::vector<double> rel(n, 0.0);
    double rel_max = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      rel[j] = rng.uniform(0.05, 1.0);
      rel_max = std::max(rel_max, rel[j]);
    }
    const double worst_mag = diag_mag * std::pow(10.0, xt_db / 20.0);
    for (int j = 0; j < n; ++j) {
      double mag, phase = 0.0;
      if (j == i) {
        mag = diag_mag;
      } else {
        mag = worst_mag * std::sqrt(rel[j] / rel_max);
      }
      if (phases == PhaseMode::random) phase = rng.uniform(0.0, 2.0 * kPi);
      tm.field(i, j) = mag * cd(std::cos(phase), std::sin(phase));
    }
  }
  return normalize_passive(std::move(tm));
}

int TdmPlan::mode_count() const {
  int count = 0;
  for (const auto& s : slots) {
    if (s.pol_x >= 0) ++count;
    if (s.pol_y >= 0) ++count;
  }
  return count;
}

void TdmPlan::validate(int n_modes) const {
  if (slots.empty()) throw std::invalid_argument("TdmPlan: no slots");
  std::vector<int> seen(static_cast<std::size_t>(n_modes), 0);
  int empties = 0;
  auto visit = [&](int mode) {
    if (mode < 0) {
      ++empties;
      return;
    }
    if (mode >= n_modes) throw std::invalid_argument("TdmPlan: mode index out of range");
    ++seen[static_cast<std::size_t>(mode)];
  };
  for (const auto& s : slots) {
    visit(s.pol_x);
    visit(s.pol_y);
  }
  for (int m = 0; m < n_modes; ++m) {
    if (seen[static_cast<std::size_t>(m)] != 1)
      throw std::invalid_argument("TdmPlan: mode " + mode_label(m) +
                                  " must appear exactly once");
  }
  const int expected_empties = static_cast<int>(slots.size()) * 2 - n_modes;
  if (empties != expected_empties)
    throw std::invalid_argument("TdmPlan: wrong number of EMPTY positions");
  if (slot_delays_s.size() != slots.size())
    throw std::invalid_argument("TdmPlan: delay per slot required");
  for (std::size_t k = 1; k < slot_delays_s.size(); ++k) {
    if (slot_delays_s[k] <= slot_delays_s[k - 1])
      throw std::invalid_argument("TdmPlan: slot delays must strictly increase");
  }
}

TdmPlan default_tdm_plan(int n_modes, std::size_t slot_symbols, double baud) {
  if (n_modes < 2) throw std::invalid_argument("default_tdm_plan: need >= 2 modes");
  if (baud <= 0.0 || slot_symbols == 0)
    throw std::invalid_argument("default_tdm_plan: bad slot duration");

  TdmPlan plan;
  if (n_modes == 11) {
    plan.slots = {{0, 1}, {2, 3}, {4, 6}, {7, 8}, {9, 10}, {5, -1}};
  } else {
    for (int m = 0; m + 1 < n_modes; m += 2) plan.slots.push_back({m, m + 1});
    if (n_modes % 2 == 1) plan.slots.push_back({n_modes - 1, -1});
  }
  plan.slot_duration_s = static_cast<double>(slot_symbols) / baud;
  plan.slot_delays_s.resize(plan.slots.size());
  for (std::size_t k = 0; k < plan.slots.size(); ++k)
    plan.slot_delays_s[k] = static_cast<double>(k) * plan.slot_duration_s;
  return plan;
}

Eigen::Matrix2cd jones_matrix(const JonesSpec& spec, int slot, bool lone_slot) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (spec.identity || (lone_slot && spec.lone_slot_identity)) return u;

  Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(slot) + 0x4A0ull));
  const double theta = std::asin(std::sqrt(rng.uniform()));
  const double alpha = rng.uniform(0.0, 2.0 * kPi);
  const double beta = rng.uniform(0.0, 2.0 * kPi);
  const double gamma = rng.uniform(0.0, 2.0 * kPi);
  const cd ea(std::cos(alpha), std::sin(alpha));
  const cd eb(std::cos(beta), std::sin(beta));
  const cd eg(std::cos(gamma), std::sin(gamma));
  const double c = std::cos(theta), s = std::sin(theta);
  u(0, 0) = ea * eb * c;
  u(0, 1) = ea * eg * s;
  u(1, 0) = -ea * std::conj(eg) * s;
  u(1, 1) = ea * std::conj(eb) * c;
  return u;
}

std::vector<Waveform> delay_decorrelate(const std::vector<Waveform>& wfs,
                                        double delay_s) {
  require_uniform(wfs, "delay_decorrelate");
  if (delay_s < 0.0) throw std::invalid_argument("delay_decorrelate: delay must be >= 0");
  std::vector<Waveform> out;
  out.reserve(wfs.size());
  for (std::size_t k = 0; k < wfs.size(); ++k) {
    const long shift = std::lround(static_cast<double>(k) * delay_s *
                                   wfs.front().sample_rate);
    Waveform wf = wfs[k];
    wf.samples = sigproc::cyclic_shift(wfs[k].samples, shift);
    out.push_back(std::move(wf));
  }
  return out;
}

std::vector<Waveform> apply_mode_coupling(const std::vector<Waveform>& wfs,
                                          const TransferMatrix& m,
                                          const std::vector<double>& mdl_db) {
  require_uniform(wfs, "apply_mode_coupling");
  const int n = m.modes();
  if (static_cast<int>(wfs.size()) != n)
    throw std::invalid_argument("apply_mode_coupling: waveform count != matrix dimension");
  if (!mdl_db.empty() && static_cast<int>(mdl_db.size()) != n)
    throw std::invalid_argument("apply_mode_coupling: mdl vector size mismatch");

  Eigen::MatrixXcd a = m.field;
  for (int i = 0; i < n; ++i) {
    const double loss = mdl_db.empty() ? 0.0 : mdl_db[static_cast<std::size_t>(i)];
    a.row(i) *= std::pow(10.0, -loss / 20.0);
  }

  const std::size_t len = wfs.front().size();
  std::vector<Waveform> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].samples.assign(len, cd(0.0, 0.0));
    out[static_cast<std::size_t>(i)].sample_rate = wfs.front().sample_rate;
    out[static_cast<std::size_t>(i)].label = mode_label(i);
    cd* dst = out[static_cast<std::size_t>(i)].samples.data();
    for (int j = 0; j < n; ++j) {
      const cd g = a(i, j);
      if (g == cd(0.0, 0.0)) continue;
      const cd* src = wfs[static_cast<std::size_t>(j)].samples.data();
      for (std::size_t t = 0; t < len; ++t) dst[t] += g * src[t];
    }
  }
  return out;
}

std::vector<double> default_mdl_vector(int n_modes, double spread_db) {
  if (n_modes <= 0 || spread_db < 0.0)
    throw std::invalid_argument("default_mdl_vector: bad arguments");
  std::vector<double> mdl(static_cast<std::size_t>(n_modes), 0.0);
  if (n_modes > 1) {
    for (int m = 0; m < n_modes; ++m)
      mdl[static_cast<std::size_t>(m)] = spread_db * m / (n_modes - 1);
  }
  return mdl;
}

std::vector<DualPol> pair_polarizations(const std::vector<Waveform>& wfs,
                                        const TdmPlan& plan,
                                        const JonesSpec& jones) {
  require_uniform(wfs, "pair_polarizations");
  plan.validate(static_cast<int>(wfs.size()));

  std::vector<DualPol> out;
  out.reserve(plan.slots.size());
  for (std::size_t k = 0; k < plan.slots.size(); ++k) {
    const auto& slot = plan.slots[k];
    const bool lone = slot.pol_x < 0 || slot.pol_y < 0;
    const Eigen::Matrix2cd u = jones_matrix(jones, static_cast<int>(k), lone);

    const Waveform zero = zero_like(wfs.front());
    const Waveform& a = slot.pol_x >= 0 ? wfs[static_cast<std::size_t>(slot.pol_x)] : zero;
    const Waveform& b = slot.pol_y >= 0 ? wfs[static_cast<std::size_t>(slot.pol_y)] : zero;

    DualPol dp;
    dp.x = zero_like(wfs.front());
    dp.y = zero_like(wfs.front());
    for (std::size_t t = 0; t < a.size(); ++t) {
      dp.x.samples[t] = u(0, 0) * a.samples[t] + u(0, 1) * b.samples[t];
      dp.y.samples[t] = u(1, 0) * a.samples[t] + u(1, 1) * b.samples[t];
    }
    out.push_back(std::move(dp));
  }
  return out;
}

Waveform gate(const Waveform& wf, double duty, double period_s, int slot_index,
              double baud) {
  if (duty <= 0.0 || duty > 1.0) throw std::invalid_argument("gate: duty in (0, 1]");
  if (period_s <= 0.0) throw std::invalid_argument("gate: period must be > 0");
  if (slot_index < 0) throw std::invalid_argument("gate: slot_index must be >= 0");
  const double window_s = duty * period_s;
  if (baud > 0.0 && window_s * baud < 10.0)
    throw DegenerateWindowError("gate: window shorter than 10 symbols");
  if (duty == 1.0) return wf;

  const double fs = wf.sample_rate;
  const double period_samp = period_s * fs;
  const double window_samp = window_s * fs;
  const double start_samp = std::fmod(slot_index * window_samp, period_samp);

  Waveform out = wf;
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    double pos = std::fmod(static_cast<double>(n) - start_samp, period_samp);
    if (pos < 0.0) pos += period_samp;
    if (pos >= window_samp) out.samples[n] = cd(0.0, 0.0);
  }
  return out;
}

DualPol tdm_combine(const std::vector<DualPol>& slots, const TdmPlan& plan,
                    int guard_samples) {
  if (slots.empty()) throw std::invalid_argument("tdm_combine: no slots");
  if (plan.slot_delays_s.size() != slots.size())
    throw std::invalid_argument("tdm_combine: plan/slot count mismatch");
  const std::size_t len = slots.front().x.size();
  const double fs = slots.front().x.sample_rate;
  for (const auto& s : slots) {
    if (s.x.size() != len || s.y.size() != len || s.x.sample_rate != fs ||
        s.y.sample_rate != fs)
      throw std::invalid_argument("tdm_combine: slots must share length and rate");
  }

  DualPol out;
  out.x.samples.assign(len, cd(0.0, 0.0));
  out.y.samples.assign(len, cd(0.0, 0.0));
  out.x.sample_rate = fs;
  out.y.sample_rate = fs;

  std::vector<std::uint8_t> occupancy(len, 0);
  std::size_t overlapped = 0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const long shift = std::lround(plan.slot_delays_s[k] * fs);
    const auto xs = sigproc::cyclic_shift(slots[k].x.samples, shift);
    const auto ys = sigproc::cyclic_shift(slots[k].y.samples, shift);
    for (std::size_t t = 0; t < len; ++t) {
      out.x.samples[t] += xs[t];
      out.y.samples[t] += ys[t];
      if (xs[t] != cd(0.0, 0.0) || ys[t] != cd(0.0, 0.0)) {
        if (++occupancy[t] == 2) ++overlapped;
      }
    }
  }
  const std::size_t allowed =
      static_cast<std::size_t>(std::max(guard_samples, 0)) * slots.size();
  if (overlapped > allowed)
    throw OverlapError("tdm_combine: slot supports overlap by " +
                       std::to_string(overlapped) + " samples");
  return out;
}

Waveform add_reflection_echo(const Waveform& wf, const std::vector<Echo>& echoes) {
  for (const auto& e : echoes) {
    if (e.level_db > -10.0)
      throw std::invalid_argument("add_reflection_echo: echo levels must be <= -10 dB");
  }
  if (echoes.empty()) return wf;

  Waveform out = wf;
  for (const auto& e : echoes) {
    const long shift = std::lround(e.delay_s * wf.sample_rate);
    const double g = std::pow(10.0, e.level_db / 20.0);
    const auto shifted = sigproc::cyclic_shift(wf.samples, shift);
    for (std::size_t t = 0; t < out.samples.size(); ++t)
      out.samples[t] += g * shifted[t];
  }
  return out;
}

}  // namespace mdmsim::channel
