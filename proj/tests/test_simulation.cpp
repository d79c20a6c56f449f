// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mdmsim/channel.hpp"
#include "mdmsim/metrics.hpp"
#include "mdmsim/plots.hpp"
#include "mdmsim/report.hpp"
#include "mdmsim/simulation.hpp"

using namespace mdmsim;
using namespace mdmsim::sim;

namespace {

// desk-scale base: small enough that every case here runs in seconds
io::ExperimentConfig small_config() {
  io::ExperimentConfig cfg;
  cfg.modes = 5;
  cfg.format = "qpsk";
  cfg.training_symbols = 8192;
  cfg.payload_symbols = 8192;
  cfg.num_taps = 128;
  cfg.step = 1.0;
  cfg.passes = 8;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.linewidth_hz = 0.0;
  cfg.wavelengths_nm = {1550.0};
  return cfg;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    // average ranks over ties (standard Spearman treatment)
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0.0, equal = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) below += 1.0;
        if (v[j] == v[i]) equal += 1.0;
      }
      r[i] = below + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace

TEST_CASE("noiseless run is error free and deterministic") {
  const auto cfg = small_config();
  const auto run = run_simulation(cfg);
  REQUIRE(run.per_wavelength.size() == 1);
  const auto& w = run.per_wavelength.front();
  CHECK(w.mean_ber == 0.0);
  CHECK(w.converged);
  for (const auto& m : w.modes) CHECK(m.ber.errors == 0);

  // byte-identical rerun
  const auto run2 = run_simulation(cfg);
  io::write_run_result("/tmp/mdmsim_det_a", run);
  io::write_run_result("/tmp/mdmsim_det_b", run2);
  for (const auto& entry :
       std::filesystem::directory_iterator("/tmp/mdmsim_det_a")) {
    std::ifstream a(entry.path(), std::ios::binary);
    std::ifstream b("/tmp/mdmsim_det_b/" + entry.path().filename().string(),
                    std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("capacity report reproduces the headline arithmetic") {
  auto cfg = small_config();
  cfg.modes = 11;
  cfg.format = "qam16";
  cfg.training_symbols = 4096;
  cfg.payload_symbols = 4096;
  cfg.num_taps = 128;
  const auto run = run_simulation(cfg);
  CHECK(run.capacity.gross_bps == doctest::Approx(1.32e12));
  CHECK(run.capacity.net_bps == doctest::Approx(1.2336e12).epsilon(1e-4));
  CHECK(run.capacity.spectral_efficiency_bps_hz == doctest::Approx(37.38).epsilon(1e-3));
}

TEST_CASE("dropping the EMPTY tributary changes BER by less than 10% relative") {
  auto cfg = small_config();
  cfg.format = "qam16";
  cfg.snr_db = 14.0;  // low enough that BER is measurable
  cfg.crosstalk_db = -7.0;

  auto with_empty = cfg;
  with_empty.drop_empty_tributary = false;
  const auto a = run_simulation(cfg);
  const auto b = run_simulation(with_empty);
  const double ber_a = a.per_wavelength[0].mean_ber;
  const double ber_b = b.per_wavelength[0].mean_ber;
  REQUIRE(ber_a > 0.0);
  CHECK(std::abs(ber_a - ber_b) / ber_a < 0.10);
}

TEST_CASE("random jones pairing makes slot-pair blocks non-diagonal") {
  auto cfg = small_config();
  cfg.modes = 11;
  cfg.training_symbols = 8192;
  cfg.payload_symbols = 8192;
  cfg.num_taps = 128;
  cfg.jones = "random";
  const auto run = run_simulation(cfg);
  const auto& intensity = run.per_wavelength[0].intensity_db;
  REQUIRE(intensity.rows() == 11);

  // paired modes share a slot; with random Jones the 2x2 block off-diagonals
  // come within 20 dB of the diagonal
  const auto plan = channel::default_tdm_plan(11, cfg.slot_symbols(), cfg.baud_hz);
  for (const auto& slot : plan.slots) {
    if (slot.pol_x < 0 || slot.pol_y < 0) continue;
    const int a = slot.pol_x, b = slot.pol_y;
    const double diag = std::max(intensity(a, a), intensity(b, b));
    const double off = std::max(intensity(a, b), intensity(b, a));
    CHECK(off > diag - 20.0);
  }

  // identity pairing on an identity-phase channel keeps them diagonal
  auto ident = cfg;
  ident.jones = "identity";
  ident.crosstalk_db = -60.0;
  const auto run2 = run_simulation(ident);
  const auto& clean = run2.per_wavelength[0].intensity_db;
  for (int r = 0; r < 11; ++r)
    for (int c = 0; c < 11; ++c)
      if (r != c) CHECK(clean(r, c) < -30.0);
}

TEST_CASE("shared-pattern emulation mode runs and recovers") {
  auto cfg = small_config();
  cfg.shared_pattern_emulation = true;
  const auto run = run_simulation(cfg);
  CHECK(run.per_wavelength[0].mean_ber == 0.0);
  // channel estimation is skipped: shifted replicas are rank-deficient
  CHECK(run.per_wavelength[0].intensity_db.size() == 0);
}

TEST_CASE("sweep covers values, derives seeds, and survives failures") {
  auto cfg = small_config();
  cfg.format = "qam16";
  cfg.crosstalk_db = -7.0;

  const std::vector<double> snrs{8, 10, 12, 14, 16, 18, 20, 22};
  const auto points = sweep(cfg, SweepAxis::snr, snrs);
  REQUIRE(points.size() == snrs.size());

  std::vector<double> bers;
  for (const auto& p : points) {
    REQUIRE_FALSE(p.failed);
    bers.push_back(p.result.per_wavelength.front().mean_ber);
  }
  // waterfall: BER non-increasing in SNR (Spearman rho < -0.9)
  CHECK(spearman(snrs, bers) < -0.9);

  // single-value sweep equals run_simulation with the derived seed
  auto single_cfg = cfg;
  const auto one = sweep(single_cfg, SweepAxis::snr, {15.0});
  auto direct_cfg = cfg;
  direct_cfg.snr_db = 15.0;
  direct_cfg.seed = cfg.seed;  // sweep index 0 keeps the base seed
  const auto direct = run_simulation(direct_cfg);
  CHECK(one[0].result.per_wavelength[0].mean_ber ==
        direct.per_wavelength[0].mean_ber);

  CHECK_THROWS_AS(sweep(cfg, SweepAxis::snr, {}), std::invalid_argument);
}

TEST_CASE("wavelength sweep emits one row per wavelength") {
  auto cfg = small_config();
  cfg.training_symbols = 4096;
  cfg.payload_symbols = 4096;
  cfg.num_taps = 64;
  const std::vector<double> wls{1530, 1535, 1540, 1545, 1550, 1555, 1560};
  const auto points = sweep(cfg, SweepAxis::wavelength, wls);
  REQUIRE(points.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK_FALSE(points[i].failed);
    CHECK(points[i].result.per_wavelength.front().wavelength_nm ==
          doctest::Approx(wls[i]));
  }
}

TEST_CASE("result files and plots are emitted per contract") {
  auto cfg = small_config();
  cfg.modes = 11;
  cfg.training_symbols = 4096;
  cfg.payload_symbols = 4096;
  cfg.num_taps = 64;
  cfg.constellation_points = 500;
  const auto run = run_simulation(cfg);
  const std::string dir = "/tmp/mdmsim_result_files";
  std::filesystem::remove_all(dir);
  io::write_run_result(dir, run);

  CHECK(std::filesystem::exists(dir + "/config.txt"));
  CHECK(std::filesystem::exists(dir + "/summary.txt"));
  CHECK(std::filesystem::exists(dir + "/ber.csv"));
  CHECK(std::filesystem::exists(dir + "/intensity_1550nm.csv"));
  CHECK(std::filesystem::exists(dir + "/impulse_1550nm.csv"));

  const std::string plot_dir = "/tmp/mdmsim_plot_files";
  std::filesystem::remove_all(plot_dir);
  const auto report = io::emit_plots(dir, plot_dir);
  CHECK(report.missing.empty());
  // 11 constellation panels + 1 of each other plot
  int constellations = 0;
  for (const auto& w : report.written)
    if (w.find("constellation_") != std::string::npos) ++constellations;
  CHECK(constellations == 11);
  CHECK(std::filesystem::exists(plot_dir + "/ber_vs_wavelength.svg"));
  CHECK(std::filesystem::exists(plot_dir + "/impulse_response.svg"));
  CHECK(std::filesystem::exists(plot_dir + "/intensity_matrix.svg"));

  // plotting is deterministic
  const std::string plot_dir2 = "/tmp/mdmsim_plot_files2";
  std::filesystem::remove_all(plot_dir2);
  io::emit_plots(dir, plot_dir2);
  for (const auto& entry : std::filesystem::directory_iterator(plot_dir)) {
    std::ifstream a(entry.path(), std::ios::binary);
    std::ifstream b(plot_dir2 + "/" + entry.path().filename().string(),
                    std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }

  // plots from a partial result directory still emit the rest
  const std::string partial = "/tmp/mdmsim_partial";
  std::filesystem::remove_all(partial);
  std::filesystem::create_directories(partial);
  std::filesystem::copy(dir + "/ber.csv", partial + "/ber.csv");
  const auto partial_report = io::emit_plots(partial, partial + "/plots");
  CHECK_FALSE(partial_report.missing.empty());
  CHECK(std::filesystem::exists(partial + "/plots/ber_vs_wavelength.svg"));
}

TEST_CASE("characterize reports crosstalk, IL, and MDL per file") {
  // near-identity matrix: every mode far below -60 dB crosstalk
  {
    std::ofstream os("/tmp/mdmsim_char_ident.csv");
    os << "# wavelength_nm = 1540\n,TE0,TE1,TE2\n";
    for (int r = 0; r < 3; ++r) {
      os << mode_label(r);
      for (int c = 0; c < 3; ++c) os << "," << (r == c ? 0.0 : -70.0);
      os << "\n";
    }
  }
  const auto report = characterize({"/tmp/mdmsim_char_ident.csv"});
  REQUIRE(report.size() == 1);
  CHECK(report[0].wavelength_nm == doctest::Approx(1540.0));
  for (const auto& mc : report[0].modes) CHECK(mc.worst_crosstalk_db <= -60.0);

  // the MDL column delegates to the same SVD-based metric
  const auto tm = channel::load_transfer_matrix("/tmp/mdmsim_char_ident.csv", 0,
                                                channel::PhaseMode::zero);
  CHECK(report[0].mdl_db == metrics::mdl_from_matrix(tm.field));

  // a -7 dB entry in the TE8 row flags TE8 as the worst mode
  {
    std::ofstream os("/tmp/mdmsim_char_te8.csv");
    os << "# wavelength_nm = 1532\n";
    for (int c = 0; c < 11; ++c) os << "," << mode_label(c);
    os << "\n";
    for (int r = 0; r < 11; ++r) {
      os << mode_label(r);
      for (int c = 0; c < 11; ++c) {
        double v = (r == c) ? 0.0 : -40.0;
        if (r == 8 && c == 3) v = -7.0;
        os << "," << v;
      }
      os << "\n";
    }
  }
  const auto te8 = characterize({"/tmp/mdmsim_char_te8.csv"});
  CHECK(te8[0].worst_mode == 8);
  CHECK(te8[0].modes[8].worst_crosstalk_db == doctest::Approx(-7.0));
}

TEST_CASE("reflection echoes appear in the extracted impulse response") {
  auto cfg = small_config();
  cfg.echo_delay_symbols = {5};
  cfg.echo_level_db = {-20};
  const auto run = run_simulation(cfg);
  const auto& w = run.per_wavelength.front();
  REQUIRE_FALSE(w.impulse_profile_db.empty());
  const int lobe = w.impulse_peak_lag + 5;
  REQUIRE(static_cast<std::size_t>(lobe) < w.impulse_profile_db.size());
  CHECK(w.impulse_profile_db[static_cast<std::size_t>(lobe)] > -25.0);
  CHECK(w.impulse_profile_db[static_cast<std::size_t>(lobe)] < -15.0);
  CHECK(w.mean_ber == 0.0);
}

TEST_CASE("frequency offset is estimated and removed") {
  auto cfg = small_config();
  cfg.freq_offset_hz = 100e6;
  const auto run = run_simulation(cfg);
  CHECK(run.per_wavelength[0].mean_ber == 0.0);
}

TEST_CASE("single-mode equalization fails where MIMO succeeds") {
  auto cfg = small_config();
  cfg.modes = 11;
  cfg.format = "qam16";
  cfg.snr_db = 18.0;
  cfg.crosstalk_db = -7.0;
  cfg.training_symbols = 8192;
  cfg.payload_symbols = 8192;
  cfg.num_taps = 128;

  const auto mimo = run_simulation(cfg);
  auto single_cfg = cfg;
  single_cfg.equalizer_mode = "single";
  const auto single = run_simulation(single_cfg);

  const double mimo_ber = std::max(mimo.per_wavelength[0].mean_ber, 1e-7);
  CHECK(single.per_wavelength[0].mean_ber >= 10.0 * mimo_ber);
}
