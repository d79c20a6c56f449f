// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mdmsim/errors.hpp"
#include "mdmsim/metrics.hpp"

namespace mdmsim::io {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path.string());
  return os;
}

std::string wl_tag(double wavelength_nm) {
  // wavelengths are nm-scale; one decimal is enough to keep names unique
  const double r = std::round(wavelength_nm * 10.0) / 10.0;
  std::string s = format_double(r);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s + "nm";
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_run_result(const std::string& dir, const sim::RunResult& result) {
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    auto os = open_out(base / "config.txt");
    os << serialize_config(result.config);
  }

  {
    auto os = open_out(base / "summary.txt");
    const auto& cap = result.capacity;
    os << "seed = " << result.config.seed << "\n";
    os << "format = " << result.config.format << "\n";
    os << "modes = " << result.config.modes << "\n";
    os << "baud_hz = " << format_double(result.config.baud_hz) << "\n";
    os << "gross_bps = " << format_double(cap.gross_bps) << "\n";
    os << "net_bps = " << format_double(cap.net_bps) << "\n";
    os << "fec_overhead = " << format_double(cap.fec_overhead) << "\n";
    os << "spectral_efficiency_grid = "
       << format_double(cap.spectral_efficiency_bps_hz) << "\n";
    // the second accounting divides by the occupied bandwidth instead
    const double occupied = result.config.baud_hz * (1.0 + result.config.rolloff);
    os << "spectral_efficiency_occupied = "
       << format_double(cap.net_bps / occupied) << "\n";
    for (const auto& w : result.per_wavelength) {
      const std::string tag = wl_tag(w.wavelength_nm);
      os << "mean_ber_" << tag << " = " << format_double(w.mean_ber) << "\n";
      os << "best_ber_" << tag << " = " << format_double(w.best_ber) << "\n";
      os << "worst_ber_" << tag << " = " << format_double(w.worst_ber) << "\n";
      os << "converged_" << tag << " = " << (w.converged ? "true" : "false") << "\n";
      os << "channel_mdl_db_" << tag << " = " << format_double(w.channel_mdl_db)
         << "\n";
      os << "stitch_lags_" << tag << " =";
      for (long lag : w.stitch_lags) os << " " << lag;
      os << "\n";
    }
  }

  {
    auto os = open_out(base / "ber.csv");
    os << "wavelength_nm,mode,bits,errors,ber,classification,evm_percent\n";
    for (const auto& w : result.per_wavelength) {
      for (const auto& m : w.modes) {
        os << format_double(w.wavelength_nm) << "," << mode_label(m.mode) << ","
           << m.ber.bits << "," << m.ber.errors << "," << format_double(m.ber.ber)
           << "," << metrics::to_string(m.ber.classification) << ","
           << format_double(m.evm_percent) << "\n";
      }
    }
  }

  for (const auto& w : result.per_wavelength) {
    const std::string tag = wl_tag(w.wavelength_nm);
    {
      auto os = open_out(base / ("mse_" + tag + ".csv"));
      os << "block,mse\n";
      for (std::size_t b = 0; b < w.mse_history.size(); ++b)
        os << b << "," << format_double(w.mse_history[b]) << "\n";
    }
    if (w.intensity_db.size() > 0) {
      auto os = open_out(base / ("intensity_" + tag + ".csv"));
      for (int c = 0; c < w.intensity_db.cols(); ++c) os << "," << mode_label(c);
      os << "\n";
      for (int r = 0; r < w.intensity_db.rows(); ++r) {
        os << mode_label(r);
        for (int c = 0; c < w.intensity_db.cols(); ++c)
          os << "," << format_double(w.intensity_db(r, c));
        os << "\n";
      }
    }
    if (!w.impulse_profile_db.empty()) {
      auto os = open_out(base / ("impulse_" + tag + ".csv"));
      os << "tap,lag,db\n";
      for (std::size_t t = 0; t < w.impulse_profile_db.size(); ++t)
        os << t << "," << (static_cast<long>(t) - w.impulse_peak_lag) << ","
           << format_double(w.impulse_profile_db[t]) << "\n";
    }
  }

  if (!result.per_wavelength.empty()) {
    const auto& w = result.per_wavelength.front();
    for (std::size_t m = 0; m < w.constellations.size(); ++m) {
      auto os = open_out(base / ("constellation_" + mode_label(static_cast<int>(m)) +
                                 ".csv"));
      os << "re,im\n";
      for (const cd s : w.constellations[m])
        os << format_double(s.real()) << "," << format_double(s.imag()) << "\n";
    }
  }
}

void write_sweep_results(const std::string& dir,
                         const std::vector<sim::SweepPoint>& points,
                         const std::string& axis) {
  fs::create_directories(dir);
  const fs::path base(dir);
  auto os = open_out(base / "sweep_summary.csv");
  os << axis << ",failed,mean_ber,best_ber,worst_ber,error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    double mean = 0.0, best = 0.0, worst = 0.0;
    if (!p.failed && !p.result.per_wavelength.empty()) {
      mean = p.result.per_wavelength.front().mean_ber;
      best = p.result.per_wavelength.front().best_ber;
      worst = p.result.per_wavelength.front().worst_ber;
    }
    os << format_double(p.value) << "," << (p.failed ? "true" : "false") << ","
       << format_double(mean) << "," << format_double(best) << ","
       << format_double(worst) << "," << p.error << "\n";

    if (!p.failed) {
      char sub[32];
      std::snprintf(sub, sizeof(sub), "point_%03zu", i);
      write_run_result((base / sub).string(), p.result);
    }
  }
}

void write_characterization(
    const std::string& dir,
    const std::vector<sim::WavelengthCharacterization>& report) {
  fs::create_directories(dir);
  auto os = open_out(fs::path(dir) / "characterization.csv");
  os << "file,wavelength_nm,mode,worst_crosstalk_db,insertion_loss_db,mdl_db,"
        "is_worst_mode\n";
  for (const auto& wc : report) {
    for (const auto& mc : wc.modes) {
      os << wc.file << "," << format_double(wc.wavelength_nm) << ","
         << mode_label(mc.mode) << "," << format_double(mc.worst_crosstalk_db)
         << "," << format_double(mc.insertion_loss_db) << ","
         << format_double(wc.mdl_db) << ","
         << (mc.mode == wc.worst_mode ? "true" : "false") << "\n";
    }
  }
}

}  // namespace mdmsim::io
