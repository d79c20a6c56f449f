// SPDX-License-Identifier: Apache-2.0
//
// mdmsim: seed-deterministic simulator for an 11-mode MDM coherent
// interconnect with TDM reception and frequency-domain MIMO equalization.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "mdmsim/config.hpp"
#include "mdmsim/errors.hpp"
#include "mdmsim/metrics.hpp"
#include "mdmsim/plots.hpp"
#include "mdmsim/report.hpp"
#include "mdmsim/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

mdmsim::io::ExperimentConfig make_config(const std::string& path,
                                         bool seed_set, std::uint64_t seed) {
  mdmsim::io::ExperimentConfig cfg;
  if (!path.empty()) cfg = mdmsim::io::load_config(path);
  if (seed_set) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void print_run(const mdmsim::sim::RunResult& run) {
  const auto& cap = run.capacity;
  std::printf("capacity: gross %.4g b/s, net %.4g b/s (FEC %.0f%%), %.2f b/s/Hz on a %.4g Hz grid\n",
              cap.gross_bps, cap.net_bps, cap.fec_overhead * 100.0,
              cap.spectral_efficiency_bps_hz, cap.grid_hz);
  for (const auto& w : run.per_wavelength) {
    std::printf("  %7.1f nm: mean BER %.3e (best %.3e / worst %.3e)%s, MDL %.1f dB\n",
                w.wavelength_nm, w.mean_ber, w.best_ber, w.worst_ber,
                w.converged ? "" : " [NOT CONVERGED]", w.channel_mdl_db);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdmsim: 11-mode MDM coherent interconnect simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* sim_cmd = app.add_subcommand("simulate", "run the configured experiment");
  add_common(sim_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one axis over values");
  add_common(sweep_cmd);
  std::string axis = "wavelength";
  std::vector<double> values;
  sweep_cmd->add_option("--axis", axis, "wavelength | snr")->capture_default_str();
  sweep_cmd->add_option("--values", values, "axis values")->delimiter(',')->required();

  auto* char_cmd = app.add_subcommand("characterize",
                                      "crosstalk/IL/MDL report for matrix files");
  std::vector<std::string> matrix_files;
  char_cmd->add_option("files", matrix_files, "matrix CSV files, one per wavelength")
      ->required();
  char_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* plot_cmd = app.add_subcommand("plot", "render SVG figures from results");
  std::string results_dir;
  plot_cmd->add_option("--results", results_dir, "directory written by simulate")
      ->required();
  plot_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* schema_cmd =
      app.add_subcommand("print-config-schema", "list every config key with defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) {
      const auto cfg = make_config(config_path, seed_set, seed);
      const auto run = mdmsim::sim::run_simulation(cfg);
      mdmsim::io::write_run_result(out_dir, run);
      print_run(run);
      std::printf("results written to %s\n", out_dir.c_str());
    } else if (sweep_cmd->parsed()) {
      const auto cfg = make_config(config_path, seed_set, seed);
      mdmsim::sim::SweepAxis ax;
      if (axis == "wavelength") {
        ax = mdmsim::sim::SweepAxis::wavelength;
      } else if (axis == "snr") {
        ax = mdmsim::sim::SweepAxis::snr;
      } else {
        std::fprintf(stderr, "error: --axis must be wavelength or snr\n");
        return kExitConfig;
      }
      const auto points = mdmsim::sim::sweep(cfg, ax, values);
      mdmsim::io::write_sweep_results(out_dir, points, axis);
      for (const auto& p : points) {
        if (p.failed) {
          std::printf("  %s = %g: FAILED (%s)\n", axis.c_str(), p.value,
                      p.error.c_str());
        } else {
          const auto& w = p.result.per_wavelength.front();
          std::printf("  %s = %g: mean BER %.3e (best %.3e / worst %.3e)\n",
                      axis.c_str(), p.value, w.mean_ber, w.best_ber, w.worst_ber);
        }
      }
      std::printf("sweep results written to %s\n", out_dir.c_str());
    } else if (char_cmd->parsed()) {
      const auto report = mdmsim::sim::characterize(matrix_files);
      mdmsim::io::write_characterization(out_dir, report);
      for (const auto& wc : report) {
        std::printf("%s (%.1f nm): MDL %.2f dB, worst mode %s\n", wc.file.c_str(),
                    wc.wavelength_nm, wc.mdl_db,
                    mdmsim::mode_label(wc.worst_mode).c_str());
        for (const auto& mc : wc.modes) {
          std::printf("  %-5s crosstalk %7.2f dB, IL %6.2f dB\n",
                      mdmsim::mode_label(mc.mode).c_str(), mc.worst_crosstalk_db,
                      mc.insertion_loss_db);
        }
      }
    } else if (plot_cmd->parsed()) {
      const auto report = mdmsim::io::emit_plots(results_dir, out_dir);
      for (const auto& w : report.written) std::printf("wrote %s\n", w.c_str());
      for (const auto& m : report.missing)
        std::printf("missing section: %s\n", m.c_str());
    } else if (schema_cmd->parsed()) {
      std::fputs(mdmsim::io::config_schema().c_str(), stdout);
    }
  } catch (const mdmsim::ParseError& e) {
    std::fprintf(stderr, "parse error: %s", e.what());
    if (e.row() >= 0) std::fprintf(stderr, " (line %d)", e.row());
    std::fprintf(stderr, "\n");
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
