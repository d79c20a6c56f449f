// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace mdmsim::io {

struct PlotReport {
  std::vector<std::string> written;
  std::vector<std::string> missing;  // result sections that were absent
};

/// Render SVG figures from a result directory written by write_run_result:
/// per-mode constellation scatter, BER vs wavelength with best/worst error
/// bars, the normalized intensity impulse-response curve, and the intensity
/// transfer matrix heat map. Missing inputs are reported, the rest are still
/// emitted.
PlotReport emit_plots(const std::string& results_dir, const std::string& out_dir);

}  // namespace mdmsim::io
