// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mdmsim/simulation.hpp"

namespace mdmsim::io {

/// Shortest round-trip decimal representation (stable across runs).
std::string format_double(double v);

/// Write the full result file set into `dir`: config echo, flat key = value
/// summary, the BER table, and per-wavelength MSE / intensity / impulse CSVs
/// plus constellation dumps for the first wavelength.
void write_run_result(const std::string& dir, const sim::RunResult& result);

/// Per-point subdirectories plus a sweep_summary.csv table.
void write_sweep_results(const std::string& dir,
                         const std::vector<sim::SweepPoint>& points,
                         const std::string& axis);

void write_characterization(
    const std::string& dir,
    const std::vector<sim::WavelengthCharacterization>& report);

}  // namespace mdmsim::io
