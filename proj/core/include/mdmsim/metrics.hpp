// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "mdmsim/modulation.hpp"
#include "mdmsim/types.hpp"

namespace mdmsim::metrics {

/// Pre-FEC threshold for 7% overhead hard-decision FEC.
inline constexpr double kFecThresholdBer = 4.5e-3;

/// BER below which a zero-error count is reported as an error-free bound;
/// requires at least 1/kErrorFreeBoundBer counted bits.
inline constexpr double kErrorFreeBoundBer = 7e-6;

enum class BerClass { error_free_bound, below_fec, above_fec };

std::string to_string(BerClass c);

struct BerEntry {
  double ber = 0.0;
  std::size_t bits = 0;
  std::size_t errors = 0;
  BerClass classification = BerClass::below_fec;
};

/// Compare two bit sequences after discarding the first `skip` bits of each.
/// classification: error_free_bound needs zero errors over >= 1/7e-6 bits;
/// otherwise below_fec iff ber < 4.5e-3 (half-open boundary).
BerEntry count_ber(const BitSequence& decided, const BitSequence& reference,
                   std::size_t skip = 0);

/// RMS error magnitude over RMS reference magnitude, in percent.
double evm_percent(const std::vector<cd>& symbols,
                   const std::vector<cd>& reference);

/// Mode-dependent loss, 20*log10(sigma_max/sigma_min) of the matrix.
double mdl_from_matrix(const Eigen::MatrixXcd& m);

struct CapacityReport {
  double gross_bps = 0.0;
  double net_bps = 0.0;
  double fec_overhead = 0.0;
  double spectral_efficiency_bps_hz = 0.0;
  double grid_hz = 0.0;
};

/// gross = modes * baud * bits_per_symbol; net = gross / (1 + overhead).
CapacityReport net_capacity(int modes, double baud, int bits_per_symbol,
                            double fec_overhead, double grid_hz = 0.0);

double spectral_efficiency(double net_bps, double grid_hz);

}  // namespace mdmsim::metrics
