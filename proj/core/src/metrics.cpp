// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/metrics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "mdmsim/errors.hpp"

namespace mdmsim::metrics {

std::string to_string(BerClass c) {
  switch (c) {
    case BerClass::error_free_bound: return "error_free_bound";
    case BerClass::below_fec: return "below_fec";
    case BerClass::above_fec: return "above_fec";
  }
  return "?";
}

BerEntry count_ber(const BitSequence& decided, const BitSequence& reference,
                   std::size_t skip) {
  if (decided.size() != reference.size())
    throw std::invalid_argument("count_ber: length mismatch");
  if (skip >= decided.size())
    throw std::invalid_argument("count_ber: skip exceeds sequence length");

  BerEntry entry;
  entry.bits = decided.size() - skip;
  for (std::size_t i = skip; i < decided.size(); ++i) {
    entry.errors += (decided[i] != reference[i]) ? 1u : 0u;
  }
  entry.ber = static_cast<double>(entry.errors) / static_cast<double>(entry.bits);

  const auto bound_bits =
      static_cast<std::size_t>(std::ceil(1.0 / kErrorFreeBoundBer));
  if (entry.errors == 0 && entry.bits >= bound_bits) {
    entry.classification = BerClass::error_free_bound;
  } else if (entry.ber < kFecThresholdBer) {
    entry.classification = BerClass::below_fec;
  } else {
    entry.classification = BerClass::above_fec;
  }
  return entry;
}

double evm_percent(const std::vector<cd>& symbols,
                   const std::vector<cd>& reference) {
  if (symbols.empty() || symbols.size() != reference.size())
    throw std::invalid_argument("evm_percent: empty or mismatched inputs");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    err += std::norm(symbols[i] - reference[i]);
    ref += std::norm(reference[i]);
  }
  if (ref == 0.0) throw std::invalid_argument("evm_percent: zero reference power");
  return 100.0 * std::sqrt(err / ref);
}

double mdl_from_matrix(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("mdl_from_matrix: matrix must be square");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0)
    throw SingularChannelError("mdl_from_matrix: channel is singular");
  return 20.0 * std::log10(smax / smin);
}

CapacityReport net_capacity(int modes, double baud, int bits_per_symbol,
                            double fec_overhead, double grid_hz) {
  if (modes <= 0 || baud <= 0.0 || bits_per_symbol <= 0 || fec_overhead < 0.0)
    throw std::invalid_argument("net_capacity: arguments must be positive");
  CapacityReport report;
  report.gross_bps = static_cast<double>(modes) * baud * bits_per_symbol;
  report.fec_overhead = fec_overhead;
  report.net_bps = report.gross_bps / (1.0 + fec_overhead);
  report.grid_hz = grid_hz;
  if (grid_hz > 0.0)
    report.spectral_efficiency_bps_hz = spectral_efficiency(report.net_bps, grid_hz);
  return report;
}

double spectral_efficiency(double net_bps, double grid_hz) {
  if (grid_hz <= 0.0)
    throw std::invalid_argument("spectral_efficiency: grid_hz must be > 0");
  return net_bps / grid_hz;
}

}  // namespace mdmsim::metrics
