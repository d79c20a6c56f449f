// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mdmsim/types.hpp"

namespace mdmsim {

// Gray-mapped constellations with unit mean power. Bit-to-symbol maps are
// fixed project-wide constants so that bit error rates are comparable across
// runs and implementations:
//   QPSK : bit0 -> I, bit1 -> Q, level map {0 -> +1, 1 -> -1}, scaled 1/sqrt(2)
//   16QAM: bits (b0,b1) -> I, (b2,b3) -> Q, per-axis Gray levels
//          {00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3}, scaled 1/sqrt(10)
class ModulationFormat {
 public:
  static const ModulationFormat& qpsk();
  static const ModulationFormat& qam16();

  /// Lookup by name ("qpsk" or "qam16", case-insensitive).
  static const ModulationFormat& from_name(std::string_view name);

  const std::string& name() const { return name_; }
  int bits_per_symbol() const { return bits_per_symbol_; }

  /// Constellation indexed by symbol value, MSB-first bit packing.
  const std::vector<cd>& constellation() const { return points_; }

  cd map(unsigned value) const { return points_[value]; }

  /// Nearest constellation point by per-axis slicing.
  unsigned decide(cd symbol) const;

 private:
  ModulationFormat(std::string name, int bps, std::vector<cd> points);

  std::string name_;
  int bits_per_symbol_;
  std::vector<cd> points_;
};

/// Complex symbol sequence at a given baud rate.
struct SymbolFrame {
  std::vector<cd> symbols;
  const ModulationFormat* format = nullptr;
  double baud = 0.0;  // symbols/s

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
};

}  // namespace mdmsim
