// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/modulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace mdmsim {

namespace {

// Per-axis Gray code for the 4-level axes of 16QAM: dibit -> amplitude.
constexpr double kQam16Levels[4] = {+3.0, +1.0, -3.0, -1.0};
// index = (b0<<1)|b1: 00 -> +3, 01 -> +1, 10 -> -3, 11 -> -1

unsigned axis_decide_qam16(double v) {
  // thresholds at 0 and +-2 (unnormalized axis)
  if (v >= 2.0) return 0u;  // +3 -> 00
  if (v >= 0.0) return 1u;  // +1 -> 01
  if (v >= -2.0) return 3u; // -1 -> 11
  return 2u;                // -3 -> 10
}

std::vector<cd> make_qpsk_points() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<cd> pts(4);
  for (unsigned v = 0; v < 4; ++v) {
    const double i = (v & 2u) ? -1.0 : 1.0;  // bit0
    const double q = (v & 1u) ? -1.0 : 1.0;  // bit1
    pts[v] = cd(i * s, q * s);
  }
  return pts;
}

std::vector<cd> make_qam16_points() {
  const double s = 1.0 / std::sqrt(10.0);
  std::vector<cd> pts(16);
  for (unsigned v = 0; v < 16; ++v) {
    const unsigned ibits = (v >> 2) & 3u;  // (b0,b1)
    const unsigned qbits = v & 3u;         // (b2,b3)
    pts[v] = cd(kQam16Levels[ibits] * s, kQam16Levels[qbits] * s);
  }
  return pts;
}

}  // namespace

ModulationFormat::ModulationFormat(std::string name, int bps,
                                   std::vector<cd> points)
    : name_(std::move(name)), bits_per_symbol_(bps), points_(std::move(points)) {}

const ModulationFormat& ModulationFormat::qpsk() {
  static const ModulationFormat fmt("qpsk", 2, make_qpsk_points());
  return fmt;
}

const ModulationFormat& ModulationFormat::qam16() {
  static const ModulationFormat fmt("qam16", 4, make_qam16_points());
  return fmt;
}

const ModulationFormat& ModulationFormat::from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "qpsk") return qpsk();
  if (lower == "qam16" || lower == "16qam") return qam16();
  throw std::invalid_argument("unknown modulation format: " + std::string(name));
}

unsigned ModulationFormat::decide(cd symbol) const {
  if (bits_per_symbol_ == 2) {
    unsigned v = 0;
    if (symbol.real() < 0.0) v |= 2u;
    if (symbol.imag() < 0.0) v |= 1u;
    return v;
  }
  // 16QAM: undo the 1/sqrt(10) scale, then slice each axis
  const double s = std::sqrt(10.0);
  const unsigned ibits = axis_decide_qam16(symbol.real() * s);
  const unsigned qbits = axis_decide_qam16(symbol.imag() * s);
  return (ibits << 2) | qbits;
}

}  // namespace mdmsim
