// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/types.hpp"

namespace mdmsim {

double mean_power(const std::vector<cd>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const cd s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

std::string mode_label(int mode) { return "TE" + std::to_string(mode); }

int mode_from_label(const std::string& label) {
  if (label.size() < 3 || (label[0] != 'T' && label[0] != 't') ||
      (label[1] != 'E' && label[1] != 'e')) {
    return -1;
  }
  try {
    return std::stoi(label.substr(2));
  } catch (...) {
    return -1;
  }
}

}  // namespace mdmsim
