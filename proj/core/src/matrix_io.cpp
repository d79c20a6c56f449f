// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "mdmsim/channel.hpp"
#include "mdmsim/errors.hpp"
#include "mdmsim/rng.hpp"

// Matrix CSV schema: an optional leading comment line carrying the
// wavelength, a header row of mode labels, then one labeled row per output
// mode with intensity entries in dB.
//
//   # wavelength_nm = 1550
//   ,TE0,TE1,...
//   TE0,-0.21,-35.5,...

namespace mdmsim::channel {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

TransferMatrix load_transfer_matrix(const std::string& path,
                                    std::uint64_t phase_seed, PhaseMode phases) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);

  TransferMatrix tm;
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_labels;

  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto pos = t.find("wavelength_nm");
      if (pos != std::string::npos) {
        const auto eq = t.find('=', pos);
        if (eq != std::string::npos) {
          try {
            tm.wavelength_nm = std::stod(t.substr(eq + 1));
          } catch (...) {
            throw ParseError("bad wavelength in header comment", lineno, 1);
          }
        }
      }
      continue;
    }
    auto cells = split_csv(t);
    if (header.empty()) {
      if (cells.size() < 2 || !trim(cells[0]).empty())
        throw ParseError("expected header row ',TE0,TE1,...'", lineno, 1);
      header.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != header.size() + 1)
      throw ParseError("row has " + std::to_string(cells.size() - 1) +
                           " entries, expected " + std::to_string(header.size()),
                       lineno, static_cast<int>(cells.size()));
    row_labels.push_back(trim(cells[0]));
    std::vector<double> vals;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        const double v = std::stod(cells[c]);
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        vals.push_back(v);
      } catch (...) {
        throw ParseError("bad intensity entry '" + trim(cells[c]) + "'", lineno,
                         static_cast<int>(c + 1));
      }
    }
    rows.push_back(std::move(vals));
  }
  if (header.empty()) throw ParseError("no header row in " + path);
  if (rows.size() != header.size())
    throw ParseError("matrix is not square: " + std::to_string(rows.size()) +
                     " rows vs " + std::to_string(header.size()) + " columns");

  const int n = static_cast<int>(header.size());
  tm.field.resize(n, n);
  Rng rng(phase_seed);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double mag = std::pow(10.0, rows[static_cast<std::size_t>(r)]
                                            [static_cast<std::size_t>(c)] / 20.0);
      double phase = 0.0;
      if (phases == PhaseMode::random) phase = rng.uniform(0.0, 2.0 * kPi);
      tm.field(r, c) = mag * cd(std::cos(phase), std::sin(phase));
    }
  }
  return tm;
}

void save_transfer_matrix(const std::string& path, const TransferMatrix& m) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  const int n = m.modes();
  const Eigen::MatrixXd idb = m.intensity_db();

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", m.wavelength_nm);
  os << "# wavelength_nm = " << buf << "\n";
  for (int c = 0; c < n; ++c) os << "," << mode_label(c);
  os << "\n";
  for (int r = 0; r < n; ++r) {
    os << mode_label(r);
    for (int c = 0; c < n; ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g", idb(r, c));
      os << "," << buf;
    }
    os << "\n";
  }
  if (!os) throw ParseError("write failed: " + path);
}

}  // namespace mdmsim::channel
