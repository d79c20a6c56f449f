// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "mdmsim/errors.hpp"

namespace mdmsim::io {

namespace {

namespace fs = std::filesystem;

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

bool read_csv(const fs::path& path, Csv& out, bool labeled_header = false) {
  std::ifstream is(path);
  if (!is) return false;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      out.header = cells;
      first = false;
      if (!labeled_header) continue;
      continue;
    }
    out.rows.push_back(cells);
  }
  return !out.rows.empty();
}

double cell_d(const std::vector<std::string>& row, std::size_t i) {
  return std::stod(row.at(i));
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

class Svg {
 public:
  Svg(int width, int height) : w_(width), h_(height) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
             std::to_string(w_) + "\" height=\"" + std::to_string(h_) +
             "\" viewBox=\"0 0 " + std::to_string(w_) + " " +
             std::to_string(h_) + "\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
             num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& color) {
    body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) +
             "\" fill=\"" + color + "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "middle") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
             std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
             anchor + "\">" + s + "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color) {
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" points=\"";
    for (const auto& [x, y] : pts) body_ += num(x) + "," + num(y) + " ";
    body_ += "\"/>\n";
  }

  void save(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot write plot: " + path.string());
    os << body_ << "</svg>\n";
  }

 private:
  int w_, h_;
  std::string body_;
};

void plot_constellation(const fs::path& in, const fs::path& out,
                        const std::string& title) {
  Csv csv;
  if (!read_csv(in, csv)) return;
  Svg svg(360, 360);
  const double lim = 1.6;
  auto px = [&](double v) { return 180.0 + v / lim * 160.0; };
  auto py = [&](double v) { return 180.0 - v / lim * 160.0; };
  svg.line(px(-lim), py(0), px(lim), py(0), "#cccccc");
  svg.line(px(0), py(-lim), px(0), py(lim), "#cccccc");
  for (const auto& row : csv.rows)
    svg.circle(px(cell_d(row, 0)), py(cell_d(row, 1)), 1.0, "#1f4e8c");
  svg.text(180, 18, title, 13);
  svg.save(out);
}

void plot_ber(const fs::path& in, const fs::path& out) {
  Csv csv;
  if (!read_csv(in, csv)) return;
  // wavelength -> (mean, best, worst)
  std::map<double, std::vector<double>> by_wl;
  for (const auto& row : csv.rows) by_wl[cell_d(row, 0)].push_back(cell_d(row, 4));

  const double floor_ber = 1e-7;
  auto logber = [&](double b) { return std::log10(std::max(b, floor_ber)); };

  Svg svg(480, 360);
  const double x0 = 60, x1 = 450, y0 = 310, y1 = 40;
  const double lo = std::log10(floor_ber), hi = 0.0;
  double wl_min = by_wl.begin()->first, wl_max = by_wl.rbegin()->first;
  if (wl_max == wl_min) {
    wl_min -= 1.0;
    wl_max += 1.0;
  }
  auto px = [&](double wl) { return x0 + (wl - wl_min) / (wl_max - wl_min) * (x1 - x0); };
  auto py = [&](double lb) { return y0 + (lb - lo) / (hi - lo) * (y1 - y0); };

  svg.line(x0, y0, x1, y0, "#000000");
  svg.line(x0, y0, x0, y1, "#000000");
  for (int e = -7; e <= 0; ++e) {
    svg.line(x0 - 3, py(e), x0, py(e), "#000000");
    svg.text(x0 - 8, py(e) + 4, "1e" + std::to_string(e), 10, "end");
  }
  // FEC threshold marker
  svg.line(x0, py(std::log10(4.5e-3)), x1, py(std::log10(4.5e-3)), "#cc4444");
  svg.text(x1, py(std::log10(4.5e-3)) - 4, "FEC", 10, "end");

  std::vector<std::pair<double, double>> means;
  for (const auto& [wl, bers] : by_wl) {
    double mean = 0.0, best = 1.0, worst = 0.0;
    for (double b : bers) {
      mean += b;
      best = std::min(best, b);
      worst = std::max(worst, b);
    }
    mean /= static_cast<double>(bers.size());
    const double x = px(wl);
    svg.line(x, py(logber(best)), x, py(logber(worst)), "#777777");
    svg.circle(x, py(logber(mean)), 3.0, "#1f4e8c");
    means.push_back({x, py(logber(mean))});
    svg.text(x, y0 + 16, num(wl), 10);
  }
  svg.polyline(means, "#1f4e8c");
  svg.text(255, 20, "BER vs wavelength (bars: best/worst mode)", 12);
  svg.text(255, 340, "wavelength [nm]", 11);
  svg.save(out);
}

void plot_impulse(const fs::path& in, const fs::path& out) {
  Csv csv;
  if (!read_csv(in, csv)) return;
  Svg svg(480, 360);
  const double x0 = 60, x1 = 450, y0 = 310, y1 = 40;
  const double db_lo = -40.0, db_hi = 2.0;
  double lag_min = 1e300, lag_max = -1e300;
  for (const auto& row : csv.rows) {
    lag_min = std::min(lag_min, cell_d(row, 1));
    lag_max = std::max(lag_max, cell_d(row, 1));
  }
  auto px = [&](double lag) {
    return x0 + (lag - lag_min) / (lag_max - lag_min) * (x1 - x0);
  };
  auto py = [&](double db) {
    return y0 + (std::clamp(db, db_lo, db_hi) - db_lo) / (db_hi - db_lo) * (y1 - y0);
  };
  svg.line(x0, y0, x1, y0, "#000000");
  svg.line(x0, y0, x0, y1, "#000000");
  for (int db = -40; db <= 0; db += 10) {
    svg.line(x0 - 3, py(db), x0, py(db), "#000000");
    svg.text(x0 - 8, py(db) + 4, std::to_string(db), 10, "end");
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : csv.rows) pts.push_back({px(cell_d(row, 1)), py(cell_d(row, 2))});
  svg.polyline(pts, "#1f4e8c");
  svg.text(255, 20, "normalized intensity impulse response [dB]", 12);
  svg.text(255, 340, "lag [symbols]", 11);
  svg.save(out);
}

void plot_intensity(const fs::path& in, const fs::path& out) {
  Csv csv;
  if (!read_csv(in, csv, true)) return;
  const int n = static_cast<int>(csv.rows.size());
  if (n == 0) return;
  Svg svg(460, 420);
  const double x0 = 70, y0 = 50;
  const double cell = std::min(320.0 / n, 40.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double db = cell_d(csv.rows[static_cast<std::size_t>(r)],
                               static_cast<std::size_t>(c + 1));
      const double v = std::clamp((db + 40.0) / 40.0, 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      char color[16];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", shade, shade, 255);
      svg.rect(x0 + c * cell, y0 + r * cell, cell, cell, color);
    }
    svg.text(x0 - 6, y0 + r * cell + cell / 2 + 4,
             csv.rows[static_cast<std::size_t>(r)][0], 10, "end");
    svg.text(x0 + r * cell + cell / 2, y0 - 6,
             csv.rows[static_cast<std::size_t>(r)][0], 10);
  }
  svg.text(230, 24, "estimated intensity transfer matrix [dB, 0 = max]", 12);
  svg.text(230, y0 + n * cell + 24, "input mode", 11);
  svg.save(out);
}

}  // namespace

PlotReport emit_plots(const std::string& results_dir, const std::string& out_dir) {
  PlotReport report;
  const fs::path in(results_dir);
  const fs::path out(out_dir);
  fs::create_directories(out);

  // constellations
  std::vector<fs::path> constellations;
  if (fs::exists(in)) {
    for (const auto& entry : fs::directory_iterator(in)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("constellation_", 0) == 0 && entry.path().extension() == ".csv")
        constellations.push_back(entry.path());
    }
  }
  std::sort(constellations.begin(), constellations.end());
  if (constellations.empty()) {
    report.missing.push_back("constellation_*.csv");
  } else {
    for (const auto& path : constellations) {
      const std::string stem = path.stem().string();
      const fs::path target = out / (stem + ".svg");
      plot_constellation(path, target, stem.substr(std::string("constellation_").size()));
      report.written.push_back(target.string());
    }
  }

  if (fs::exists(in / "ber.csv")) {
    plot_ber(in / "ber.csv", out / "ber_vs_wavelength.svg");
    report.written.push_back((out / "ber_vs_wavelength.svg").string());
  } else {
    report.missing.push_back("ber.csv");
  }

  auto first_matching = [&](const std::string& prefix) -> fs::path {
    std::vector<fs::path> found;
    if (fs::exists(in)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv")
          found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    return found.empty() ? fs::path() : found.front();
  };

  const fs::path impulse = first_matching("impulse_");
  if (!impulse.empty()) {
    plot_impulse(impulse, out / "impulse_response.svg");
    report.written.push_back((out / "impulse_response.svg").string());
  } else {
    report.missing.push_back("impulse_*.csv");
  }

  const fs::path intensity = first_matching("intensity_");
  if (!intensity.empty()) {
    plot_intensity(intensity, out / "intensity_matrix.svg");
    report.written.push_back((out / "intensity_matrix.svg").string());
  } else {
    report.missing.push_back("intensity_*.csv");
  }

  return report;
}

}  // namespace mdmsim::io
