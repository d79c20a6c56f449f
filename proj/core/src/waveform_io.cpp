// SPDX-License-Identifier: Apache-2.0
#include "mdmsim/waveform_io.hpp"

#include <cstring>
#include <fstream>

#include "mdmsim/errors.hpp"

namespace mdmsim::io {

namespace {

constexpr char kMagic[8] = {'M', 'D', 'M', 'S', 'I', 'M', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParseError("waveform file truncated");
  return value;
}

}  // namespace

void save_waveforms(const std::string& path, const std::vector<Waveform>& channels) {
  if (channels.empty()) throw std::invalid_argument("save_waveforms: no channels");
  const std::size_t n = channels.front().size();
  const double fs = channels.front().sample_rate;
  for (const auto& ch : channels) {
    if (ch.size() != n || ch.sample_rate != fs)
      throw std::invalid_argument("save_waveforms: channels must share length and rate");
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, fs);
  put(os, static_cast<std::uint32_t>(channels.size()));
  put(os, static_cast<std::uint64_t>(n));
  for (std::size_t t = 0; t < n; ++t) {
    for (const auto& ch : channels) {
      put(os, ch.samples[t].real());
      put(os, ch.samples[t].imag());
    }
  }
  if (!os) throw ParseError("write failed: " + path);
}

std::vector<Waveform> load_waveforms(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open: " + path);

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a waveform file: " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion)
    throw ParseError("unsupported waveform file version " + std::to_string(version));
  const auto fs = get<double>(is);
  const auto channels = get<std::uint32_t>(is);
  const auto count = get<std::uint64_t>(is);
  if (channels == 0) throw ParseError("waveform file has zero channels");

  std::vector<Waveform> out(channels);
  for (auto& ch : out) {
    ch.sample_rate = fs;
    ch.samples.resize(count);
  }
  for (std::uint64_t t = 0; t < count; ++t) {
    for (std::uint32_t c = 0; c < channels; ++c) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      out[c].samples[t] = cd(re, im);
    }
  }
  return out;
}

}  // namespace mdmsim::io
