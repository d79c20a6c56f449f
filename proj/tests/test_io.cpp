// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mdmsim/config.hpp"
#include "mdmsim/errors.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/waveform_io.hpp"

using namespace mdmsim;
using namespace mdmsim::io;

TEST_CASE("config round trip is exact") {
  ExperimentConfig cfg;
  cfg.format = "qpsk";
  cfg.wavelengths_nm = {1530.5, 1545.25};
  cfg.launch_power_db = {0, 0, 0, 0, 0, 0, 0, 0, -1.5, 0, 0.25};
  cfg.echo_delay_symbols = {5};
  cfg.echo_level_db = {-20};
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.seed = 1234567890123ULL;

  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.format == "qpsk");
  CHECK(back.seed == 1234567890123ULL);
  CHECK(back.wavelengths_nm == cfg.wavelengths_nm);
  CHECK(std::isinf(back.snr_db));
}

TEST_CASE("defaults reproduce the flagship scenario") {
  const ExperimentConfig cfg;
  CHECK(cfg.modes == 11);
  CHECK(cfg.baud_hz == doctest::Approx(30e9));
  CHECK(cfg.rolloff == doctest::Approx(0.01));
  CHECK(cfg.num_taps == 512);
  CHECK(cfg.wavelengths_nm.size() == 7);
  CHECK(cfg.wavelengths_nm.front() == doctest::Approx(1530.0));
  CHECK(cfg.wavelengths_nm.back() == doctest::Approx(1560.0));
  CHECK(cfg.training_symbols == 32768);
  CHECK(cfg.payload_symbols == 131072);
  cfg.validate();
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config("[signal]\nfrequency = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[nonsense]\nformat = qpsk\n"), ParseError);
  CHECK_THROWS_AS(parse_config("format = qpsk\n"), ParseError);  // no section
  CHECK_THROWS_AS(parse_config("[signal]\nbaud_hz value\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[signal]\nbaud_hz = fast\n"), ParseError);
}

TEST_CASE("config validation rejects inconsistent setups") {
  ExperimentConfig cfg;
  cfg.format = "qam32";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = ExperimentConfig{};
  cfg.training_symbols = 100;  // < 2 * num_taps
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = ExperimentConfig{};
  cfg.echo_delay_symbols = {5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = ExperimentConfig{};
  cfg.source = "file";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("schema names every key") {
  const std::string schema = config_schema();
  const ExperimentConfig cfg;
  const std::string serialized = serialize_config(cfg);
  // every serialized key appears in the schema text
  std::stringstream ss(serialized);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    CHECK(schema.find("  " + key + "  ") != std::string::npos);
  }
}

TEST_CASE("waveform binary round trip") {
  Rng rng(5);
  std::vector<Waveform> channels(2);
  for (auto& ch : channels) {
    ch.sample_rate = 40e9;
    ch.samples.resize(5000);
    for (auto& s : ch.samples) s = rng.complex_normal();
  }
  const std::string path = "/tmp/mdmsim_wf_test.bin";
  save_waveforms(path, channels);
  const auto back = load_waveforms(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].sample_rate == 40e9);
  CHECK(back[0].samples == channels[0].samples);
  CHECK(back[1].samples == channels[1].samples);

  // header layout: magic + version + rate + channels + count
  std::ifstream is(path, std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  CHECK(std::string(magic, 8) == "MDMSIMWF");

  {
    std::ofstream os("/tmp/mdmsim_wf_bad.bin", std::ios::binary);
    os << "NOTAFILE";
  }
  CHECK_THROWS_AS(load_waveforms("/tmp/mdmsim_wf_bad.bin"), ParseError);
}
