// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mdmsim/errors.hpp"
#include "mdmsim/metrics.hpp"
#include "mdmsim/rng.hpp"
#include "mdmsim/channel.hpp"

using namespace mdmsim;
using namespace mdmsim::metrics;

namespace {

// SVD oracle that avoids Eigen's SVD: largest/smallest singular values via
// power iteration on A^H A and on (lmax I - A^H A).
std::pair<double, double> svd_extremes_oracle(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd g = a.adjoint() * a;
  const int n = static_cast<int>(g.rows());
  Rng rng(123);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
  v.normalize();
  double lmax = 0.0;
  for (int it = 0; it < 3000; ++it) {
    v = g * v;
    lmax = v.norm();
    v /= lmax;
  }
  Eigen::MatrixXcd shifted = lmax * Eigen::MatrixXcd::Identity(n, n) - g;
  Eigen::VectorXcd u(n);
  for (int i = 0; i < n; ++i) u(i) = rng.complex_normal();
  u.normalize();
  double mu = 0.0;
  for (int it = 0; it < 6000; ++it) {
    u = shifted * u;
    mu = u.norm();
    u /= mu;
  }
  const double lmin = lmax - mu;
  return {std::sqrt(lmax), std::sqrt(std::max(lmin, 0.0))};
}

}  // namespace

TEST_CASE("count_ber classification") {
  BitSequence a(200000, 0), b(200000, 0);
  auto entry = count_ber(a, b);
  CHECK(entry.ber == 0.0);
  CHECK(entry.classification == BerClass::error_free_bound);

  BitSequence c(10000, 0), d(10000, 0);
  d[17] = 1;
  entry = count_ber(c, d);
  CHECK(entry.ber == doctest::Approx(1e-4));
  CHECK(entry.classification == BerClass::below_fec);

  BitSequence e(10000, 0), f(10000, 0);
  for (std::size_t i = 0; i < 50; ++i) f[i * 199] = 1;  // 5e-3
  entry = count_ber(e, f);
  CHECK(entry.ber == doctest::Approx(5e-3));
  CHECK(entry.classification == BerClass::above_fec);

  // zero errors over too few bits cannot claim the error-free bound
  BitSequence g(1000, 0);
  entry = count_ber(g, g);
  CHECK(entry.classification == BerClass::below_fec);

  // symmetric in its two sequences
  const auto fwd = count_ber(c, d);
  const auto rev = count_ber(d, c);
  CHECK(fwd.errors == rev.errors);

  BitSequence short_seq(10, 0);
  CHECK_THROWS_AS(count_ber(short_seq, g), std::invalid_argument);
}

TEST_CASE("count_ber with skip") {
  BitSequence a(1000, 0), b(1000, 0);
  for (std::size_t i = 0; i < 100; ++i) b[i] = 1;  // all errors in the prefix
  const auto entry = count_ber(a, b, 100);
  CHECK(entry.errors == 0);
  CHECK(entry.bits == 900);
}

TEST_CASE("evm") {
  std::vector<cd> ref(1000, cd(1.0, 0.0));
  CHECK(evm_percent(ref, ref) == doctest::Approx(0.0));

  std::vector<cd> off(ref);
  for (auto& s : off) s += cd(0.1, 0.0);
  CHECK(evm_percent(off, ref) == doctest::Approx(10.0));

  // AWGN at 20 dB SNR -> EVM 10% +- 0.5 over 1e5 symbols
  Rng rng(5);
  std::vector<cd> noisy(100000, cd(1.0, 0.0)), clean(100000, cd(1.0, 0.0));
  const double sigma = std::sqrt(std::pow(10.0, -20.0 / 10.0));
  for (auto& s : noisy) s += sigma * rng.complex_normal();
  CHECK(evm_percent(noisy, clean) == doctest::Approx(10.0).epsilon(0.05));

  std::vector<cd> empty;
  CHECK_THROWS_AS(evm_percent(empty, empty), std::invalid_argument);
}

TEST_CASE("mdl from matrix") {
  // unitary -> 0 dB
  Eigen::MatrixXcd u(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  u << cd(s, 0), cd(0, s), cd(0, s), cd(s, 0);
  CHECK(mdl_from_matrix(u) == doctest::Approx(0.0).epsilon(1e-9));

  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = std::pow(10.0, -7.0 / 20.0);
  CHECK(mdl_from_matrix(d) == doctest::Approx(7.0).epsilon(1e-9));

  Eigen::MatrixXcd sing = Eigen::MatrixXcd::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(mdl_from_matrix(sing), SingularChannelError);

  // default synthesized 11x11 link vs power-iteration SVD oracle
  const auto profile = channel::default_crosstalk_profile(11);
  const auto tm = channel::synthesize_transfer_matrix(profile, 1550.0, 9);
  const double mdl = mdl_from_matrix(tm.field);
  const auto [smax, smin] = svd_extremes_oracle(tm.field);
  const double oracle = 20.0 * std::log10(smax / smin);
  CHECK(std::abs(mdl - oracle) < 1.0);
}

TEST_CASE("mdl invariant under unitary factors") {
  const auto profile = channel::default_crosstalk_profile(4);
  const auto tm = channel::synthesize_transfer_matrix(profile, 1550.0, 3);
  // build a 4x4 unitary from a DFT matrix
  const int n = 4;
  Eigen::MatrixXcd w(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double phi = -2.0 * M_PI * r * c / n;
      w(r, c) = cd(std::cos(phi), std::sin(phi)) / std::sqrt(static_cast<double>(n));
    }
  const double a = mdl_from_matrix(tm.field);
  const double b = mdl_from_matrix(w * tm.field);
  const double c = mdl_from_matrix(tm.field * w.adjoint());
  CHECK(std::abs(a - b) < 1e-9);
  CHECK(std::abs(a - c) < 1e-9);
}

TEST_CASE("capacity arithmetic") {
  const auto report = net_capacity(11, 30e9, 4, 0.07, 33e9);
  CHECK(report.gross_bps == doctest::Approx(1.320e12));
  CHECK(report.net_bps == doctest::Approx(1.2336e12).epsilon(1e-4));
  // rounds to the 1.23 Tb/s headline
  CHECK(std::round(report.net_bps / 1e10) / 100.0 == doctest::Approx(1.23));
  CHECK(report.spectral_efficiency_bps_hz == doctest::Approx(37.38).epsilon(1e-3));

  const auto unit = net_capacity(1, 1.0, 1, 0.0);
  CHECK(unit.net_bps == doctest::Approx(1.0));

  const auto qpsk = net_capacity(11, 30e9, 2, 0.07);
  CHECK(qpsk.net_bps == doctest::Approx(6.168e11).epsilon(1e-3));
  CHECK(spectral_efficiency(qpsk.net_bps, 33e9) == doctest::Approx(18.69).epsilon(1e-3));

  CHECK(spectral_efficiency(33e9, 33e9) == doctest::Approx(1.0));
  CHECK_THROWS_AS(spectral_efficiency(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("net_capacity is linear in its factors") {
  const auto base = net_capacity(3, 10e9, 2, 0.07);
  CHECK(net_capacity(6, 10e9, 2, 0.07).net_bps == doctest::Approx(2.0 * base.net_bps));
  CHECK(net_capacity(3, 20e9, 2, 0.07).net_bps == doctest::Approx(2.0 * base.net_bps));
  CHECK(net_capacity(3, 10e9, 4, 0.07).net_bps == doctest::Approx(2.0 * base.net_bps));
}
