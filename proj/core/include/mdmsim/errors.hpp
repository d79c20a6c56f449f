// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mdmsim {

/// Malformed input file. Carries the offending location when known
/// (row/col are 1-based, -1 when not applicable).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int row = -1, int col = -1)
      : std::runtime_error(what), row_(row), col_(col) {}
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

/// Correlation peak below threshold while locating a TDM slot or frame.
class SyncError : public std::runtime_error {
 public:
  SyncError(const std::string& what, int slot, double peak)
      : std::runtime_error(what), slot_(slot), peak_(peak) {}
  int slot() const { return slot_; }
  double peak() const { return peak_; }

 private:
  int slot_;
  double peak_;
};

/// Two correlation peaks too close to call (within 1 dB).
class SyncAmbiguityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive filter blew up. Carries the per-block MSE trace for diagnosis.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> mse_history)
      : std::runtime_error(what), mse_history_(std::move(mse_history)) {}
  const std::vector<double>& mse_history() const { return mse_history_; }

 private:
  std::vector<double> mse_history_;
};

class EstimateUnreliableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requires a converged equalizer state.
class StaleStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// TDM slots overlap beyond the configured guard.
class OverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gate window too short to carry a usable burst.
class DegenerateWindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdmsim
