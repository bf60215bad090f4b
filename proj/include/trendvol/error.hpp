#pragma once

#include <stdexcept>
#include <string>

namespace trendvol {

/// Malformed or inconsistent input data (CSV rows, misaligned dates, gaps).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No (dt, k) cell satisfies the feasibility and sample-count constraints.
class InfeasibleScheme : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss. `last_finite_epoch` is -1 when the
/// very first epoch diverged.
class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(const std::string& what, int last_finite_epoch)
      : std::runtime_error(what), last_finite_epoch_(last_finite_epoch) {}
  int last_finite_epoch() const noexcept { return last_finite_epoch_; }

 private:
  int last_finite_epoch_;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trendvol
