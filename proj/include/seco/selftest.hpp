#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "seco/numerics.hpp"

namespace seco {

/// Central finite differences of f at x, one coordinate at a time.
std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double step = 1e-5);

/// max_i |a_i - b_i| / max(1, |b_i|).
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Finite-difference checks of every loss gradient and the encoder chain,
/// the reservoir FIFO oracle, the rectification oracle, and a prototype norm
/// sweep. trials controls the number of random seeds per gradient check.
/// inject_fault perturbs the named check's analytic gradient; it exists so
/// the harness itself can be tested.
std::vector<CheckResult> run_selftest(std::ostream& out, int trials = 20,
                                      const std::string& inject_fault = "");

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace seco
