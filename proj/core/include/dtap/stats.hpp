#pragma once

#include <cstddef>
#include <span>

namespace dtap {

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // n - 1 denominator; 0 for n < 2
};

SampleStats sample_stats(std::span<const double> xs);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
  bool significant = false;
};

/// Welch's unequal-variance t-test of mean(a) vs mean(b). Both samples need
/// at least 2 values. With both variances zero, differing means give an
/// infinite |t| and p = 0, equal means give t = 0 and p = 1; dof is then
/// n_a + n_b - 2.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.01);

}  // namespace dtap
