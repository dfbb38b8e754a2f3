#include "dtap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace dtap {

SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  if (s.n == 0) return s;
  // Two-pass for accuracy on large offsets.
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0, comp = 0.0;
    for (double x : xs) {
      ss += (x - s.mean) * (x - s.mean);
      comp += x - s.mean;
    }
    ss -= comp * comp / static_cast<double>(s.n);
    s.std_dev = std::sqrt(std::max(0.0, ss) / static_cast<double>(s.n - 1));
  }
  return s;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test needs at least 2 values per sample");
  const auto sa = sample_stats(a);
  const auto sb = sample_stats(b);
  const double va = sa.std_dev * sa.std_dev / static_cast<double>(sa.n);
  const double vb = sb.std_dev * sb.std_dev / static_cast<double>(sb.n);
  const double diff = sa.mean - sb.mean;

  WelchResult r;
  if (va + vb == 0.0) {
    r.dof = static_cast<double>(sa.n + sb.n - 2);
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
  } else {
    r.t = diff / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) /
            (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
    const boost::math::students_t dist(r.dof);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.p = std::min(1.0, r.p);
  }
  r.significant = r.p < alpha;
  return r;
}

}  // namespace dtap
