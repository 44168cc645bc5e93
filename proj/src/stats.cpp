#include "capcom/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "capcom/errors.hpp"

namespace capcom::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientDataError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientDataError("variance needs at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson_r: length mismatch");
  if (xs.size() < 2) throw InsufficientDataError("pearson_r needs at least 2 points");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InsufficientDataError("pearson_r: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double student_t_sf(double t, double df) {
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

namespace {

TTestResult degenerate(double diff, double df) {
  TTestResult r;
  r.df = df;
  if (diff == 0.0) {
    r.t = 0.0;
    r.p_value = 0.5;
  } else {
    r.t = diff > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p_value = diff > 0 ? 0.0 : 1.0;
  }
  return r;
}

}  // namespace

TTestResult one_sample_t_greater(std::span<const double> xs, double mu) {
  if (xs.size() < 2) throw InsufficientDataError("one-sample t-test needs at least 2 values");
  const double n = static_cast<double>(xs.size());
  const double m = mean(xs);
  const double var = sample_variance(xs);
  if (var == 0.0) return degenerate(m - mu, n - 1);
  TTestResult r;
  r.df = n - 1;
  r.t = (m - mu) / std::sqrt(var / n);
  r.p_value = student_t_sf(r.t, r.df);
  return r;
}

TTestResult welch_t_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientDataError("Welch t-test needs at least 2 values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
  const double se2 = va + vb;
  if (se2 == 0.0) return degenerate(ma - mb, na + nb - 2);
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1) + vb * vb / (nb - 1));
  r.p_value = student_t_sf(r.t, r.df);
  return r;
}

}  // namespace capcom::stats
