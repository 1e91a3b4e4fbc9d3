#pragma once

// Small numeric helpers shared by QC tests and the test suites:
// chi-square tail probabilities and binomial tails. Nothing here is
// performance critical.

#include <cmath>
#include <cstdint>

namespace epidcov {

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
/// Series for x < a+1, continued fraction otherwise.
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

/// Upper-tail probability of a chi-square variable with df degrees of freedom.
inline double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  if (df == 1.0) return std::erfc(std::sqrt(x * 0.5));
  return gamma_q(df * 0.5, x * 0.5);
}

inline double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// One-sided binomial tail P(X >= k) for X ~ Binomial(n, p).
inline double binom_sf_ge(std::int64_t k, std::int64_t n, double p) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double sum = 0.0;
  for (std::int64_t i = k; i <= n; ++i) {
    sum += std::exp(lchoose(static_cast<double>(n), static_cast<double>(i)) +
                    static_cast<double>(i) * lp + static_cast<double>(n - i) * lq);
  }
  return sum < 1.0 ? sum : 1.0;
}

}  // namespace epidcov
