#include "epidcov/metric3.hpp"

#include <cmath>
#include <cstdio>

#include "epidcov/error.hpp"

namespace epidcov {

Metric3 make_metric(double d01, double d02, double d12) {
  if (!(d01 >= 0.0) || !(d02 >= 0.0) || !(d12 >= 0.0)) {
    fail(Errc::NegativeDistance, "metric distances must be nonnegative");
  }
  if (d01 == 0.0 && d02 == 0.0 && d12 == 0.0) {
    fail(Errc::FullyDegenerate, "all three distances are zero; every statistic would vanish");
  }
  if (d01 > d02 + d12 || d02 > d01 + d12 || d12 > d01 + d02) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "triangle inequality violated for (%g, %g, %g)", d01, d02,
                  d12);
    fail(Errc::TriangleViolation, buf);
  }
  return Metric3{d01, d02, d12};
}

Metric3 named_metric(MetricKind kind) {
  switch (kind) {
    case MetricKind::equilateral: return Metric3{1.0, 1.0, 1.0};
    case MetricKind::recessive: return Metric3{0.0, 1.0, 1.0};   // 0 = 1
    case MetricKind::heterozygous: return Metric3{1.0, 0.0, 1.0};  // 0 = 2
    case MetricKind::dominant: return Metric3{1.0, 1.0, 0.0};    // 1 = 2
    case MetricKind::euclidean: return Metric3{1.0, 2.0, 1.0};
  }
  fail(Errc::BadArgument, "unknown metric kind");
}

std::string metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::equilateral: return "equilateral";
    case MetricKind::recessive: return "recessive";
    case MetricKind::heterozygous: return "heterozygous";
    case MetricKind::dominant: return "dominant";
    case MetricKind::euclidean: return "euclidean";
  }
  return "?";
}

Metric3 parse_metric(const std::string& text) {
  if (text == "equilateral") return named_metric(MetricKind::equilateral);
  if (text == "recessive") return named_metric(MetricKind::recessive);
  if (text == "heterozygous") return named_metric(MetricKind::heterozygous);
  if (text == "dominant") return named_metric(MetricKind::dominant);
  if (text == "euclidean") return named_metric(MetricKind::euclidean);
  const std::string prefix = "custom:";
  if (text.rfind(prefix, 0) == 0) {
    double d01 = 0, d02 = 0, d12 = 0;
    char tail = 0;
    const int got =
        std::sscanf(text.c_str() + prefix.size(), "%lf,%lf,%lf%c", &d01, &d02, &d12, &tail);
    if (got != 3) fail(Errc::BadArgument, "expected custom:D01,D02,D12 with decimal literals");
    return make_metric(d01, d02, d12);
  }
  fail(Errc::BadArgument,
       "unknown metric '" + text +
           "' (use equilateral|recessive|heterozygous|dominant|euclidean or custom:D01,D02,D12)");
}

std::array<std::array<double, 3>, 3> distance_table(const Metric3& m) {
  return {{{0.0, m.d01, m.d02}, {m.d01, 0.0, m.d12}, {m.d02, m.d12, 0.0}}};
}

std::array<std::array<double, 2>, 3> sqrt_embedding(const Metric3& m) {
  // Work in the square-root space: side lengths e01 = sqrt(d01) etc. The
  // root transform preserves the triangle inequality, so the construction
  // below never needs a feasibility check beyond clamping rounding noise.
  const double e01 = std::sqrt(m.d01);
  std::array<std::array<double, 2>, 3> pts{};
  pts[0] = {0.0, 0.0};
  pts[1] = {e01, 0.0};
  if (e01 == 0.0) {
    // First two genotypes coincide; the third sits on the x axis.
    pts[2] = {std::sqrt(m.d02), 0.0};
    return pts;
  }
  const double x = (m.d01 + m.d02 - m.d12) / (2.0 * e01);
  const double y2 = m.d02 - x * x;
  pts[2] = {x, y2 > 0.0 ? std::sqrt(y2) : 0.0};
  return pts;
}

}  // namespace epidcov
