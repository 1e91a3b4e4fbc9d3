#pragma once

#include <array>
#include <string>

namespace epidcov {

/// A pseudometric on the genotype set {0,1,2}, given by the three pairwise
/// distances. Degenerate spaces (one zero distance, two genotypes collapsed)
/// are allowed; the all-zero space is not.
struct Metric3 {
  double d01 = 1.0;
  double d02 = 1.0;
  double d12 = 1.0;
};

enum class MetricKind { equilateral, recessive, heterozygous, dominant, euclidean };

/// Validates (nonnegativity, triangle inequalities, not fully degenerate)
/// and returns the metric. Throws NegativeDistance / TriangleViolation /
/// FullyDegenerate.
Metric3 make_metric(double d01, double d02, double d12);

Metric3 named_metric(MetricKind kind);

/// Parses the CLI syntax: a named metric or "custom:D01,D02,D12".
Metric3 parse_metric(const std::string& text);

std::string metric_kind_name(MetricKind kind);

/// 3x3 symmetric distance table with zero diagonal.
std::array<std::array<double, 3>, 3> distance_table(const Metric3& m);

/// Plants the three genotypes in the plane so that the pairwise Euclidean
/// distances are the square roots of (d01, d02, d12). Canonical orientation:
/// first point at the origin, second on the nonnegative x axis, third with
/// y >= 0. The square root of a valid 3-point pseudometric always embeds.
std::array<std::array<double, 2>, 3> sqrt_embedding(const Metric3& m);

}  // namespace epidcov
