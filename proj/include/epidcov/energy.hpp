#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "epidcov/metric3.hpp"

namespace epidcov {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Population distribution over genotype pairs {0,1,2} x {0,1,2}.
struct Joint3x3 {
  Mat3 p{};
};

/// Sample counts over genotype pairs. Sufficient statistic for every
/// estimator in this library.
struct Contingency3x3 {
  std::array<std::array<std::uint32_t, 3>, 3> n{};

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : n)
      for (auto v : row) t += v;
    return t;
  }
  std::array<std::uint32_t, 3> row_margins() const {
    return {n[0][0] + n[0][1] + n[0][2], n[1][0] + n[1][1] + n[1][2],
            n[2][0] + n[2][1] + n[2][2]};
  }
  std::array<std::uint32_t, 3> col_margins() const {
    return {n[0][0] + n[1][0] + n[2][0], n[0][1] + n[1][1] + n[2][1],
            n[0][2] + n[1][2] + n[2][2]};
  }
  bool operator==(const Contingency3x3&) const = default;
};

Contingency3x3 transpose(const Contingency3x3& t);

/// Two equal-length genotype vectors, values in {0,1,2}.
struct PairedSample {
  std::vector<std::uint8_t> x, y;
};

Contingency3x3 count_table(const PairedSample& s);

/// Throws InvalidJoint unless entries are >= -1e-12 and sum to 1 within 1e-9.
void validate_joint(const Joint3x3& joint);

// ---------------------------------------------------------------------------
// Distance covariance. Everything below returns the UN-ROOTED quantity (the
// squared-dcov scale): the permutation test is invariant to monotone
// transforms of the statistic and the un-rooted form never produces NaN on
// tiny negative rounding.
// ---------------------------------------------------------------------------

/// Distances recentred by the marginal expected distances:
/// out[x][x'] = d(x,x') - a(x) - a(x') + D, with a(x) the expected distance
/// from x under `marginal` and D the expected distance between two
/// independent draws.
Mat3 doubly_centred(const Metric3& m, const std::array<double, 3>& marginal);

/// Bilinear contraction sum_{x,y,x',y'} dmu[x][x'] dnu[y][y'] w[x][y] w[x'][y'],
/// scaled by `scale`. With w = counts and scale = 1/n^2 this is the
/// table-based estimator; with w = probabilities and scale = 1 it is the
/// population value. Fixed summation order, so results are bit-reproducible.
double dcov_bilinear(const Mat3& dmu, const Mat3& dnu, const Mat3& w, double scale);

/// Population distance covariance of a 3x3 joint under the two metrics,
/// evaluated as the literal 81-term sum over pairs of support points.
/// Zero (up to rounding) exactly when the joint is the product of its
/// marginals.
double population_dcov(const Joint3x3& joint, const Metric3& mx, const Metric3& my);

/// Table-based estimator: equals population_dcov of the empirical
/// distribution counts/n. O(1) in n once the table is counted. This is the
/// primary fast path. Throws EmptyTable on a zero-count table.
double dcov_from_table(const Contingency3x3& table, const Metric3& mx, const Metric3& my);

/// O(n^2) double-centering estimator (1/n^2) sum_ij A_ij B_ij over the raw
/// sample. Reference implementation used as an oracle for the table path.
double dcov_naive(const PairedSample& s, const Metric3& mx, const Metric3& my);

/// Degree-6 V-statistic form of the same estimator: (1/n^6) times the sum of
/// the 6-argument product kernel over all index tuples. O(n^6); guarded to
/// n <= 10 (SampleTooLarge otherwise). Test oracle only.
double dcov_vstat(const PairedSample& s, const Metric3& mx, const Metric3& my);

/// dcov(X,Y)/sqrt(dcov(X,X) dcov(Y,Y)) from one table; nullopt when either
/// marginal distance variance is <= 1e-15 (constant margin, undefined ratio).
std::optional<double> dcor_from_table(const Contingency3x3& table, const Metric3& mx,
                                      const Metric3& my);

}  // namespace epidcov
