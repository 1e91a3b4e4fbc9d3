#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "epidcov/energy.hpp"
#include "epidcov/rng.hpp"

namespace epidcov {

struct PermutationPlan {
  std::uint32_t resamples = 1;  // B
  std::uint64_t seed = 0;
};

struct PermTestResult {
  double statistic = 0.0;  // observed un-rooted dcov
  double pvalue = 1.0;     // (1 + #{permuted >= observed}) / (B + 1)
  std::uint32_t resamples = 0;
  std::uint64_t n = 0;
};

/// Resample budget as a function of sample size: 200 + floor(5000/n).
std::uint32_t default_resamples(std::uint64_t n);

/// Draws contingency tables with both margins fixed, distributed exactly as
/// the count table of a uniformly random permutation pairing of the two
/// margin multisets. Sequential conditional hypergeometric draws; O(1)
/// memory per draw beyond a reusable scratch buffer. The first draw's
/// distribution never changes, so its inverse CDF is cached on construction.
class NullTableSampler {
public:
  NullTableSampler(const std::array<std::uint32_t, 3>& row_counts,
                   const std::array<std::uint32_t, 3>& col_counts);

  Contingency3x3 draw(Xoshiro256ss& rng);

  std::uint64_t total() const { return total_; }

private:
  std::array<std::uint32_t, 3> rows_, cols_;
  std::uint64_t total_;
  std::vector<double> cdf0_;  // inverse CDF of cell (0,0)
  std::uint32_t k0_min_ = 0;
  std::vector<double> scratch_;
};

/// One-shot draw with the sampler above. Throws MarginMismatch when the two
/// margin totals differ or are zero.
Contingency3x3 sample_null_table(const std::array<std::uint32_t, 3>& row_counts,
                                 const std::array<std::uint32_t, 3>& col_counts,
                                 Xoshiro256ss& rng);

/// Draw from Hypergeometric(pop, succ, draws): number of successes when
/// `draws` items are taken without replacement from a population of `pop`
/// containing `succ` successes. Inverse CDF over a mode-anchored pmf
/// recurrence; only elementary float ops, so draws are reproducible across
/// platforms. `scratch` is caller-provided working space.
std::uint32_t hypergeometric_draw(std::uint64_t pop, std::uint64_t succ, std::uint64_t draws,
                                  Xoshiro256ss& rng, std::vector<double>& scratch);

/// Permutation test of independence for one ternary pair. The observed
/// statistic is the table dcov; the null distribution is approximated by
/// `plan.resamples` fixed-margin resamples. Ties count toward the permuted
/// side, and the add-one p-value takes values k/(B+1), k = 1..B+1.
/// Throws DegenerateMargin when a margin puts all mass on one genotype.
PermTestResult permutation_test(const Contingency3x3& table, const Metric3& mx,
                                const Metric3& my, const PermutationPlan& plan);

}  // namespace epidcov
