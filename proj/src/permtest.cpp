#include "epidcov/permtest.hpp"

#include <algorithm>
#include <cstdint>

#include "epidcov/error.hpp"

namespace epidcov {

std::uint32_t default_resamples(std::uint64_t n) {
  if (n == 0) fail(Errc::BadArgument, "sample size must be positive");
  return static_cast<std::uint32_t>(200 + 5000 / n);
}

namespace {

// Unnormalized pmf over the support [k_min, k_max], anchored at the mode so
// that the recurrence only ever scales downward (no overflow for any
// population size). Returns the support offset; scratch holds the weights.
std::uint32_t hypergeometric_pmf(std::uint64_t pop, std::uint64_t succ, std::uint64_t draws,
                                 std::vector<double>& scratch) {
  const std::uint64_t k_min = (draws + succ > pop) ? draws + succ - pop : 0;
  const std::uint64_t k_max = std::min(succ, draws);
  const std::size_t len = static_cast<std::size_t>(k_max - k_min + 1);
  scratch.assign(len, 0.0);
  std::uint64_t mode = ((draws + 1) * (succ + 1)) / (pop + 2);
  mode = std::clamp(mode, k_min, k_max);
  scratch[mode - k_min] = 1.0;
  // p(k+1)/p(k) = (succ-k)(draws-k) / ((k+1)(pop-succ-draws+k+1))
  for (std::uint64_t k = mode; k < k_max; ++k) {
    const double num = static_cast<double>(succ - k) * static_cast<double>(draws - k);
    const double den =
        static_cast<double>(k + 1) * static_cast<double>(pop - succ - draws + k + 1);
    scratch[k + 1 - k_min] = scratch[k - k_min] * (num / den);
  }
  for (std::uint64_t k = mode; k > k_min; --k) {
    const double num =
        static_cast<double>(k) * static_cast<double>(pop - succ - draws + k);
    const double den =
        static_cast<double>(succ - k + 1) * static_cast<double>(draws - k + 1);
    scratch[k - 1 - k_min] = scratch[k - k_min] * (num / den);
  }
  return static_cast<std::uint32_t>(k_min);
}

}  // namespace

std::uint32_t hypergeometric_draw(std::uint64_t pop, std::uint64_t succ, std::uint64_t draws,
                                  Xoshiro256ss& rng, std::vector<double>& scratch) {
  const std::uint64_t k_min = (draws + succ > pop) ? draws + succ - pop : 0;
  const std::uint64_t k_max = std::min(succ, draws);
  if (k_min == k_max) return static_cast<std::uint32_t>(k_min);
  hypergeometric_pmf(pop, succ, draws, scratch);
  double total = 0.0;
  for (double w : scratch) total += w;
  const double target = rng.next_double() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    cum += scratch[i];
    if (target < cum) return static_cast<std::uint32_t>(k_min + i);
  }
  return static_cast<std::uint32_t>(k_max);
}

NullTableSampler::NullTableSampler(const std::array<std::uint32_t, 3>& row_counts,
                                   const std::array<std::uint32_t, 3>& col_counts)
    : rows_(row_counts), cols_(col_counts) {
  const std::uint64_t rt =
      std::uint64_t{rows_[0]} + rows_[1] + rows_[2];
  const std::uint64_t ct =
      std::uint64_t{cols_[0]} + cols_[1] + cols_[2];
  if (rt != ct || rt == 0) {
    fail(Errc::MarginMismatch, "row and column margins must have the same positive total");
  }
  total_ = rt;

  // Cell (0,0) ~ HG(total, cols[0], rows[0]); margins are fixed across all
  // draws, so precompute the cumulative weights once.
  const std::uint64_t k_min =
      (std::uint64_t{rows_[0]} + cols_[0] > total_) ? rows_[0] + cols_[0] - total_ : 0;
  k0_min_ = static_cast<std::uint32_t>(k_min);
  hypergeometric_pmf(total_, cols_[0], rows_[0], cdf0_);
  double cum = 0.0;
  for (double& w : cdf0_) {
    cum += w;
    w = cum;
  }
}

Contingency3x3 NullTableSampler::draw(Xoshiro256ss& rng) {
  // n00 by binary search in the cached CDF.
  const double target = rng.next_double() * cdf0_.back();
  const auto it = std::upper_bound(cdf0_.begin(), cdf0_.end(), target);
  const std::uint32_t n00 =
      k0_min_ + static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(
                    it - cdf0_.begin(), static_cast<std::ptrdiff_t>(cdf0_.size()) - 1));

  // Remaining cells of row 0, then row 1; row 2 is forced.
  const std::uint32_t n01 = hypergeometric_draw(total_ - cols_[0], cols_[1], rows_[0] - n00,
                                                rng, scratch_);
  const std::uint32_t n02 = rows_[0] - n00 - n01;
  const std::uint32_t n10 =
      hypergeometric_draw(total_ - rows_[0], cols_[0] - n00, rows_[1], rng, scratch_);
  const std::uint32_t n11 = hypergeometric_draw((total_ - rows_[0]) - (cols_[0] - n00),
                                                cols_[1] - n01, rows_[1] - n10, rng, scratch_);
  const std::uint32_t n12 = rows_[1] - n10 - n11;

  Contingency3x3 t;
  t.n = {{{n00, n01, n02},
          {n10, n11, n12},
          {cols_[0] - n00 - n10, cols_[1] - n01 - n11, cols_[2] - n02 - n12}}};
  return t;
}

Contingency3x3 sample_null_table(const std::array<std::uint32_t, 3>& row_counts,
                                 const std::array<std::uint32_t, 3>& col_counts,
                                 Xoshiro256ss& rng) {
  NullTableSampler sampler(row_counts, col_counts);
  return sampler.draw(rng);
}

PermTestResult permutation_test(const Contingency3x3& table, const Metric3& mx,
                                const Metric3& my, const PermutationPlan& plan) {
  if (plan.resamples == 0) fail(Errc::BadArgument, "need at least one resample");
  const std::uint64_t n = table.total();
  const auto rows = table.row_margins();
  const auto cols = table.col_margins();
  if (n < 2 || *std::max_element(rows.begin(), rows.end()) == n ||
      *std::max_element(cols.begin(), cols.end()) == n) {
    fail(Errc::DegenerateMargin,
         "a margin puts all observations on one genotype; the statistic is identically zero");
  }

  // The permuted tables share the observed margins, so the doubly-centred
  // distance matrices are fixed across resamples.
  const double nd = static_cast<double>(n);
  const std::array<double, 3> rowp{rows[0] / nd, rows[1] / nd, rows[2] / nd};
  const std::array<double, 3> colp{cols[0] / nd, cols[1] / nd, cols[2] / nd};
  const Mat3 dmu = doubly_centred(mx, rowp);
  const Mat3 dnu = doubly_centred(my, colp);
  const double inv_n2 = 1.0 / (nd * nd);

  auto stat_of = [&](const Contingency3x3& t) {
    Mat3 w;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) w[x][y] = static_cast<double>(t.n[x][y]);
    return dcov_bilinear(dmu, dnu, w, inv_n2);
  };

  const double observed = stat_of(table);
  Xoshiro256ss rng(plan.seed);
  NullTableSampler sampler(rows, cols);
  std::uint32_t exceed = 0;
  for (std::uint32_t b = 0; b < plan.resamples; ++b) {
    if (stat_of(sampler.draw(rng)) >= observed) ++exceed;
  }

  PermTestResult res;
  res.statistic = observed;
  res.pvalue = (1.0 + exceed) / (plan.resamples + 1.0);
  res.resamples = plan.resamples;
  res.n = n;
  return res;
}

}  // namespace epidcov
