#pragma once

#include <cstdint>
#include <vector>

#include "epidcov/metric3.hpp"
#include "epidcov/models.hpp"

namespace epidcov {

// Replicated single-pair experiments behind the calibrate and power
// subcommands. Both draw fresh minor allele frequencies per replicate,
// sample the two groups, run the per-group permutation test and apply the
// two-stage decision: with one pair two tests are performed, so each group
// rejects at the Bonferroni-adjusted threshold alpha/2, and epistasis is
// declared when exactly one group rejects.

struct ReplicateConfig {
  std::uint32_t replicates = 1000;
  std::uint64_t n_cases = 585;
  std::uint64_t n_controls = 573;
  std::uint32_t resamples_override = 0;  // 0 = default rule per group
  std::uint64_t seed = 1;
  Metric3 metric{};
  unsigned threads = 1;
};

struct CalibrationRow {
  double alpha = 0.0;
  double alpha_hat = 0.0;
  std::uint32_t flagged = 0;
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;  // alpha in {0.01, 0.02, 0.05, 0.10}
  std::uint32_t untestable = 0;      // replicates with a degenerate margin
};

/// Both groups drawn from the same model (the epistasis null).
CalibrationResult run_calibration(const ModelSpec& model, const ReplicateConfig& cfg);

struct PowerRow {
  double param = 0.0;
  double power = 0.0;
  std::uint32_t flagged = 0;
  std::uint32_t untestable = 0;
};

/// Cases drawn from family(param) per grid point, controls from indep;
/// decision at the given nominal alpha.
std::vector<PowerRow> run_power(ModelKind family, const std::vector<double>& grid, double alpha,
                                const ReplicateConfig& cfg);

/// Full command-line surface; returns the process exit code
/// (0 success, 1 internal error, 2 usage or input error).
int run_cli(int argc, const char* const* argv);

}  // namespace epidcov
