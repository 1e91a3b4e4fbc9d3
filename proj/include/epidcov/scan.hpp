#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epidcov/genotype.hpp"
#include "epidcov/metric3.hpp"

namespace epidcov {

struct ScanConfig {
  double alpha = 0.05;              // nominal FWER
  Metric3 metric_x{};               // metric for the first variable of a pair
  Metric3 metric_y{};               // and for the second (same by default)
  std::uint32_t resamples_override = 0;  // 0 = 200 + floor(5000/n) per group
  std::uint64_t master_seed = 1;
  std::uint32_t min_complete = 30;  // minimum pairwise-complete observations
  unsigned threads = 1;
};

enum class PairFlag { epistasis, none, untestable };

std::string pair_flag_name(PairFlag f);

struct PairDecision {
  std::uint32_t i = 0, j = 0;  // SNP indices, i < j
  std::string snp_i, snp_j;
  double stat_cases = 0.0, stat_controls = 0.0;
  double p_cases = 0.0, p_controls = 0.0;
  std::uint32_t n_cases = 0, n_controls = 0;  // pairwise-complete counts
  PairFlag flag = PairFlag::none;
};

struct ScanResult {
  std::vector<std::string> snp_ids;
  std::vector<PairDecision> decisions;     // row-major over i < j
  std::vector<double> p_cases_matrix;      // L x L, symmetric, NaN on diagonal
  std::vector<double> p_controls_matrix;   //   and for untestable pairs
  double threshold = 0.0;                  // alpha / (L*(L-1))
  std::string warning;                     // nonempty when no rejection is achievable
};

/// Bonferroni threshold over the L*(L-1) performed tests (both groups).
double bonferroni_threshold(double alpha, std::uint64_t L);

/// Throws SnpListMismatch naming the first differing column unless the two
/// matrices carry the same SNP list in the same order.
void check_snp_lists(const GenotypeMatrix& cases, const GenotypeMatrix& controls);

/// Deterministic 64-bit seed for the permutation stream of one (pair, group)
/// task. Same inputs give the same seed on every platform and schedule.
std::uint64_t pair_seed(std::uint64_t master_seed, std::uint32_t i, std::uint32_t j,
                        bool controls);

/// Tests every SNP pair in both groups and applies the two-stage decision:
/// a pair is epistatic when independence is rejected (at the Bonferroni
/// threshold) in exactly one group. Pairs with fewer than min_complete
/// pairwise-complete observations or a constant margin in either group are
/// untestable. The result is identical for every thread count.
ScanResult scan_pairs(const GenotypeMatrix& cases, const GenotypeMatrix& controls,
                      const ScanConfig& config);

/// L x L binary symmetric matrix with 1 where flag == epistasis.
std::vector<std::uint8_t> adjacency_matrix(const std::vector<PairDecision>& decisions,
                                           std::size_t L);

void write_pairs_tsv(const ScanResult& result, const std::string& path);
void write_adjacency_tsv(const ScanResult& result, const std::string& path);

/// Minimal pairs.tsv reader: ids and flags (enrichment input).
struct PairsFileRow {
  std::string snp_i, snp_j;
  PairFlag flag = PairFlag::none;
};
std::vector<PairsFileRow> read_pairs_tsv(const std::string& path);

}  // namespace epidcov
