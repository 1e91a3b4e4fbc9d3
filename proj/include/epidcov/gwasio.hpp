#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "epidcov/genotype.hpp"

namespace epidcov {

// ---------------------------------------------------------------------------
// Genotype TSV
//
// Header:  iid<TAB>snp_1<TAB>...<TAB>snp_L
// Body:    individual id, then one of 0 / 1 / 2 / NA per SNP.
// ---------------------------------------------------------------------------

GenotypeMatrix load_genotypes(const std::string& path);
void save_genotypes(const GenotypeMatrix& g, const std::string& path);

// ---------------------------------------------------------------------------
// Quality control
// ---------------------------------------------------------------------------

struct QcThresholds {
  double min_maf = 0.01;         // pooled MAF below this fails "maf"
  double hwe_alpha = 0.05;       // HWE test in controls below this fails "hwe"
  double min_call_rate = 0.95;   // either group below this fails "call_rate"
  double diff_call_alpha = 0.05; // call-rate difference between groups fails "diff_call"
  double scan_min_maf = 0.10;    // pooled MAF must exceed this to enter the scan
};

struct SnpQcRecord {
  std::string snp_id;
  bool kept = true;
  std::string rule;  // first failing rule, "-" when kept
  double maf = 0.0;
  double hwe_p = 1.0;
  double call_rate_cases = 1.0;
  double call_rate_controls = 1.0;
};

struct QcResult {
  GenotypeMatrix cases;
  GenotypeMatrix controls;
  std::vector<SnpQcRecord> report;
};

/// Chi-square (1 df) goodness-of-fit of the genotype counts against the
/// genotype frequencies implied by the estimated allele frequency.
/// Monomorphic input returns 1.
double hwe_pvalue(std::uint64_t n0, std::uint64_t n1, std::uint64_t n2);

/// Removes SNPs failing the rules in the fixed order
/// maf -> hwe -> call_rate -> diff_call -> scan_maf and reports every SNP's
/// fate. Pooled MAF over both groups (missing excluded, folded to <= 0.5);
/// HWE tested in controls only; call rate per group. Idempotent.
QcResult qc_filter(const GenotypeMatrix& cases, const GenotypeMatrix& controls,
                   const QcThresholds& t);

void write_qc_report(const std::vector<SnpQcRecord>& report, const std::string& path);

/// Restricts both matrices to a uniformly random k-subset of SNPs (without
/// replacement), preserving SNP order. Deterministic given the seed.
std::pair<GenotypeMatrix, GenotypeMatrix> random_subset(const GenotypeMatrix& cases,
                                                        const GenotypeMatrix& controls,
                                                        std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Co-expression module enrichment
// ---------------------------------------------------------------------------

/// snp_id -> set of module identifiers. SNPs absent from the map belong to
/// no module.
struct ModuleMap {
  std::map<std::string, std::set<std::string>> modules;

  bool share_module(const std::string& a, const std::string& b) const;
};

/// Two-column TSV: snp_id<TAB>module_id, one row per membership.
ModuleMap load_module_map(const std::string& path);

struct EnrichmentResult {
  double observed_prop = 0.0;  // flagged pairs sharing a module
  double expected_prop = 0.0;  // same fraction over all testable pairs
  double pvalue = 1.0;         // one-sided binomial tail
  std::uint64_t n_flagged = 0;
};

/// Pair co-membership means sharing at least one module. `flagged_share` and
/// `testable_share` are the pair lists by (snp_i, snp_j) id. Throws
/// NoFlaggedPairs when the flagged list is empty.
EnrichmentResult enrichment_test(const std::vector<std::pair<std::string, std::string>>& flagged,
                                 const std::vector<std::pair<std::string, std::string>>& testable,
                                 const ModuleMap& modules);

}  // namespace epidcov
