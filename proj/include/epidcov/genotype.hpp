#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace epidcov {

inline constexpr std::uint8_t kMissingGenotype = 3;

/// Individuals x SNPs, values in {0,1,2} plus kMissingGenotype. Row-major.
struct GenotypeMatrix {
  std::vector<std::string> snp_ids;
  std::vector<std::string> individual_ids;
  std::vector<std::uint8_t> values;

  std::size_t n_individuals() const { return individual_ids.size(); }
  std::size_t n_snps() const { return snp_ids.size(); }
  std::uint8_t at(std::size_t ind, std::size_t snp) const {
    return values[ind * snp_ids.size() + snp];
  }
  void set(std::size_t ind, std::size_t snp, std::uint8_t v) {
    values[ind * snp_ids.size() + snp] = v;
  }
};

/// Column-major bit-plane store: per SNP, three bit vectors over individuals.
/// Genotype g is encoded as lo = (g == 1), hi = (g == 2); a cleared valid bit
/// marks a missing entry (its lo/hi bits are zero). Tail bits past the last
/// individual are zero in all planes, so whole-word kernels need no masking.
struct PackedColumns {
  std::size_t n_rows = 0;   // individuals
  std::size_t words = 0;    // 64-bit words per SNP column
  std::size_t n_snps = 0;
  std::vector<std::uint64_t> lo, hi, valid;

  const std::uint64_t* lo_col(std::size_t s) const { return lo.data() + s * words; }
  const std::uint64_t* hi_col(std::size_t s) const { return hi.data() + s * words; }
  const std::uint64_t* valid_col(std::size_t s) const { return valid.data() + s * words; }
};

PackedColumns pack_columns(const GenotypeMatrix& g);

}  // namespace epidcov
