#pragma once

#include <cstdint>
#include <utility>

#include "epidcov/genotype.hpp"
#include "epidcov/models.hpp"

namespace epidcov {

/// Synthetic case/control dataset: L SNPs with minor allele frequencies
/// drawn uniformly from [0.05, 0.2]. All SNPs are mutually independent
/// except the planted pair (the first two SNPs), whose joint follows
/// `case_model` in cases and `control_model` in controls. SNP ids are
/// snp0001, snp0002, ...
struct SimulationSpec {
  std::size_t n_snps = 50;
  std::uint64_t n_cases = 585;
  std::uint64_t n_controls = 573;
  ModelSpec case_model{};     // planted pair in cases
  ModelSpec control_model{};  // planted pair in controls
  std::uint64_t seed = 1;
};

std::pair<GenotypeMatrix, GenotypeMatrix> simulate_dataset(const SimulationSpec& spec);

}  // namespace epidcov
