#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "epidcov/energy.hpp"
#include "epidcov/rng.hpp"

namespace epidcov {

/// Genotype distribution implied by random mating at minor allele
/// frequency maf: ((1-m)^2, 2m(1-m), m^2).
struct HweMarginal {
  double maf = 0.0;
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
};

enum class ModelKind { indep, qexp, rexp, qmult };

/// One of the four pair-distribution models with its parameter
/// (e in [1,inf) for qexp/rexp, g in [0,1] for qmult, ignored for indep).
struct ModelSpec {
  ModelKind kind = ModelKind::indep;
  double param = 1.0;
};

/// Throws MafOutOfRange unless 0 < maf <= 0.5.
HweMarginal hwe_marginal(double maf);

/// Minor allele frequency uniform on [0.05, 0.2].
double sample_maf(Xoshiro256ss& rng);

ModelSpec make_model_spec(ModelKind kind, double param);

/// Parses "indep" | "qexp:E" | "rexp:E" | "qmult:G".
ModelSpec parse_model(const std::string& text);

std::string model_name(const ModelSpec& spec);

/// Builds the 3x3 joint for the model with the given genotype marginals for
/// the two variables. Row sums equal (p0, p1, p2) of the first marginal and
/// column sums those of the second, by construction. Cells within -1e-12 of
/// zero are clamped to 0; genuinely negative cells (parameter outside the
/// model's validity domain) raise NegativeCell.
Joint3x3 build_joint(const ModelSpec& spec, const HweMarginal& mi, const HweMarginal& mj);

/// n independent draws from the 9-cell categorical distribution (inverse CDF
/// over row-major cells). Returns the raw sample and its count table.
std::pair<PairedSample, Contingency3x3> draw_sample(const Joint3x3& joint, std::uint64_t n,
                                                    Xoshiro256ss& rng);

}  // namespace epidcov
