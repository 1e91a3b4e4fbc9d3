#include "epidcov/simulate.hpp"

#include <cstdio>

#include "epidcov/error.hpp"
#include "epidcov/rng.hpp"

namespace epidcov {

namespace {

GenotypeMatrix empty_matrix(std::size_t L, std::uint64_t n, const char* id_prefix) {
  GenotypeMatrix g;
  char buf[32];
  g.snp_ids.reserve(L);
  for (std::size_t s = 0; s < L; ++s) {
    std::snprintf(buf, sizeof(buf), "snp%04zu", s + 1);
    g.snp_ids.emplace_back(buf);
  }
  g.individual_ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%s%05llu", id_prefix,
                  static_cast<unsigned long long>(i + 1));
    g.individual_ids.emplace_back(buf);
  }
  g.values.assign(n * L, 0);
  return g;
}

void fill_column_iid(GenotypeMatrix& g, std::size_t snp, const HweMarginal& m,
                     Xoshiro256ss& rng) {
  const double c0 = m.p0;
  const double c1 = m.p0 + m.p1;
  for (std::size_t i = 0; i < g.n_individuals(); ++i) {
    const double u = rng.next_double();
    g.set(i, snp, u < c0 ? 0 : (u < c1 ? 1 : 2));
  }
}

}  // namespace

std::pair<GenotypeMatrix, GenotypeMatrix> simulate_dataset(const SimulationSpec& spec) {
  if (spec.n_snps < 2) fail(Errc::BadArgument, "need at least two SNPs to plant a pair");
  if (spec.n_cases == 0 || spec.n_controls == 0) {
    fail(Errc::BadArgument, "both groups need at least one individual");
  }

  GenotypeMatrix cases = empty_matrix(spec.n_snps, spec.n_cases, "case");
  GenotypeMatrix controls = empty_matrix(spec.n_snps, spec.n_controls, "ctrl");

  // One maf per SNP, shared by the two groups.
  Xoshiro256ss maf_rng(derive_seed(spec.seed, 0xA11E1E));
  std::vector<HweMarginal> margins;
  margins.reserve(spec.n_snps);
  for (std::size_t s = 0; s < spec.n_snps; ++s) margins.push_back(hwe_marginal(sample_maf(maf_rng)));

  // Planted pair: SNPs 0 and 1 drawn jointly from the group's model.
  const Joint3x3 joint_cases = build_joint(spec.case_model, margins[0], margins[1]);
  const Joint3x3 joint_controls = build_joint(spec.control_model, margins[0], margins[1]);
  {
    Xoshiro256ss rng(derive_seed(spec.seed, 1, 0));
    auto [sample, table] = draw_sample(joint_cases, spec.n_cases, rng);
    (void)table;
    for (std::uint64_t i = 0; i < spec.n_cases; ++i) {
      cases.set(i, 0, sample.x[i]);
      cases.set(i, 1, sample.y[i]);
    }
  }
  {
    Xoshiro256ss rng(derive_seed(spec.seed, 1, 1));
    auto [sample, table] = draw_sample(joint_controls, spec.n_controls, rng);
    (void)table;
    for (std::uint64_t i = 0; i < spec.n_controls; ++i) {
      controls.set(i, 0, sample.x[i]);
      controls.set(i, 1, sample.y[i]);
    }
  }

  for (std::size_t s = 2; s < spec.n_snps; ++s) {
    Xoshiro256ss rng_c(derive_seed(spec.seed, 2, s, 0));
    Xoshiro256ss rng_t(derive_seed(spec.seed, 2, s, 1));
    fill_column_iid(cases, s, margins[s], rng_c);
    fill_column_iid(controls, s, margins[s], rng_t);
  }
  return {std::move(cases), std::move(controls)};
}

}  // namespace epidcov
