#include "epidcov/genotype.hpp"

#include "epidcov/error.hpp"

namespace epidcov {

PackedColumns pack_columns(const GenotypeMatrix& g) {
  PackedColumns p;
  p.n_rows = g.n_individuals();
  p.n_snps = g.n_snps();
  p.words = (p.n_rows + 63) / 64;
  p.lo.assign(p.n_snps * p.words, 0);
  p.hi.assign(p.n_snps * p.words, 0);
  p.valid.assign(p.n_snps * p.words, 0);
  for (std::size_t i = 0; i < p.n_rows; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << (i % 64);
    const std::size_t w = i / 64;
    for (std::size_t s = 0; s < p.n_snps; ++s) {
      const std::uint8_t v = g.at(i, s);
      const std::size_t base = s * p.words + w;
      if (v == kMissingGenotype) continue;
      if (v > 2) fail(Errc::BadArgument, "genotype out of range while packing");
      p.valid[base] |= bit;
      if (v == 1) p.lo[base] |= bit;
      if (v == 2) p.hi[base] |= bit;
    }
  }
  return p;
}

}  // namespace epidcov
