#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "epidcov/genotype.hpp"
#include "epidcov/paircount.hpp"
#include "epidcov/rng.hpp"

using namespace epidcov;

namespace {

GenotypeMatrix random_matrix(std::size_t n, std::size_t L, double missing_rate,
                             Xoshiro256ss& rng) {
  GenotypeMatrix g;
  for (std::size_t s = 0; s < L; ++s) g.snp_ids.push_back("s" + std::to_string(s));
  for (std::size_t i = 0; i < n; ++i) g.individual_ids.push_back("i" + std::to_string(i));
  g.values.resize(n * L);
  for (auto& v : g.values) {
    v = rng.next_double() < missing_rate ? kMissingGenotype
                                         : static_cast<std::uint8_t>(rng.next_below(3));
  }
  return g;
}

// per-entry reference, straight off the unpacked matrix
Contingency3x3 count_reference(const GenotypeMatrix& g, std::size_t a, std::size_t b) {
  Contingency3x3 t;
  for (std::size_t i = 0; i < g.n_individuals(); ++i) {
    const std::uint8_t x = g.at(i, a), y = g.at(i, b);
    if (x == kMissingGenotype || y == kMissingGenotype) continue;
    ++t.n[x][y];
  }
  return t;
}

}  // namespace

TEST_CASE("packing round-trips through the scalar kernel") {
  Xoshiro256ss rng(61);
  for (std::size_t n : {1u, 3u, 63u, 64u, 65u, 128u, 200u, 1311u}) {
    const GenotypeMatrix g = random_matrix(n, 4, 0.1, rng);
    const PackedColumns p = pack_columns(g);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        const Contingency3x3 want = count_reference(g, a, b);
        const Contingency3x3 got = count_pair(p, a, b, count_pair_scalar);
        CHECK(got == want);
      }
  }
}

TEST_CASE("scalar and AVX2 kernels agree") {
#if defined(__x86_64__)
  if (!cpu_has_avx2()) {
    MESSAGE("AVX2 unavailable on this machine; equivalence not exercised");
    return;
  }
  Xoshiro256ss rng(62);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.next_below(1500);
    const double miss = trial % 3 == 0 ? 0.0 : 0.15;
    const GenotypeMatrix g = random_matrix(n, 3, miss, rng);
    const PackedColumns p = pack_columns(g);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b) {
        const Contingency3x3 s = count_pair(p, a, b, count_pair_scalar);
        const Contingency3x3 v = count_pair(p, a, b, count_pair_avx2);
        CHECK(s == v);
      }
  }
#else
  MESSAGE("not an x86-64 build; scalar kernel is the only variant");
#endif
}

TEST_CASE("kernel dispatch") {
  const CountKernelFn fn = active_count_kernel();
  CHECK(fn != nullptr);
#if defined(__x86_64__)
  if (cpu_has_avx2()) {
    CHECK(active_count_kernel_name() == "avx2");
  } else {
    CHECK(active_count_kernel_name() == "scalar");
  }
#else
  CHECK(active_count_kernel_name() == "scalar");
#endif
  force_count_kernel(count_pair_scalar);
  CHECK(active_count_kernel() == count_pair_scalar);
  CHECK(active_count_kernel_name() == "scalar");
  force_count_kernel(nullptr);
  CHECK(active_count_kernel() == fn);
}

TEST_CASE("missingness drops only the affected rows") {
  GenotypeMatrix g;
  g.snp_ids = {"a", "b"};
  g.individual_ids = {"1", "2", "3", "4", "5"};
  g.values = {
      0, 0,                              // complete
      1, kMissingGenotype,               // dropped
      2, 2,                              // complete
      kMissingGenotype, kMissingGenotype,  // dropped
      1, 0,                              // complete
  };
  const PackedColumns p = pack_columns(g);
  const Contingency3x3 t = count_pair(p, 0, 1, count_pair_scalar);
  CHECK(t.total() == 3);
  CHECK(t.n[0][0] == 1);
  CHECK(t.n[2][2] == 1);
  CHECK(t.n[1][0] == 1);
}
