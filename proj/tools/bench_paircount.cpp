// Micro-benchmark for the pair-counting kernels: synthetic packed columns,
// every kernel variant, throughput in genotype pairs per second.
//
//   bench_paircount [n_individuals] [n_snps] [sweeps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "epidcov/genotype.hpp"
#include "epidcov/paircount.hpp"
#include "epidcov/rng.hpp"

using namespace epidcov;

namespace {

GenotypeMatrix synthetic(std::size_t n, std::size_t L, std::uint64_t seed) {
  GenotypeMatrix g;
  for (std::size_t s = 0; s < L; ++s) g.snp_ids.push_back("s" + std::to_string(s));
  for (std::size_t i = 0; i < n; ++i) g.individual_ids.push_back("i" + std::to_string(i));
  g.values.resize(n * L);
  Xoshiro256ss rng(seed);
  for (auto& v : g.values) {
    const double u = rng.next_double();
    v = u < 0.02 ? kMissingGenotype : static_cast<std::uint8_t>(rng.next_below(3));
  }
  return g;
}

double run_kernel(const PackedColumns& cols, CountKernelFn fn, int sweeps,
                  std::uint64_t* checksum) {
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t sum = 0;
  for (int rep = 0; rep < sweeps; ++rep) {
    for (std::size_t a = 0; a < cols.n_snps; ++a)
      for (std::size_t b = a + 1; b < cols.n_snps; ++b) {
        const Contingency3x3 t = count_pair(cols, a, b, fn);
        sum += t.n[0][0] + t.n[1][1] + t.n[2][2];
      }
  }
  *checksum = sum;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1158;
  const std::size_t L = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 256;
  const int sweeps = argc > 3 ? std::atoi(argv[3]) : 4;

  const GenotypeMatrix g = synthetic(n, L, 1);
  const PackedColumns cols = pack_columns(g);
  const double pairs =
      static_cast<double>(L) * static_cast<double>(L - 1) / 2.0 * sweeps;
  const double entries = pairs * static_cast<double>(n);

  std::printf("n=%zu snps=%zu sweeps=%d (%.0f pair tables, %.2e genotype pairs)\n", n, L,
              sweeps, pairs, entries);

  struct Variant {
    const char* name;
    CountKernelFn fn;
  };
  std::vector<Variant> variants = {{"scalar", count_pair_scalar}};
#if defined(__x86_64__)
  if (cpu_has_avx2()) variants.push_back({"avx2", count_pair_avx2});
#endif

  std::uint64_t reference = 0;
  for (const auto& v : variants) {
    std::uint64_t checksum = 0;
    run_kernel(cols, v.fn, 1, &checksum);  // warm up
    const double secs = run_kernel(cols, v.fn, sweeps, &checksum);
    if (reference == 0) reference = checksum;
    std::printf("%-8s %8.3f s   %8.2f M tables/s   %8.2f G entries/s   checksum %llu%s\n",
                v.name, secs, pairs / secs / 1e6, entries / secs / 1e9,
                static_cast<unsigned long long>(checksum),
                checksum == reference ? "" : "  MISMATCH");
  }
  std::printf("dispatch resolves to: %s\n", active_count_kernel_name().c_str());
  return 0;
}
