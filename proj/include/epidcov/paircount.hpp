#pragma once

#include <cstdint>
#include <string>

#include "epidcov/energy.hpp"
#include "epidcov/genotype.hpp"

namespace epidcov {

// 3x3 joint genotype counting over two packed SNP columns, restricted to
// individuals with both values present (pairwise complete). This is the hot
// inner loop of the scan: a scalar reference kernel plus an AVX2 variant,
// selected once at runtime. The two must agree bit for bit; the equivalence
// suite in tests/ enforces it.

using CountKernelFn = Contingency3x3 (*)(const std::uint64_t* a_lo, const std::uint64_t* a_hi,
                                         const std::uint64_t* a_valid,
                                         const std::uint64_t* b_lo, const std::uint64_t* b_hi,
                                         const std::uint64_t* b_valid, std::size_t words);

Contingency3x3 count_pair_scalar(const std::uint64_t* a_lo, const std::uint64_t* a_hi,
                                 const std::uint64_t* a_valid, const std::uint64_t* b_lo,
                                 const std::uint64_t* b_hi, const std::uint64_t* b_valid,
                                 std::size_t words);

#if defined(__x86_64__)
Contingency3x3 count_pair_avx2(const std::uint64_t* a_lo, const std::uint64_t* a_hi,
                               const std::uint64_t* a_valid, const std::uint64_t* b_lo,
                               const std::uint64_t* b_hi, const std::uint64_t* b_valid,
                               std::size_t words);
bool cpu_has_avx2();
#endif

/// Kernel picked for this machine (AVX2 when the CPU supports it, scalar
/// otherwise). Resolved once.
CountKernelFn active_count_kernel();

/// Name of the kernel active_count_kernel() resolves to ("avx2" or "scalar").
std::string active_count_kernel_name();

/// Force a specific kernel (tests and benchmarking); nullptr restores
/// automatic resolution.
void force_count_kernel(CountKernelFn fn);

/// Pairwise-complete joint count table for SNP columns (a, b) of `cols`.
inline Contingency3x3 count_pair(const PackedColumns& cols, std::size_t a, std::size_t b,
                                 CountKernelFn fn) {
  return fn(cols.lo_col(a), cols.hi_col(a), cols.valid_col(a), cols.lo_col(b), cols.hi_col(b),
            cols.valid_col(b), cols.words);
}

}  // namespace epidcov
