#include "epidcov/paircount.hpp"

#include <algorithm>
#include <atomic>
#include <bit>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace epidcov {

Contingency3x3 count_pair_scalar(const std::uint64_t* a_lo, const std::uint64_t* a_hi,
                                 const std::uint64_t* a_valid, const std::uint64_t* b_lo,
                                 const std::uint64_t* b_hi, const std::uint64_t* b_valid,
                                 std::size_t words) {
  std::uint64_t c[3][3] = {};
  for (std::size_t w = 0; w < words; ++w) {
    const std::uint64_t v = a_valid[w] & b_valid[w];
    const std::uint64_t a1 = a_lo[w] & v;
    const std::uint64_t a2 = a_hi[w] & v;
    const std::uint64_t a0 = v & ~(a_lo[w] | a_hi[w]);
    const std::uint64_t b1 = b_lo[w] & v;
    const std::uint64_t b2 = b_hi[w] & v;
    const std::uint64_t b0 = v & ~(b_lo[w] | b_hi[w]);
    const std::uint64_t am[3] = {a0, a1, a2};
    const std::uint64_t bm[3] = {b0, b1, b2};
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) c[x][y] += std::popcount(am[x] & bm[y]);
  }
  Contingency3x3 t;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) t.n[x][y] = static_cast<std::uint32_t>(c[x][y]);
  return t;
}

#if defined(__x86_64__)

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }

// Nibble-LUT byte popcount, nine cell masks per 256-bit block. Byte-lane
// accumulators hold at most 8 per block, so they are flushed to 64-bit
// accumulators via SAD every 31 blocks.
__attribute__((target("avx2"))) Contingency3x3 count_pair_avx2(
    const std::uint64_t* a_lo, const std::uint64_t* a_hi, const std::uint64_t* a_valid,
    const std::uint64_t* b_lo, const std::uint64_t* b_hi, const std::uint64_t* b_valid,
    std::size_t words) {
  const __m256i lut =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3,
                       1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low4 = _mm256_set1_epi8(0x0f);
  const __m256i zero = _mm256_setzero_si256();

  __m256i acc64[9];
  for (auto& a : acc64) a = zero;

  const std::size_t blocks = words / 4;
  std::size_t blk = 0;
  while (blk < blocks) {
    const std::size_t run = std::min<std::size_t>(blocks - blk, 31);
    __m256i acc8[9];
    for (auto& a : acc8) a = zero;
    for (std::size_t k = 0; k < run; ++k, ++blk) {
      const std::size_t off = blk * 4;
      const __m256i alo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a_lo + off));
      const __m256i ahi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a_hi + off));
      const __m256i blo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b_lo + off));
      const __m256i bhi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b_hi + off));
      const __m256i v = _mm256_and_si256(
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a_valid + off)),
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b_valid + off)));
      __m256i am[3], bm[3];
      am[0] = _mm256_andnot_si256(_mm256_or_si256(alo, ahi), v);
      am[1] = _mm256_and_si256(alo, v);
      am[2] = _mm256_and_si256(ahi, v);
      bm[0] = _mm256_andnot_si256(_mm256_or_si256(blo, bhi), v);
      bm[1] = _mm256_and_si256(blo, v);
      bm[2] = _mm256_and_si256(bhi, v);
      int cell = 0;
      for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y, ++cell) {
          const __m256i m = _mm256_and_si256(am[x], bm[y]);
          const __m256i pop = _mm256_add_epi8(
              _mm256_shuffle_epi8(lut, _mm256_and_si256(m, low4)),
              _mm256_shuffle_epi8(lut, _mm256_and_si256(_mm256_srli_epi16(m, 4), low4)));
          acc8[cell] = _mm256_add_epi8(acc8[cell], pop);
        }
    }
    for (int cell = 0; cell < 9; ++cell) {
      acc64[cell] = _mm256_add_epi64(acc64[cell], _mm256_sad_epu8(acc8[cell], zero));
    }
  }

  Contingency3x3 t;
  for (int cell = 0; cell < 9; ++cell) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc64[cell]);
    t.n[cell / 3][cell % 3] =
        static_cast<std::uint32_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
  }

  if (words % 4 != 0) {
    const std::size_t off = blocks * 4;
    const Contingency3x3 tail =
        count_pair_scalar(a_lo + off, a_hi + off, a_valid + off, b_lo + off, b_hi + off,
                          b_valid + off, words - off);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) t.n[x][y] += tail.n[x][y];
  }
  return t;
}

#endif  // __x86_64__

namespace {

std::atomic<CountKernelFn> g_forced_kernel{nullptr};

CountKernelFn resolve_kernel() {
#if defined(__x86_64__)
  if (cpu_has_avx2()) return count_pair_avx2;
#endif
  return count_pair_scalar;
}

}  // namespace

CountKernelFn active_count_kernel() {
  if (CountKernelFn f = g_forced_kernel.load(std::memory_order_relaxed)) return f;
  static const CountKernelFn auto_kernel = resolve_kernel();
  return auto_kernel;
}

std::string active_count_kernel_name() {
  const CountKernelFn f = active_count_kernel();
#if defined(__x86_64__)
  if (f == count_pair_avx2) return "avx2";
#endif
  return f == count_pair_scalar ? "scalar" : "custom";
}

void force_count_kernel(CountKernelFn fn) {
  g_forced_kernel.store(fn, std::memory_order_relaxed);
}

}  // namespace epidcov
