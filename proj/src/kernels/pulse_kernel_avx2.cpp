// Four pulses per iteration, one per 64-bit lane. Philox words are kept in the
// low halves of the lanes so that _mm256_mul_epu32 yields the full 32x32->64
// products the round function needs.

#include <immintrin.h>

#include "decoyqkd/pulse_kernel.hpp"

namespace decoyqkd {

namespace {

constexpr int kLanes = 4;

struct RoundKeys {
  __m256i k0[philox::kRounds];
  __m256i k1[philox::kRounds];
};

RoundKeys round_keys(philox::Key key) {
  RoundKeys rk;
  for (int r = 0; r < philox::kRounds; ++r) {
    rk.k0[r] = _mm256_set1_epi64x(key[0]);
    rk.k1[r] = _mm256_set1_epi64x(key[1]);
    key[0] += philox::kWeyl0;
    key[1] += philox::kWeyl1;
  }
  return rk;
}

// Philox4x32-10 on four counters {index, index >> 32, 0, 0}.
inline void philox4(__m256i index, const RoundKeys& rk, __m256i& u0, __m256i& u1, __m256i& u2) {
  const __m256i low32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i mul0 = _mm256_set1_epi64x(philox::kMul0);
  const __m256i mul1 = _mm256_set1_epi64x(philox::kMul1);
  __m256i c0 = _mm256_and_si256(index, low32);
  __m256i c1 = _mm256_srli_epi64(index, 32);
  __m256i c2 = _mm256_setzero_si256();
  __m256i c3 = _mm256_setzero_si256();
  for (int r = 0; r < philox::kRounds; ++r) {
    const __m256i prod0 = _mm256_mul_epu32(c0, mul0);
    const __m256i prod1 = _mm256_mul_epu32(c2, mul1);
    const __m256i hi0 = _mm256_srli_epi64(prod0, 32);
    const __m256i lo0 = _mm256_and_si256(prod0, low32);
    const __m256i hi1 = _mm256_srli_epi64(prod1, 32);
    const __m256i lo1 = _mm256_and_si256(prod1, low32);
    c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), rk.k0[r]);
    c1 = lo1;
    c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), rk.k1[r]);
    c3 = lo0;
  }
  u0 = c0;
  u1 = c1;
  u2 = c2;
}

}  // namespace

void run_pulses_avx2(const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                     ClassCounts& counts) {
  const RoundKeys rk = round_keys(plan.key);
  const __m256i vacuum_cut = _mm256_set1_epi64x(plan.vacuum_cut);
  const __m256i decoy_cut = _mm256_set1_epi64x(plan.decoy_cut);
  const __m256i never = _mm256_set1_epi64x((std::int64_t{1} << 32) - 1);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256i lane_offsets = _mm256_set_epi64x(3, 2, 1, 0);

  alignas(32) std::int64_t src_out[kLanes];
  alignas(32) std::int64_t k_out[kLanes];
  alignas(32) std::int64_t click_out[kLanes];

  std::uint64_t i = begin;
  while (i < end) {
    const std::uint32_t c = plan.class_of(i);
    if (i + kLanes > end || plan.class_of(i + kLanes - 1) != c) {
      run_pulses_scalar(plan, i, i + 1, counts);
      ++i;
      continue;
    }
    const ClassTable& t = plan.classes[c];

    __m256i u0, u1, u2;
    philox4(_mm256_add_epi64(_mm256_set1_epi64x(static_cast<std::int64_t>(i)), lane_offsets), rk,
            u0, u1, u2);

    const __m256i is_vacuum = _mm256_cmpgt_epi64(vacuum_cut, u0);
    const __m256i below_decoy = _mm256_cmpgt_epi64(decoy_cut, u0);
    const __m256i is_decoy = _mm256_andnot_si256(is_vacuum, below_decoy);
    const __m256i is_signal = _mm256_andnot_si256(below_decoy, _mm256_set1_epi64x(-1));

    __m256i k = _mm256_setzero_si256();
    for (int j = 0; j < kPhotonBins - 1; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      __m256i cut = _mm256_blendv_epi8(_mm256_set1_epi64x(t.photon_cut[0][jj]),
                                       _mm256_set1_epi64x(t.photon_cut[1][jj]), is_signal);
      cut = _mm256_blendv_epi8(cut, never, is_vacuum);
      const __m256i above = _mm256_cmpgt_epi64(u1, cut);
      if (_mm256_testz_si256(above, above)) break;
      k = _mm256_sub_epi64(k, above);
    }

    const __m256i click_cut = _mm256_i64gather_epi64(
        reinterpret_cast<const long long*>(t.click_cut.data()), k, 8);
    const __m256i click = _mm256_cmpgt_epi64(click_cut, u2);
    const __m256i src =
        _mm256_or_si256(_mm256_and_si256(is_decoy, one), _mm256_and_si256(is_signal, two));

    _mm256_store_si256(reinterpret_cast<__m256i*>(src_out), src);
    _mm256_store_si256(reinterpret_cast<__m256i*>(k_out), k);
    _mm256_store_si256(reinterpret_cast<__m256i*>(click_out), click);
    auto& emitted = counts.emitted[c];
    auto& detected = counts.detected[c];
    for (int lane = 0; lane < kLanes; ++lane) {
      ++emitted[src_out[lane]][k_out[lane]];
      detected[src_out[lane]][k_out[lane]] += click_out[lane] & 1;
    }
    i += kLanes;
  }
}

}  // namespace decoyqkd
