#include "imp3d/kernels.hpp"

#if IMP3D_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cstddef>

namespace imp3d::kernels {

namespace {

// std::min(a, b) returns a unless b < a; _mm256_min_pd(b, a) returns b when
// b < a and a otherwise, matching it lane for lane.
inline __m256d min_like_std(__m256d a, __m256d b) { return _mm256_min_pd(b, a); }

}  // namespace

void min_slack_avx2(const LinearPair& k, std::span<const double> v_p,
                    std::span<const double> drive, std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t body = n - n % 4;
  const bool resistive = k.g_l > 0.0;

  const __m256d g_l = _mm256_set1_pd(k.g_l);
  const __m256d p_sign = _mm256_set1_pd(k.p_sign);
  const __m256d q_set_min = _mm256_set1_pd(k.q_set_min);
  const __m256d q_set_max = _mm256_set1_pd(k.q_set_max);
  const __m256d p_set_min = _mm256_set1_pd(k.p_set_min);
  const __m256d p_reset_min = _mm256_set1_pd(k.p_reset_min);
  const __m256d zero = _mm256_setzero_pd();
  const double gp[2] = {k.g_p_off, k.g_p_on};
  const double gq[2] = {k.g_q_off, k.g_q_on};

  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d vp = _mm256_loadu_pd(v_p.data() + i);
    const __m256d d = _mm256_loadu_pd(drive.data() + i);
    const __m256d inj = resistive ? _mm256_mul_pd(g_l, d) : d;
    __m256d worst = zero;
    bool first = true;
    for (int sp = 0; sp < 2; ++sp) {
      for (int sq = 0; sq < 2; ++sq) {
        const __m256d g_p = _mm256_set1_pd(gp[sp]);
        const __m256d den = _mm256_set1_pd(gp[sp] + gq[sq] + k.g_l);
        const __m256d u = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(g_p, vp), inj), den);
        const __m256d dq = _mm256_sub_pd(zero, u);
        const __m256d dp = _mm256_mul_pd(p_sign, _mm256_sub_pd(vp, u));
        const __m256d q_slack = (sp == 0 && sq == 0) ? _mm256_sub_pd(dq, q_set_max)
                                                     : _mm256_sub_pd(q_set_min, dq);
        const __m256d p_set = _mm256_sub_pd(p_set_min, dp);
        const __m256d p_reset = _mm256_sub_pd(dp, p_reset_min);
        const __m256d m = min_like_std(min_like_std(q_slack, p_set), p_reset);
        worst = first ? m : min_like_std(worst, m);
        first = false;
      }
    }
    _mm256_storeu_pd(out.data() + i, worst);
  }
  if (body < n)
    min_slack_scalar(k, v_p.subspan(body), drive.subspan(body), out.subspan(body));
}

void delta_sweep_avx2(double ratio, std::span<const double> g_l_over_g_on,
                      std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t body = n - n % 4;
  const double g_off_s = 1.0 / ratio;
  const __m256d num = _mm256_set1_pd(1.0 - g_off_s);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d g_off = _mm256_set1_pd(g_off_s);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d x = _mm256_loadu_pd(g_l_over_g_on.data() + i);
    const __m256d den = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(two, x), three), g_off);
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(num, den));
  }
  if (body < n) delta_sweep_scalar(ratio, g_l_over_g_on.subspan(body), out.subspan(body));
}

}  // namespace imp3d::kernels

#endif
