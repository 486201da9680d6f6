// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.
#include "mcs/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace mcs::kernels::avx2 {

namespace {

inline __m256d lanes(Ticks t0)
{
    const double b = static_cast<double>(t0);
    return _mm256_setr_pd(b, b + 1.0, b + 2.0, b + 3.0);
}

inline __m256d floor_div(__m256d a, __m256d b)
{
    return _mm256_floor_pd(_mm256_div_pd(a, b));
}

inline void store(__m256d v, std::size_t count, Ticks* out)
{
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, v);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = static_cast<Ticks>(tmp[k]);
}

}  // namespace

void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out)
{
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const std::size_t m = all.size();
    for (std::size_t i = 0; i < n; i += 4) {
        const __m256d t = lanes(t0 + static_cast<Ticks>(i));
        __m256d d = zero;
        for (std::size_t j = 0; j < m; ++j) {
            const __m256d T = _mm256_set1_pd(all.f_period[j]);
            const __m256d dl = _mm256_set1_pd(all.f_tight[j]);
            const __m256d c = _mm256_set1_pd(all.f_wcet_lo[j]);
            __m256d q = _mm256_add_pd(floor_div(_mm256_sub_pd(t, dl), T), one);
            q = _mm256_max_pd(q, zero);
            d = _mm256_fmadd_pd(q, c, d);
        }
        store(_mm256_sub_pd(d, t), std::min<std::size_t>(4, n - i), out + i);
    }
}

void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out)
{
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const std::size_t m = hi.size();
    for (std::size_t i = 0; i < n; i += 4) {
        const __m256d t = lanes(t0 + static_cast<Ticks>(i));
        __m256d d = zero;
        for (std::size_t j = 0; j < m; ++j) {
            const __m256d T = _mm256_set1_pd(hi.f_period[j]);
            const __m256d D = _mm256_set1_pd(hi.f_deadline[j]);
            const __m256d cl = _mm256_set1_pd(hi.f_wcet_lo[j]);
            const __m256d ch = _mm256_set1_pd(hi.f_wcet_hi[j]);
            const __m256d slack = _mm256_set1_pd(hi.f_deadline[j] - hi.f_tight[j]);
            const __m256d q = floor_div(t, T);
            const __m256d r = _mm256_fnmadd_pd(q, T, t);
            const __m256d done = _mm256_and_pd(_mm256_cmp_pd(r, D, _CMP_GE_OQ), one);
            d = _mm256_fmadd_pd(_mm256_add_pd(q, done), ch, d);
            const __m256d in_s = _mm256_and_pd(_mm256_cmp_pd(r, D, _CMP_LT_OQ), _mm256_cmp_pd(r, slack, _CMP_GT_OQ));
            const __m256d co = _mm256_min_pd(cl, _mm256_sub_pd(r, slack));
            const __m256d extra = _mm256_add_pd(_mm256_sub_pd(ch, cl), co);
            d = _mm256_add_pd(d, _mm256_and_pd(in_s, extra));
        }
        store(_mm256_sub_pd(d, t), std::min<std::size_t>(4, n - i), out + i);
    }
}

void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out)
{
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d delta = _mm256_set1_pd(static_cast<double>(f.delta));
    const __m256d cap = _mm256_set1_pd(static_cast<double>(f.un_cap));
    const __m256d hc0 = _mm256_set1_pd(static_cast<double>(f.hc_sum));
    const std::size_t nc = f.c_period.size();
    const std::size_t nh = f.h_period.size();
    for (std::size_t i = 0; i < n; i += 4) {
        const __m256d t1 = lanes(t0 + static_cast<Ticks>(i));
        __m256d un = zero;
        __m256d lc = zero;
        for (std::size_t j = 0; j < nc; ++j) {
            const __m256d T = _mm256_set1_pd(f.f_c_period[j]);
            const __m256d dl = _mm256_set1_pd(f.f_c_tight[j]);
            const __m256d c = _mm256_set1_pd(f.f_c_wcet_lo[j]);
            const __m256d q = floor_div(t1, T);
            const __m256d r = _mm256_fnmadd_pd(q, T, t1);
            const __m256d done = _mm256_and_pd(_mm256_cmp_pd(r, dl, _CMP_GE_OQ), one);
            lc = _mm256_fmadd_pd(_mm256_add_pd(q, done), c, lc);
            const __m256d open = _mm256_and_pd(_mm256_cmp_pd(r, dl, _CMP_LT_OQ),
                                               _mm256_cmp_pd(_mm256_sub_pd(dl, r), delta, _CMP_LE_OQ));
            un = _mm256_add_pd(un, _mm256_and_pd(open, _mm256_min_pd(c, r)));
        }
        __m256d hc = hc0;
        const __m256d end = _mm256_add_pd(t1, delta);
        for (std::size_t j = 0; j < nh; ++j) {
            const __m256d T = _mm256_set1_pd(f.f_h_period[j]);
            const __m256d D = _mm256_set1_pd(f.f_h_deadline[j]);
            const __m256d c = _mm256_set1_pd(f.f_h_wcet_lo[j]);
            const __m256d base1 = _mm256_set1_pd(f.f_h_base[j] + 1.0);
            const __m256d a = floor_div(_mm256_sub_pd(end, D), T);
            const __m256d jobs = _mm256_max_pd(_mm256_sub_pd(a, base1), zero);
            lc = _mm256_fmadd_pd(jobs, c, lc);
            const __m256d c2 = _mm256_cmp_pd(t1, _mm256_set1_pd(f.f_h_case2_from[j]), _CMP_GE_OQ);
            lc = _mm256_add_pd(lc, _mm256_blendv_pd(_mm256_set1_pd(f.f_h_case3_co[j]),
                                                    _mm256_set1_pd(f.f_h_case2_lc[j]), c2));
            hc = _mm256_add_pd(hc, _mm256_and_pd(c2, _mm256_set1_pd(f.f_h_case2_hc[j])));
        }
        __m256d demand;
        if (variant == PairVariant::Improved)
            demand = _mm256_add_pd(_mm256_min_pd(t1, _mm256_add_pd(_mm256_min_pd(cap, un), lc)), hc);
        else
            demand = _mm256_add_pd(_mm256_add_pd(un, lc), hc);
        store(_mm256_sub_pd(_mm256_sub_pd(demand, t1), delta), std::min<std::size_t>(4, n - i), out + i);
    }
}

}  // namespace mcs::kernels::avx2
