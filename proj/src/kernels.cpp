#include "mcs/kernels.hpp"

#include "mcs/demand.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace mcs::kernels {

const char* to_string(Isa isa)
{
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool avx2_available()
{
#if defined(MCS_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detected_isa()
{
    const char* env = std::getenv("MCS_SIMD");
    if (env && std::strcmp(env, "scalar") == 0)
        return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

namespace {

std::atomic<int> g_isa{-1};

}  // namespace

Isa active_isa()
{
    int v = g_isa.load(std::memory_order_relaxed);
    if (v < 0) {
        v = static_cast<int>(detected_isa());
        g_isa.store(v, std::memory_order_relaxed);
    }
    return static_cast<Isa>(v);
}

void set_isa(Isa isa)
{
    if (isa == Isa::Avx2 && !avx2_available())
        isa = Isa::Scalar;
    g_isa.store(static_cast<int>(isa), std::memory_order_relaxed);
}

namespace {

void push(Columns& c, const TickTask& k)
{
    c.period.push_back(k.period);
    c.deadline.push_back(k.deadline);
    c.tight.push_back(k.tight);
    c.wcet_lo.push_back(k.wcet_lo);
    c.wcet_hi.push_back(k.wcet_hi);
    c.f_period.push_back(static_cast<double>(k.period));
    c.f_deadline.push_back(static_cast<double>(k.deadline));
    c.f_tight.push_back(static_cast<double>(k.tight));
    c.f_wcet_lo.push_back(static_cast<double>(k.wcet_lo));
    c.f_wcet_hi.push_back(static_cast<double>(k.wcet_hi));
    c.hi.push_back(k.hi ? 1 : 0);
}

}  // namespace

Columns make_columns(const TickSet& ts)
{
    Columns c;
    for (const auto& k : ts.tasks)
        push(c, k);
    return c;
}

Columns make_hi_columns(const TickSet& ts)
{
    Columns c;
    for (const auto& k : ts.tasks)
        if (k.hi)
            push(c, k);
    return c;
}

PairFrame make_pair_frame(const TickSet& ts, Ticks delta, PairVariant variant)
{
    constexpr Ticks kNever = std::numeric_limits<Ticks>::max() / 4;
    PairFrame f;
    f.delta = delta;
    for (const auto& k : ts.tasks) {
        if (!k.hi || delta <= k.deadline - k.tight) {
            f.c_period.push_back(k.period);
            f.c_tight.push_back(k.tight);
            f.c_wcet_lo.push_back(k.wcet_lo);
            f.un_cap = std::max(f.un_cap, k.tight);
            continue;
        }
        const Ticks base = ticks::floor_div(delta - k.deadline, k.period);
        f.hc_sum += std::max<Ticks>(0, base + 1) * k.wcet_hi;
        f.h_period.push_back(k.period);
        f.h_deadline.push_back(k.deadline);
        f.h_wcet_lo.push_back(k.wcet_lo);
        f.h_base.push_back(base);
        f.h_case3_co.push_back(k.wcet_lo);
        if (ticks::in_carry_set(k, delta)) {
            const Ticks co = ticks::carry_over(k, delta);
            f.h_case2_from.push_back(k.deadline - ticks::mod(delta, k.period));
            f.h_case2_lc.push_back(variant == PairVariant::Improved ? k.wcet_lo - co : 0);
            f.h_case2_hc.push_back(variant == PairVariant::Improved ? co + k.wcet_hi - k.wcet_lo : k.wcet_hi);
        } else {
            f.h_case2_from.push_back(kNever);
            f.h_case2_lc.push_back(0);
            f.h_case2_hc.push_back(0);
        }
    }
    auto cvt = [](const std::vector<Ticks>& v) {
        std::vector<double> d(v.size());
        std::transform(v.begin(), v.end(), d.begin(), [](Ticks x) { return static_cast<double>(x); });
        return d;
    };
    f.f_c_period = cvt(f.c_period);
    f.f_c_tight = cvt(f.c_tight);
    f.f_c_wcet_lo = cvt(f.c_wcet_lo);
    f.f_h_period = cvt(f.h_period);
    f.f_h_deadline = cvt(f.h_deadline);
    f.f_h_wcet_lo = cvt(f.h_wcet_lo);
    f.f_h_base = cvt(f.h_base);
    f.f_h_case2_from = cvt(f.h_case2_from);
    f.f_h_case2_lc = cvt(f.h_case2_lc);
    f.f_h_case2_hc = cvt(f.h_case2_hc);
    f.f_h_case3_co = cvt(f.h_case3_co);
    return f;
}

namespace scalar {

void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out)
{
    for (std::size_t i = 0; i < n; ++i) {
        const Ticks t = t0 + static_cast<Ticks>(i);
        Ticks d = 0;
        for (std::size_t j = 0; j < all.size(); ++j) {
            const Ticks q = ticks::floor_div(t - all.tight[j], all.period[j]) + 1;
            if (q > 0)
                d += q * all.wcet_lo[j];
        }
        out[i] = d - t;
    }
}

void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out)
{
    for (std::size_t i = 0; i < n; ++i) {
        const Ticks t = t0 + static_cast<Ticks>(i);
        Ticks d = 0;
        for (std::size_t j = 0; j < hi.size(); ++j) {
            const Ticks q = t / hi.period[j];
            const Ticks m = t - q * hi.period[j];
            d += (q + (m >= hi.deadline[j] ? 1 : 0)) * hi.wcet_hi[j];
            const Ticks slack = hi.deadline[j] - hi.tight[j];
            if (m < hi.deadline[j] && m > slack)
                d += hi.wcet_hi[j] - hi.wcet_lo[j] + std::min(hi.wcet_lo[j], m - slack);
        }
        out[i] = d - t;
    }
}

void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out)
{
    const Ticks delta = f.delta;
    for (std::size_t i = 0; i < n; ++i) {
        const Ticks t1 = t0 + static_cast<Ticks>(i);
        Ticks un = 0;
        Ticks lc = 0;
        for (std::size_t j = 0; j < f.c_period.size(); ++j) {
            const Ticks q = t1 / f.c_period[j];
            const Ticks m = t1 - q * f.c_period[j];
            const Ticks dl = f.c_tight[j];
            lc += (q + (m >= dl ? 1 : 0)) * f.c_wcet_lo[j];
            if (m < dl && dl - m <= delta)
                un += std::min(f.c_wcet_lo[j], m);
        }
        Ticks hc = f.hc_sum;
        for (std::size_t j = 0; j < f.h_period.size(); ++j) {
            const Ticks a = ticks::floor_div(t1 + delta - f.h_deadline[j], f.h_period[j]);
            lc += std::max<Ticks>(0, a - f.h_base[j] - 1) * f.h_wcet_lo[j];
            if (t1 >= f.h_case2_from[j]) {
                lc += f.h_case2_lc[j];
                hc += f.h_case2_hc[j];
            } else {
                lc += f.h_case3_co[j];
            }
        }
        Ticks demand;
        if (variant == PairVariant::Improved)
            demand = std::min(t1, std::min(f.un_cap, un) + lc) + hc;
        else
            demand = un + lc + hc;
        out[i] = demand - t1 - delta;
    }
}

}  // namespace scalar

#if !defined(MCS_HAVE_AVX2)
// No vector path on this target; avx2_available() is false so these are never selected.
namespace avx2 {
void lc_excess_batch(const Columns& a, Ticks t0, std::size_t n, Ticks* o) { scalar::lc_excess_batch(a, t0, n, o); }
void prior_excess_batch(const Columns& h, Ticks t0, std::size_t n, Ticks* o) { scalar::prior_excess_batch(h, t0, n, o); }
void pair_excess_batch(const PairFrame& f, PairVariant v, Ticks t0, std::size_t n, Ticks* o)
{
    scalar::pair_excess_batch(f, v, t0, n, o);
}
}  // namespace avx2
#endif

void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out)
{
    if (active_isa() == Isa::Avx2)
        avx2::lc_excess_batch(all, t0, n, out);
    else
        scalar::lc_excess_batch(all, t0, n, out);
}

void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out)
{
    if (active_isa() == Isa::Avx2)
        avx2::prior_excess_batch(hi, t0, n, out);
    else
        scalar::prior_excess_batch(hi, t0, n, out);
}

void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out)
{
    if (active_isa() == Isa::Avx2)
        avx2::pair_excess_batch(f, variant, t0, n, out);
    else
        scalar::pair_excess_batch(f, variant, t0, n, out);
}

namespace {

constexpr std::size_t kChunk = 256;

template <class Batch>
Ticks first_positive(Batch&& batch, Ticks from, Ticks to, Ticks* excess)
{
    std::array<Ticks, kChunk> buf;
    for (Ticks t = from; t <= to; t += static_cast<Ticks>(kChunk)) {
        const std::size_t n = static_cast<std::size_t>(std::min<Ticks>(kChunk, to - t + 1));
        batch(t, n, buf.data());
        for (std::size_t i = 0; i < n; ++i)
            if (buf[i] > 0) {
                if (excess)
                    *excess = buf[i];
                return t + static_cast<Ticks>(i);
            }
    }
    return -1;
}

}  // namespace

Ticks lc_first_failure(const Columns& all, Ticks from, Ticks to, Ticks* excess)
{
    return first_positive([&](Ticks t, std::size_t n, Ticks* o) { lc_excess_batch(all, t, n, o); }, from, to, excess);
}

Ticks prior_first_failure(const Columns& hi, Ticks from, Ticks to, Ticks* excess)
{
    return first_positive([&](Ticks t, std::size_t n, Ticks* o) { prior_excess_batch(hi, t, n, o); }, from, to,
                          excess);
}

Ticks pair_first_failure(const PairFrame& f, PairVariant variant, Ticks from, Ticks to, Ticks* excess)
{
    return first_positive([&](Ticks t, std::size_t n, Ticks* o) { pair_excess_batch(f, variant, t, n, o); }, from,
                          to, excess);
}

}  // namespace mcs::kernels
