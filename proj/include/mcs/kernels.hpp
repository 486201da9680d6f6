#pragma once

// Batched demand kernels. Each kernel evaluates one demand expression at a
// contiguous run of tick values and writes the excess (demand - bound) per
// point; the callers scan for the first positive entry.
//
// Two implementations share one contract: a scalar int64 reference and an
// AVX2 version that runs four points per instruction on doubles. Doubles are
// exact here because every scaled value stays below 2^41 (timebase.hpp).

#include "mcs/timebase.hpp"

#include <cstddef>
#include <vector>

namespace mcs::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

// Best ISA the CPU supports, unless MCS_SIMD=scalar is set.
Isa detected_isa();
Isa active_isa();
// Pins the ISA for the rest of the process (tests, benchmarking).
void set_isa(Isa isa);
bool avx2_available();

/// Per-task columns, one entry per task in the owning TickSet's order.
struct Columns {
    std::vector<Ticks> period, deadline, tight, wcet_lo, wcet_hi;
    std::vector<double> f_period, f_deadline, f_tight, f_wcet_lo, f_wcet_hi;
    std::vector<unsigned char> hi;
    std::size_t size() const { return period.size(); }
};

Columns make_columns(const TickSet& ts);
// Only HI tasks, for the HC-only sums.
Columns make_hi_columns(const TickSet& ts);

/// Constants of the (t1, t2) demand for one fixed window length delta = t2 - t1.
///
/// "Contributors" are LO tasks and HI tasks whose slack D - D^L covers the
/// window (case1); they add LC demand before t1 and unnecessary-job demand.
/// The remaining HI tasks carry per-delta terms and a case2 threshold on t1.
struct PairFrame {
    Ticks delta = 0;

    std::vector<Ticks> c_period, c_tight, c_wcet_lo;
    std::vector<double> f_c_period, f_c_tight, f_c_wcet_lo;
    Ticks un_cap = 0;  // max D^L over contributors

    std::vector<Ticks> h_period, h_deadline, h_wcet_lo, h_base;
    std::vector<Ticks> h_case2_from;  // smallest t1 where case2 applies; huge when never
    std::vector<Ticks> h_case2_lc;    // LC floor share of a case2 task: C^L - CO
    std::vector<Ticks> h_case2_hc;    // improved: CO + C^H - C^L; new: C^H
    std::vector<Ticks> h_case3_co;    // C^L
    std::vector<double> f_h_period, f_h_deadline, f_h_wcet_lo, f_h_base, f_h_case2_from, f_h_case2_lc,
        f_h_case2_hc, f_h_case3_co;
    Ticks hc_sum = 0;  // sum of full HC jobs inside the window
};

enum class PairVariant { Improved, New };

PairFrame make_pair_frame(const TickSet& ts, Ticks delta, PairVariant variant);

// out[i] = sum_j dbf^L_j(t0 + i) - (t0 + i)
void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out);
// out[i] = prior HC demand at t0 + i minus (t0 + i); `hi` holds HI tasks only.
void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out);
// out[i] = pair demand at t1 = t0 + i, t2 = t1 + delta, minus t2.
void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out);

namespace scalar {
void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out);
void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out);
void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out);
}  // namespace scalar

namespace avx2 {
void lc_excess_batch(const Columns& all, Ticks t0, std::size_t n, Ticks* out);
void prior_excess_batch(const Columns& hi, Ticks t0, std::size_t n, Ticks* out);
void pair_excess_batch(const PairFrame& f, PairVariant variant, Ticks t0, std::size_t n, Ticks* out);
}  // namespace avx2

// First t in [from, to] with positive excess, or -1. `excess` receives its value.
Ticks lc_first_failure(const Columns& all, Ticks from, Ticks to, Ticks* excess);
Ticks prior_first_failure(const Columns& hi, Ticks from, Ticks to, Ticks* excess);
Ticks pair_first_failure(const PairFrame& f, PairVariant variant, Ticks from, Ticks to, Ticks* excess);

}  // namespace mcs::kernels
