#include "mcs/schedulability.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

namespace mcs {

namespace tick {

namespace {

using kernels::PairVariant;

constexpr Ticks kNone = std::numeric_limits<Ticks>::max();
// Cap on any single unbounded scan (U == 1 without a usable hyperperiod).
constexpr Ticks kScanCap = Ticks{1} << 34;
constexpr Ticks kStep = Ticks{1} << 14;

template <class F>
Ticks chunked(F&& first_failure, Ticks from, Ticks to, const Budget* budget, Ticks* excess)
{
    for (Ticks lo = from; lo <= to; lo += kStep) {
        poll(budget);
        const Ticks hi = std::min(to, lo + kStep - 1);
        const Ticks r = first_failure(lo, hi, excess);
        if (r >= 0)
            return r;
        if (hi == to)
            break;
    }
    return -1;
}

Rational u_of(Ticks c, Ticks period)
{
    return make_rational(c, period);
}

Ticks floor_ticks(const Rational& r)
{
    return to_int64(floor_of(r));
}

Ticks ceil_ticks(const Rational& r)
{
    return to_int64(ceil_of(r));
}

// Upper end of a single-instant sweep. Returns -1 when no finite bound applies.
//   U < 1: busy-period / hyperperiod bound.
//   U > 1: linear lower bound on demand crosses t no later than sum(u*d)/(U-1).
//   U = 1: demand minus t is periodic with the hyperperiod.
Ticks sweep_end(const TickSet& ts, Mode mode, const Limits& lim)
{
    if (lim.t_max)
        return *lim.t_max;
    const HorizonProbe p = probe_horizon(ts, mode);
    if (!p.overloaded)
        return p.horizon.t_max;
    if (p.utilization > 1) {
        Rational s = 0;
        for (const auto& k : ts.tasks) {
            if (mode == Mode::HC && !k.hi)
                continue;
            const Ticks c = mode == Mode::LC ? k.wcet_lo : k.wcet_hi;
            const Ticks d = mode == Mode::LC ? k.tight : k.deadline;
            s += u_of(c, k.period) * make_rational(d);
        }
        return floor_ticks(s / (p.utilization - 1)) + 1 + ts.max_deadline();
    }
    if (p.hyperperiod_bound > 0 && p.hyperperiod_bound <= kScanCap)
        return p.hyperperiod_bound;
    return -1;
}

}  // namespace

Check lc(const TickSet& ts, const Limits& lim)
{
    Check out;
    const Ticks end = sweep_end(ts, Mode::LC, lim);
    if (end < 0) {
        out.ok = false;
        out.note = "horizon";
        return out;
    }
    const kernels::Columns cols = kernels::make_columns(ts);
    Ticks ex = 0;
    const Ticks t = chunked([&](Ticks a, Ticks b, Ticks* e) { return kernels::lc_first_failure(cols, a, b, e); }, 1,
                            end, lim.budget, &ex);
    if (t >= 0) {
        out.ok = false;
        out.t2 = t;
        out.lhs = ex + t;
    }
    return out;
}

Check prior(const TickSet& ts, const Limits& lim)
{
    Check out;
    if (ts.hi_count() == 0) {
        out.note = "no HI tasks";
        return out;
    }
    const Ticks end = sweep_end(ts, Mode::HC, lim);
    if (end < 0) {
        out.ok = false;
        out.note = "horizon";
        return out;
    }
    const kernels::Columns cols = kernels::make_hi_columns(ts);
    Ticks ex = 0;
    const Ticks t = chunked([&](Ticks a, Ticks b, Ticks* e) { return kernels::prior_first_failure(cols, a, b, e); },
                            1, end, lim.budget, &ex);
    if (t >= 0) {
        out.ok = false;
        out.t2 = t;
        out.lhs = ex + t;
    }
    return out;
}

Ticks prior_lhs(const TickSet& ts, Ticks t)
{
    Ticks d = 0;
    for (const auto& k : ts.tasks) {
        if (!k.hi)
            continue;
        d += ticks::dbf_hc(k, t);
        if (ticks::in_carry_set(k, t))
            d += k.wcet_hi - k.wcet_lo + ticks::carry_over(k, t);
    }
    return d;
}

Ticks pair_lhs(const TickSet& ts, PairVariant v, Ticks t1, Ticks t2)
{
    Ticks un = 0, before = 0, cap = 0, lpart = 0, hpart = 0;
    for (const auto& k : ts.tasks) {
        const CarryCase c = k.hi ? ticks::classify(k, t1, t2) : CarryCase::Case1;
        if (c == CarryCase::Case1) {
            before += ticks::dbf_lc(k, t1);
            un += ticks::unnecessary(k, t1, t2);
            cap = std::max(cap, k.tight);
            continue;
        }
        const ticks::PairParts p = ticks::pair_parts(k, t1, t2, c);
        if (v == PairVariant::New) {
            hpart += p.lc + p.hc + p.co;
        } else if (c == CarryCase::Case2) {
            const Ticks co = ticks::carry_over(k, t2 - t1);
            lpart += std::max<Ticks>(0, p.lc + k.wcet_lo - co);
            hpart += p.hc + co + k.wcet_hi - k.wcet_lo;
        } else {
            lpart += p.lc + p.co;
            hpart += p.hc;
        }
    }
    if (v == PairVariant::New)
        return un + before + hpart;
    return std::min(t1, std::min(cap, un) + before + lpart) + hpart;
}

namespace {

struct PairSetup {
    bool done = false;
    Check result;
    Ticks min_slack = 0;
    Rational u_lc, u_hh;
    Rational k_lc;   // sum over all tasks of u^L (T - D^L) + C^L
    Rational k_all;  // k_lc plus sum over HI of u^H (T - D) + C^H
    Ticks t2_limit = kNone;
    bool lc_overload = false;  // U_L >= 1: no finite bound on t1
};

Check lc_overloaded()
{
    Check c;
    c.ok = false;
    c.note = "lc-overload";
    return c;
}

// Common preamble of both pair sweeps: vacuous and overloaded cases, the
// utilization constants, and the t2 cap for overloaded HC behaviour.
PairSetup pair_setup(const TickSet& ts, const Limits& lim,
                     const std::function<Ticks(Ticks)>& column_excess)
{
    PairSetup s;
    if (ts.hi_count() == 0) {
        s.done = true;
        s.result.note = "no HI tasks";
        return s;
    }
    s.min_slack = ts.min_hi_slack();
    Rational hc_extra = 0;
    Rational hc_d = 0;
    for (const auto& k : ts.tasks) {
        const Rational ul = u_of(k.wcet_lo, k.period);
        s.u_lc += ul;
        s.k_lc += ul * make_rational(k.period - k.tight) + make_rational(k.wcet_lo);
        if (k.hi) {
            const Rational uh = u_of(k.wcet_hi, k.period);
            s.u_hh += uh;
            hc_extra += uh * make_rational(k.period - k.deadline) + make_rational(k.wcet_hi);
            hc_d += uh * make_rational(k.deadline);
        }
    }
    s.k_all = s.k_lc + hc_extra;
    s.lc_overload = s.u_lc >= 1;
    if (lim.t_max) {
        s.t2_limit = *lim.t_max;
        return s;
    }
    if (s.u_hh >= 1) {
        // The t1 = 0 column is pure HC behaviour; with U_HH >= 1 it must fail
        // (or repeat with the hyperperiod), and no later t2 can be the witness.
        Ticks end;
        if (s.u_hh > 1) {
            Ticks max_slack = 0;
            for (const auto& k : ts.tasks)
                if (k.hi)
                    max_slack = std::max(max_slack, k.deadline - k.tight);
            end = std::max(max_slack, floor_ticks(hc_d / (s.u_hh - 1))) + 1 + ts.max_deadline();
        } else {
            const HorizonProbe p = probe_horizon(ts, Mode::HC);
            end = p.hyperperiod_bound > 0 && p.hyperperiod_bound <= kScanCap ? p.hyperperiod_bound : -1;
        }
        Ticks found = -1;
        for (Ticks t2 = s.min_slack + 1; end >= 0 && t2 <= end; ++t2) {
            if ((t2 & 0xfff) == 0)
                poll(lim.budget);
            if (column_excess(t2) > 0) {
                found = t2;
                break;
            }
        }
        if (found < 0) {
            s.done = true;
            s.result.ok = false;
            s.result.note = "horizon";
            return s;
        }
        s.t2_limit = found;
    }
    return s;
}

}  // namespace

Check pair(const TickSet& ts, PairVariant v, const Limits& lim)
{
    if (v == PairVariant::Improved && !lim.t_max && ts.hi_count() > 0) {
        // U_HH == 1: the prior excess repeats with the hyperperiod, so one
        // period without a positive value rules out every window length.
        const HorizonProbe hp = probe_horizon(ts, Mode::HC);
        if (hp.overloaded && hp.utilization == 1 && hp.hyperperiod_bound > 0 && hp.hyperperiod_bound <= kScanCap) {
            const kernels::Columns hi = kernels::make_hi_columns(ts);
            const Ticks from = ts.min_hi_slack() + 1;
            const Ticks hit = chunked(
                [&](Ticks a, Ticks b, Ticks* e) { return kernels::prior_first_failure(hi, a, b, e); }, from,
                from + hp.hyperperiod_bound, lim.budget, nullptr);
            if (hit < 0)
                return Check{};
        }
    }
    auto column = [&](Ticks t2) { return pair_lhs(ts, v, 0, t2) - t2; };
    PairSetup s = pair_setup(ts, lim, column);
    if (s.done)
        return s.result;
    if (s.lc_overload && v == PairVariant::New)
        return lc_overloaded();

    const Rational one_l = Rational(1) - s.u_lc;
    const Rational one_h = Rational(1) - s.u_hh;

    // Window lengths to inspect and, for the improved test, the prior excess
    // at each one: the improved excess at (t1, t1 + delta) never exceeds it.
    Ticks delta_max = s.t2_limit;
    if (s.t2_limit == kNone) {
        if (v == PairVariant::Improved) {
            Rational num = 0;
            for (const auto& k : ts.tasks)
                if (k.hi)
                    num += u_of(k.wcet_hi, k.period) * make_rational(k.period - k.deadline)
                        + make_rational(k.wcet_hi);
            delta_max = ceil_ticks(num / one_h);
        } else {
            delta_max = ceil_ticks(s.k_all / one_h) - 1;
        }
    }
    const Ticks delta_min = s.min_slack + 1;
    if (delta_max < delta_min)
        return s.result;

    std::vector<Ticks> prior_ex;
    if (v == PairVariant::Improved) {
        const kernels::Columns hi = kernels::make_hi_columns(ts);
        prior_ex.resize(static_cast<std::size_t>(delta_max - delta_min + 1));
        for (Ticks a = delta_min; a <= delta_max; a += kStep) {
            poll(lim.budget);
            const Ticks n = std::min(kStep, delta_max - a + 1);
            kernels::prior_excess_batch(hi, a, static_cast<std::size_t>(n),
                                        prior_ex.data() + (a - delta_min));
        }
    }

    Ticks best_t1 = -1, best_t2 = kNone, best_ex = 0;
    for (Ticks delta = delta_min; delta <= delta_max; ++delta) {
        if (best_t2 != kNone && delta > best_t2)
            break;
        Ticks t1_hi;
        if (v == PairVariant::Improved) {
            const Ticks e = prior_ex[static_cast<std::size_t>(delta - delta_min)];
            if (e <= 0)
                continue;
            t1_hi = s.lc_overload ? kNone : ceil_ticks((s.k_lc + make_rational(e)) / one_l) - 1;
        } else {
            t1_hi = ceil_ticks((s.k_all - one_h * make_rational(delta)) / one_l) - 1;
        }
        if (s.t2_limit != kNone)
            t1_hi = std::min(t1_hi, s.t2_limit - delta);
        if (best_t2 != kNone)
            t1_hi = std::min(t1_hi, best_t2 - delta);
        if (t1_hi < 0)
            continue;
        if ((delta & 0xff) == 0)
            poll(lim.budget);
        const kernels::PairFrame frame = kernels::make_pair_frame(ts, delta, v);
        if (v == PairVariant::Improved) {
            // The capped LC part never exceeds t1, so the HC side alone bounds the excess.
            Ticks h = frame.hc_sum;
            for (std::size_t j = 0; j < frame.h_case2_hc.size(); ++j)
                if (frame.h_case2_from[j] <= t1_hi)
                    h += frame.h_case2_hc[j];
            if (h <= delta)
                continue;
            if (s.lc_overload)
                return lc_overloaded();
        }
        Ticks ex = 0;
        const Ticks t1 = chunked(
            [&](Ticks a, Ticks b, Ticks* e) { return kernels::pair_first_failure(frame, v, a, b, e); }, 0, t1_hi,
            lim.budget, &ex);
        if (t1 < 0)
            continue;
        const Ticks t2 = t1 + delta;
        if (best_t2 == kNone || t2 < best_t2 || (t2 == best_t2 && t1 < best_t1)) {
            best_t1 = t1;
            best_t2 = t2;
            best_ex = ex;
        }
    }
    Check out;
    if (best_t2 != kNone) {
        out.ok = false;
        out.t1 = best_t1;
        out.t2 = best_t2;
        out.lhs = best_ex + best_t2;
    }
    return out;
}

Check pair_literal(const TickSet& ts, PairVariant v, const Limits& lim)
{
    auto column = [&](Ticks t2) { return pair_lhs(ts, v, 0, t2) - t2; };
    PairSetup s = pair_setup(ts, lim, column);
    if (s.done)
        return s.result;
    if (s.lc_overload)
        return lc_overloaded();
    Ticks t2_end = s.t2_limit;
    if (t2_end == kNone) {
        const Ticks t1_max = ceil_ticks(s.k_all / (Rational(1) - s.u_lc)) - 1;
        const Ticks delta_max = ceil_ticks(s.k_all / (Rational(1) - s.u_hh)) - 1;
        t2_end = t1_max + delta_max;
    }
    Check out;
    for (Ticks t2 = s.min_slack + 1; t2 <= t2_end; ++t2) {
        if ((t2 & 0x3f) == 0)
            poll(lim.budget);
        for (Ticks t1 = 0; t1 < t2 - s.min_slack; ++t1) {
            const Ticks lhs = pair_lhs(ts, v, t1, t2);
            if (lhs > t2) {
                out.ok = false;
                out.t1 = t1;
                out.t2 = t2;
                out.lhs = lhs;
                return out;
            }
        }
    }
    return out;
}

}  // namespace tick

namespace {

tick::Limits limits_for(const TickSet& k, const SweepOptions& opt)
{
    tick::Limits lim;
    lim.budget = opt.budget;
    if (opt.t_max) {
        const __int128 v = static_cast<__int128>(*opt.t_max) * k.scale;
        if (v > kMaxTickValue)
            throw TimebaseOverflow("--t-max exceeds the supported tick range");
        lim.t_max = static_cast<Ticks>(v);
    }
    return lim;
}

Verdict to_verdict(std::string name, const tick::Check& c, Ticks scale)
{
    Verdict v;
    v.test_name = std::move(name);
    v.schedulable = c.ok;
    v.note = c.note;
    if (!c.ok && c.t2 >= 0) {
        Witness w;
        if (c.t1 >= 0)
            w.t1 = ticks_to_time(c.t1, scale);
        w.t2 = ticks_to_time(c.t2, scale);
        v.witness = w;
        v.lhs_at_witness = ticks_to_time(c.lhs, scale);
    }
    return v;
}

Rational per(std::int64_t v)
{
    return make_rational(v);
}

}  // namespace

Verdict lc_test(const TaskSet& ts, const SweepOptions& opt)
{
    const TickSet k = to_ticks(ts);
    return to_verdict("lc", tick::lc(k, limits_for(k, opt)), k.scale);
}

Verdict hc_test_prior(const TaskSet& ts, const SweepOptions& opt)
{
    const TickSet k = to_ticks(ts);
    return to_verdict("prior", tick::prior(k, limits_for(k, opt)), k.scale);
}

Verdict hc_test_new(const TaskSet& ts, const SweepOptions& opt)
{
    const TickSet k = to_ticks(ts);
    const tick::Limits lim = limits_for(k, opt);
    const auto c = opt.integer_grid ? tick::pair_literal(k, kernels::PairVariant::New, lim)
                                    : tick::pair(k, kernels::PairVariant::New, lim);
    return to_verdict("new", c, k.scale);
}

Verdict hc_test_improved(const TaskSet& ts, const SweepOptions& opt)
{
    const TickSet k = to_ticks(ts);
    const tick::Limits lim = limits_for(k, opt);
    const auto c = opt.integer_grid ? tick::pair_literal(k, kernels::PairVariant::Improved, lim)
                                    : tick::pair(k, kernels::PairVariant::Improved, lim);
    return to_verdict("improved", c, k.scale);
}

Verdict edfvd_test(const TaskSet& ts)
{
    if (!ts.implicit_deadlines())
        throw NotImplicitDeadline("EDF-VD test needs D = T for every task");
    const UtilizationSummary u = utilizations(ts);
    Verdict v;
    v.test_name = "edfvd";
    if (u.u_lo_lo >= 1) {
        v.lhs_at_witness = u.u_lo_lo + u.u_hi_lo;
        v.schedulable = u.u_hi_hi == 0 && v.lhs_at_witness <= 1;
        v.note = "lc-overload";
        return v;
    }
    v.lhs_at_witness = u.u_hi_hi + u.u_hi_lo * u.u_lo_lo / (Rational(1) - u.u_lo_lo);
    v.schedulable = u.u_lo_lo + u.u_hi_lo <= 1 && u.u_hi_hi <= 1 && v.lhs_at_witness <= 1;
    return v;
}

namespace {

bool contributes(const Task& t, const Rational& t1, const Rational& t2)
{
    return !t.is_hi() || classify_case(t, t1, t2) == CarryCase::Case1;
}

}  // namespace

Rational unnecessary_total(const TaskSet& ts, const Rational& t1, const Rational& t2)
{
    Rational cap = 0;
    Rational sum = 0;
    bool any = false;
    for (const auto& t : ts) {
        if (!contributes(t, t1, t2))
            continue;
        any = true;
        cap = std::max(cap, t.tight_deadline);
        sum += dbf_unnecessary(t, t1, t2);
    }
    return any ? std::min(cap, sum) : Rational(0);
}

LcFloors lc_floor_demands(const TaskSet& ts, const Rational& t1, const Rational& t2)
{
    LcFloors f;
    f.l1 = unnecessary_total(ts, t1, t2);
    for (const auto& t : ts) {
        if (contributes(t, t1, t2)) {
            f.l1 += dbf_lc(t, t1);
            continue;
        }
        const PairDemand p = pair_demand(t, t1, t2);
        if (classify_case(t, t1, t2) == CarryCase::Case2) {
            const Rational share = p.lc_part + per(t.wcet_lo) - carry_over_cap(t, t2 - t1);
            f.l2 += share > 0 ? share : Rational(0);
        } else {
            f.l3 += p.lc_part + p.co_part;
        }
    }
    return f;
}

Rational prior_demand(const TaskSet& ts, const Rational& t)
{
    Rational d = 0;
    for (const auto& task : ts) {
        if (!task.is_hi())
            continue;
        d += dbf_hc(task, t);
        if (in_carry_set(task, t))
            d += per(task.wcet_hi - task.wcet_lo) + carry_over_cap(task, t);
    }
    return d;
}

Rational new_demand(const TaskSet& ts, const Rational& t1, const Rational& t2)
{
    Rational d = 0;
    for (const auto& t : ts) {
        if (contributes(t, t1, t2))
            d += dbf_lc(t, t1) + dbf_unnecessary(t, t1, t2);
        else
            d += pair_demand(t, t1, t2).total();
    }
    return d;
}

Rational improved_demand(const TaskSet& ts, const Rational& t1, const Rational& t2)
{
    const LcFloors f = lc_floor_demands(ts, t1, t2);
    Rational h = 0;
    for (const auto& t : ts) {
        if (contributes(t, t1, t2))
            continue;
        h += pair_demand(t, t1, t2).hc_part;
        if (classify_case(t, t1, t2) == CarryCase::Case2)
            h += carry_over_cap(t, t2 - t1) + per(t.wcet_hi - t.wcet_lo);
    }
    return std::min(t1, f.total()) + h;
}

}  // namespace mcs
