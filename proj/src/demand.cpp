#include "mcs/demand.hpp"

#include <algorithm>

namespace mcs {

std::string_view to_string(CarryCase c)
{
    switch (c) {
    case CarryCase::Case1: return "case1";
    case CarryCase::Case2: return "case2";
    case CarryCase::Case3: return "case3";
    }
    return "?";
}

std::string_view to_string(HorizonMethod m)
{
    switch (m) {
    case HorizonMethod::UtilizationBound: return "utilization-bound";
    case HorizonMethod::Hyperperiod: return "hyperperiod";
    case HorizonMethod::Configured: return "configured";
    }
    return "?";
}

Overload::Overload(Mode mode, Rational utilization)
    : std::runtime_error(std::string(mode == Mode::LC ? "LC" : "HC") + " utilization " + to_string(utilization)
                         + " >= 1, demand bound diverges"),
      mode_(mode),
      utilization_(std::move(utilization))
{
}

namespace {

Rational floor_q(const Rational& r)
{
    return Rational(floor_of(r));
}

Rational per(std::int64_t v)
{
    return make_rational(v);
}

void require_hi(const Task& task)
{
    if (!task.is_hi())
        throw NotHighCriticality("task " + std::to_string(task.id) + " is not HI");
}

void require_order(const Rational& t1, const Rational& t2)
{
    if (!(t1 < t2))
        throw std::invalid_argument("interval requires t1 < t2");
}

}  // namespace

Rational mod_rem(const Rational& t, std::int64_t period)
{
    const Rational T = per(period);
    return t - floor_q(t / T) * T;
}

Rational dbf_lc(const Task& task, const Rational& t)
{
    const Rational jobs = floor_q((t - task.tight_deadline) / per(task.period)) + 1;
    return jobs > 0 ? Rational(jobs * per(task.wcet_lo)) : Rational(0);
}

Rational dbf_hc(const Task& task, const Rational& t)
{
    require_hi(task);
    const Rational jobs = floor_q((t - per(task.deadline)) / per(task.period)) + 1;
    return jobs > 0 ? Rational(jobs * per(task.wcet_hi)) : Rational(0);
}

bool in_carry_set(const Task& task, const Rational& length)
{
    if (!task.is_hi())
        return false;
    const Rational m = mod_rem(length, task.period);
    return per(task.deadline) > m && m > per(task.deadline) - task.tight_deadline;
}

Rational carry_over_cap(const Task& task, const Rational& length)
{
    require_hi(task);
    if (!in_carry_set(task, length))
        throw NotInCarrySet("task " + std::to_string(task.id) + " has no pending carry-over job for length "
                            + to_string(length));
    const Rational pending = mod_rem(length, task.period) - (per(task.deadline) - task.tight_deadline);
    return std::min(per(task.wcet_lo), pending);
}

CarryCase classify_case(const Task& task, const Rational& t1, const Rational& t2)
{
    require_hi(task);
    require_order(t1, t2);
    const Rational len = t2 - t1;
    const Rational D = per(task.deadline);
    const Rational T = per(task.period);
    if (len <= D - task.tight_deadline)
        return CarryCase::Case1;
    const Rational m = mod_rem(len, task.period);
    if (D - task.tight_deadline < m && m < D && floor_q(len / T) * T + D <= t2)
        return CarryCase::Case2;
    return CarryCase::Case3;
}

Rational dbf_unnecessary(const Task& task, const Rational& t1, const Rational& t2)
{
    require_order(t1, t2);
    if (task.is_hi() && classify_case(task, t1, t2) != CarryCase::Case1)
        throw WrongCase("unnecessary demand applies to LO tasks and HI tasks in case1 only");
    const Rational T = per(task.period);
    const Rational m = mod_rem(t1, task.period);
    if (task.tight_deadline > m && floor_q(t1 / T) * T + task.tight_deadline <= t2)
        return std::min(per(task.wcet_lo), m);
    return 0;
}

PairDemand pair_demand(const Task& task, const Rational& t1, const Rational& t2)
{
    const CarryCase c = classify_case(task, t1, t2);
    if (c == CarryCase::Case1)
        throw WrongCase("pair demand split is defined for case2/case3 tasks only");
    const Rational T = per(task.period);
    const Rational D = per(task.deadline);
    const Rational len = t2 - t1;
    PairDemand p;
    const Rational jobs = floor_q((t2 - D) / T) - floor_q((len - D) / T) - 1;
    p.lc_part = jobs > 0 ? Rational(jobs * per(task.wcet_lo)) : Rational(0);
    const Rational hjobs = floor_q((len - D) / T) + 1;
    p.hc_part = hjobs > 0 ? Rational(hjobs * per(task.wcet_hi)) : Rational(0);
    p.co_part = per(c == CarryCase::Case2 ? task.wcet_hi : task.wcet_lo);
    return p;
}

HorizonProbe probe_horizon(const TickSet& ts, Mode mode)
{
    HorizonProbe out;
    Rational u = 0;
    Rational numer = 0;
    Integer hyper = 1;
    Ticks max_d = 0;
    for (const auto& k : ts.tasks) {
        max_d = std::max(max_d, k.deadline);
        if (mode == Mode::HC && !k.hi)
            continue;
        const Ticks c = mode == Mode::LC ? k.wcet_lo : k.wcet_hi;
        const Ticks d = mode == Mode::LC ? k.tight : k.deadline;
        const Rational ui = make_rational(c, k.period);
        u += ui;
        numer += Rational(Integer(static_cast<long>(k.period - d))) * ui;
        // The HC sweep also has to cover carry-over demand, at most C^H per task.
        if (mode == Mode::HC)
            numer += make_rational(k.wcet_hi);
        if (hyper <= kMaxTickValue) {
            const Integer p(static_cast<long>(k.period));
            mpz_lcm(hyper.get_mpz_t(), hyper.get_mpz_t(), p.get_mpz_t());
        }
    }
    out.utilization = u;
    hyper += static_cast<long>(max_d);
    const bool hyper_ok = hyper <= kMaxTickValue;
    out.hyperperiod_bound = hyper_ok ? to_int64(hyper) : 0;
    if (u >= 1) {
        out.overloaded = true;
        return out;
    }
    const Integer busy = ceil_of(numer / (Rational(1) - u));
    if (hyper_ok && hyper <= busy) {
        out.horizon = {to_int64(hyper), HorizonMethod::Hyperperiod};
    } else {
        if (busy > kMaxTickValue)
            throw TimebaseOverflow("busy-period bound exceeds the supported tick range");
        out.horizon = {to_int64(busy), HorizonMethod::UtilizationBound};
    }
    out.horizon.t_max = std::max(out.horizon.t_max, max_d);
    return out;
}

Horizon analysis_horizon(const TaskSet& ts, Mode mode)
{
    const TickSet k = to_ticks(ts);
    const HorizonProbe p = probe_horizon(k, mode);
    if (p.overloaded)
        throw Overload(mode, p.utilization);
    const Integer t = ceil_of(make_rational(p.horizon.t_max, k.scale));
    return {to_int64(t), p.horizon.method};
}

}  // namespace mcs
