#include "mcs/timebase.hpp"

#include <algorithm>
#include <limits>

namespace mcs {

std::size_t TickSet::hi_count() const
{
    return static_cast<std::size_t>(std::count_if(tasks.begin(), tasks.end(), [](const TickTask& t) { return t.hi; }));
}

Ticks TickSet::max_deadline() const
{
    Ticks m = 0;
    for (const auto& t : tasks)
        m = std::max(m, t.deadline);
    return m;
}

Ticks TickSet::min_hi_slack() const
{
    Ticks m = std::numeric_limits<Ticks>::max();
    for (const auto& t : tasks)
        if (t.hi)
            m = std::min(m, t.deadline - t.tight);
    return m;
}

namespace {

Ticks checked_scale(std::int64_t value, Ticks scale)
{
    const __int128 v = static_cast<__int128>(value) * scale;
    if (v > kMaxTickValue || v < -kMaxTickValue)
        throw TimebaseOverflow("scaled time value exceeds the supported tick range");
    return static_cast<Ticks>(v);
}

}  // namespace

TickSet to_ticks(const TaskSet& ts)
{
    Integer lcm = 1;
    for (const auto& t : ts) {
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), t.tight_deadline.get_den_mpz_t());
        if (lcm > kMaxTickValue)
            throw TimebaseOverflow("tight deadline denominators need a timebase finer than supported");
    }
    TickSet out;
    out.scale = to_int64(lcm);
    out.tasks.reserve(ts.size());
    for (const auto& t : ts) {
        TickTask k;
        k.id = t.id;
        k.hi = t.is_hi();
        k.period = checked_scale(t.period, out.scale);
        k.deadline = checked_scale(t.deadline, out.scale);
        k.wcet_lo = checked_scale(t.wcet_lo, out.scale);
        k.wcet_hi = checked_scale(t.wcet_hi, out.scale);
        k.tight = time_to_ticks(t.tight_deadline, out.scale);
        out.tasks.push_back(k);
    }
    return out;
}

TaskSet from_ticks(const TaskSet& like, const TickSet& ticks)
{
    std::vector<Task> tasks = like.tasks();
    for (std::size_t i = 0; i < tasks.size(); ++i)
        tasks[i].tight_deadline = ticks_to_time(ticks.tasks.at(i).tight, ticks.scale);
    return TaskSet(std::move(tasks));
}

Rational ticks_to_time(Ticks t, Ticks scale)
{
    return make_rational(t, scale);
}

Ticks time_to_ticks(const Rational& t, Ticks scale)
{
    Rational scaled = t * Rational(Integer(static_cast<long>(scale)));
    if (scaled.get_den() != 1)
        throw TimebaseOverflow("time value " + to_string(t) + " is not on the tick grid");
    const Integer& z = scaled.get_num();
    if (z > kMaxTickValue || z < -kMaxTickValue)
        throw TimebaseOverflow("time value exceeds the supported tick range");
    return to_int64(z);
}

}  // namespace mcs
