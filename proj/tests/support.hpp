#pragma once

// Small helpers shared by the unit tests. The random sets here are built
// independently of the gen module so that generator bugs cannot hide
// analysis bugs.

#include "mcs/model.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace support {

inline mcs::Task task(int id, std::int64_t period, std::int64_t deadline, mcs::Criticality crit, std::int64_t c_lo,
                      std::int64_t c_hi)
{
    mcs::RawTask r;
    r.id = id;
    r.period = period;
    r.deadline = deadline;
    r.criticality = crit;
    r.wcet_lo = c_lo;
    r.wcet_hi = c_hi;
    return mcs::validate_task(r);
}

inline mcs::Task hi(int id, std::int64_t T, std::int64_t D, std::int64_t cl, std::int64_t ch)
{
    return task(id, T, D, mcs::Criticality::HI, cl, ch);
}

inline mcs::Task lo(int id, std::int64_t T, std::int64_t D, std::int64_t c)
{
    return task(id, T, D, mcs::Criticality::LO, c, c);
}

inline mcs::Task tightened(mcs::Task t, const mcs::Rational& dl)
{
    t.tight_deadline = dl;
    return mcs::validate_task(t);
}

// The two-task set used throughout: tau1 = (6,4,HI,1,2), tau2 = (7,5,LO,1,1).
inline mcs::TaskSet dominance_example()
{
    return mcs::TaskSet({hi(1, 6, 4, 1, 2), lo(2, 7, 5, 1)});
}

// Implicit-deadline four-task set with U_LL = 8/20, U_HL = 9/20, U_HH = 17/20.
inline mcs::TaskSet four_task_example()
{
    return mcs::TaskSet({lo(1, 10, 10, 4), hi(2, 20, 20, 2, 3), hi(3, 20, 20, 2, 8), hi(4, 20, 20, 5, 6)});
}

struct RandomSpec {
    int max_tasks = 4;
    std::int64_t t_lo = 4;
    std::int64_t t_hi = 16;
    double p_hi = 0.5;
    bool tighten = true;
    int max_cl_div = 3;  // C^L <= T / max_cl_div
};

inline mcs::TaskSet random_set(std::mt19937_64& rng, const RandomSpec& s = {})
{
    auto pick = [&](std::int64_t a, std::int64_t b) { return std::uniform_int_distribution<std::int64_t>(a, b)(rng); };
    const int n = static_cast<int>(pick(1, s.max_tasks));
    std::vector<mcs::Task> tasks;
    for (int i = 0; i < n; ++i) {
        const std::int64_t T = pick(s.t_lo, s.t_hi);
        const std::int64_t cl = pick(1, std::max<std::int64_t>(1, T / s.max_cl_div));
        const bool is_hi = std::bernoulli_distribution(s.p_hi)(rng);
        const std::int64_t ch = is_hi ? pick(cl, std::min(T, 3 * cl)) : cl;
        const std::int64_t D = pick(ch, T);
        mcs::Task t = task(i + 1, T, D, is_hi ? mcs::Criticality::HI : mcs::Criticality::LO, cl, ch);
        if (is_hi && s.tighten)
            t = tightened(t, mcs::make_rational(pick(cl, D)));
        tasks.push_back(t);
    }
    return mcs::TaskSet(std::move(tasks));
}

}  // namespace support
