#pragma once

#include "mcs/model.hpp"
#include "mcs/timebase.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace mcs {

/// Which of the three carry-over situations a HI task is in for a
/// switch at t1 and a deadline miss at t2.
///   Case1: t2 - t1 <= D - D^L, the task behaves like a LO task.
///   Case2: a carry-over job with tight deadline in (t1, t2] is pending at t1.
///   Case3: the carry-over job finished before the switch.
enum class CarryCase { Case1, Case2, Case3 };

std::string_view to_string(CarryCase c);

enum class Mode { LC, HC };

enum class HorizonMethod { UtilizationBound, Hyperperiod, Configured };

std::string_view to_string(HorizonMethod m);

struct Horizon {
    std::int64_t t_max = 0;
    HorizonMethod method = HorizonMethod::UtilizationBound;
};

class NotHighCriticality : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotInCarrySet : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class WrongCase : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Overload : public std::runtime_error {
public:
    Overload(Mode mode, Rational utilization);
    Mode mode() const { return mode_; }
    const Rational& utilization() const { return utilization_; }

private:
    Mode mode_;
    Rational utilization_;
};

struct PairDemand {
    Rational lc_part;
    Rational hc_part;
    Rational co_part;
    Rational total() const { return lc_part + hc_part + co_part; }
};

// t - floor(t / T) * T
Rational mod_rem(const Rational& t, std::int64_t period);

// LC demand bound with the tightened deadline and LC WCET.
Rational dbf_lc(const Task& task, const Rational& t);
// HC demand bound with the real deadline and HC WCET; HI tasks only.
Rational dbf_hc(const Task& task, const Rational& t);

// True when the task's carry-over job contributes to an interval of the
// given length: D > MOD(length, T) > D - D^L.
bool in_carry_set(const Task& task, const Rational& length);
// Pending LC execution of the carry-over job: min{C^L, MOD(len,T) - (D - D^L)}.
Rational carry_over_cap(const Task& task, const Rational& length);

CarryCase classify_case(const Task& task, const Rational& t1, const Rational& t2);

// Demand of the unnecessary job (released before t1, tight deadline in (t1, t2]).
Rational dbf_unnecessary(const Task& task, const Rational& t1, const Rational& t2);

// Per-task demand split for HI tasks in Case2/Case3.
PairDemand pair_demand(const Task& task, const Rational& t1, const Rational& t2);

// Longest window a demand sweep in the given behaviour has to inspect.
// Throws Overload when the mode's utilization is >= 1.
Horizon analysis_horizon(const TaskSet& ts, Mode mode);

// ---------------------------------------------------------------------------
// Tick-level kernels. Same formulas on scaled integers; these are the
// reference evaluators the batched kernels are tested against.
namespace ticks {

inline Ticks floor_div(Ticks a, Ticks b)
{
    Ticks q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline Ticks mod(Ticks t, Ticks period)
{
    return t - floor_div(t, period) * period;
}

inline Ticks dbf_lc(const TickTask& k, Ticks t)
{
    return std::max<Ticks>(0, (floor_div(t - k.tight, k.period) + 1) * k.wcet_lo);
}

inline Ticks dbf_hc(const TickTask& k, Ticks t)
{
    return std::max<Ticks>(0, (floor_div(t - k.deadline, k.period) + 1) * k.wcet_hi);
}

inline bool in_carry_set(const TickTask& k, Ticks length)
{
    const Ticks m = mod(length, k.period);
    return k.hi && k.deadline > m && m > k.deadline - k.tight;
}

inline Ticks carry_over(const TickTask& k, Ticks length)
{
    return std::min(k.wcet_lo, mod(length, k.period) - (k.deadline - k.tight));
}

inline CarryCase classify(const TickTask& k, Ticks t1, Ticks t2)
{
    const Ticks len = t2 - t1;
    if (len <= k.deadline - k.tight)
        return CarryCase::Case1;
    const Ticks m = mod(len, k.period);
    if (k.deadline - k.tight < m && m < k.deadline && floor_div(len, k.period) * k.period + k.deadline <= t2)
        return CarryCase::Case2;
    return CarryCase::Case3;
}

inline Ticks unnecessary(const TickTask& k, Ticks t1, Ticks t2)
{
    const Ticks m = mod(t1, k.period);
    if (k.tight > m && floor_div(t1, k.period) * k.period + k.tight <= t2)
        return std::min(k.wcet_lo, m);
    return 0;
}

struct PairParts {
    Ticks lc = 0;
    Ticks hc = 0;
    Ticks co = 0;
};

inline PairParts pair_parts(const TickTask& k, Ticks t1, Ticks t2, CarryCase c)
{
    const Ticks len = t2 - t1;
    PairParts p;
    const Ticks jobs = floor_div(t2 - k.deadline, k.period) - floor_div(len - k.deadline, k.period) - 1;
    p.lc = std::max<Ticks>(0, jobs) * k.wcet_lo;
    p.hc = std::max<Ticks>(0, (floor_div(len - k.deadline, k.period) + 1) * k.wcet_hi);
    p.co = c == CarryCase::Case2 ? k.wcet_hi : k.wcet_lo;
    return p;
}

}  // namespace ticks

struct TickHorizon {
    Ticks t_max = 0;
    HorizonMethod method = HorizonMethod::UtilizationBound;
};

/// Horizon computation on the tick grid. When the mode is overloaded the
/// utilization bound does not exist; `hyperperiod_bound` is still filled in
/// (or zero when it does not fit in the tick range).
struct HorizonProbe {
    bool overloaded = false;
    Rational utilization;
    TickHorizon horizon;
    Ticks hyperperiod_bound = 0;
};

HorizonProbe probe_horizon(const TickSet& ts, Mode mode);

}  // namespace mcs
