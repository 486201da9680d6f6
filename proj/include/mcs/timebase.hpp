#pragma once

#include "mcs/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mcs {

using Ticks = std::int64_t;

// All scaled task parameters stay below this so that int64 sums and the
// double-precision SIMD kernels remain exact.
inline constexpr Ticks kMaxTickValue = Ticks{1} << 40;

class TimebaseOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// A task with every time parameter multiplied by the set's scale.
struct TickTask {
    int id = 0;
    bool hi = false;
    Ticks period = 0;
    Ticks deadline = 0;
    Ticks tight = 0;
    Ticks wcet_lo = 0;
    Ticks wcet_hi = 0;
};

/// Integer view of a task set. The scale is the least common multiple of
/// the tight-deadline denominators, so one tick is the finest time quantum
/// at which any demand function can change.
struct TickSet {
    Ticks scale = 1;
    std::vector<TickTask> tasks;

    std::size_t hi_count() const;
    Ticks max_deadline() const;
    Ticks min_hi_slack() const;  // min over HI tasks of deadline - tight
};

TickSet to_ticks(const TaskSet& ts);
// Copies tight deadlines back as rationals (tight / scale).
TaskSet from_ticks(const TaskSet& like, const TickSet& ticks);

Rational ticks_to_time(Ticks t, Ticks scale);
// Exact conversion; throws TimebaseOverflow when the value is off-grid or too large.
Ticks time_to_ticks(const Rational& t, Ticks scale);

}  // namespace mcs
