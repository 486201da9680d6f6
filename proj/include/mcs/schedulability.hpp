#pragma once

#include "mcs/budget.hpp"
#include "mcs/demand.hpp"
#include "mcs/kernels.hpp"
#include "mcs/model.hpp"

#include <optional>
#include <string>

namespace mcs {

/// Failure point. Single-instant tests leave t1 empty and report t in t2.
struct Witness {
    std::optional<Rational> t1;
    Rational t2;
};

struct Verdict {
    std::string test_name;
    bool schedulable = true;
    std::optional<Witness> witness;
    Rational lhs_at_witness;  // demand at the witness; EDF-VD: the utilization expression
    std::string note;         // why no witness exists (overload, horizon, vacuous)
};

struct SweepOptions {
    std::optional<std::int64_t> t_max;  // overrides the computed horizon (time units)
    bool integer_grid = false;          // literal unpruned (t1, t2) sweep, for cross-checking
    const Budget* budget = nullptr;
};

class NotImplicitDeadline : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Exact LC check: sum of dbf^L(t) <= t for every t up to the horizon.
Verdict lc_test(const TaskSet& ts, const SweepOptions& opt = {});
// Single-instant HC test with carry-over jobs of the tasks in S(t).
Verdict hc_test_prior(const TaskSet& ts, const SweepOptions& opt = {});
// Collective (t1, t2) test with per-task demand for each carry case.
Verdict hc_test_new(const TaskSet& ts, const SweepOptions& opt = {});
// As hc_test_new, with the LC-side demand capped by t1 and the unnecessary
// jobs capped collectively.
Verdict hc_test_improved(const TaskSet& ts, const SweepOptions& opt = {});
// Utilization test for EDF-VD; implicit deadlines only.
Verdict edfvd_test(const TaskSet& ts);

// min{ max D^L over contributors, sum of unnecessary-job demand }.
Rational unnecessary_total(const TaskSet& ts, const Rational& t1, const Rational& t2);

struct LcFloors {
    Rational l1;  // LO + case1 tasks, unnecessary jobs included
    Rational l2;  // case2 tasks
    Rational l3;  // case3 tasks
    Rational total() const { return l1 + l2 + l3; }
};

LcFloors lc_floor_demands(const TaskSet& ts, const Rational& t1, const Rational& t2);

// Left-hand sides at one point, straight from the per-task definitions.
Rational prior_demand(const TaskSet& ts, const Rational& t);
Rational new_demand(const TaskSet& ts, const Rational& t1, const Rational& t2);
Rational improved_demand(const TaskSet& ts, const Rational& t1, const Rational& t2);

// ---------------------------------------------------------------------------
// Tick-level checks used by the tightening loops (no TaskSet round trips).
namespace tick {

struct Check {
    bool ok = true;
    Ticks t1 = -1;  // -1 for single-instant tests
    Ticks t2 = -1;  // -1 when failing without a witness
    Ticks lhs = 0;
    std::string note;

    Ticks excess() const { return lhs - t2; }
};

// `t_max` here is in ticks.
struct Limits {
    std::optional<Ticks> t_max;
    const Budget* budget = nullptr;
};

Check lc(const TickSet& ts, const Limits& lim = {});
Check prior(const TickSet& ts, const Limits& lim = {});
Check pair(const TickSet& ts, kernels::PairVariant v, const Limits& lim = {});
// Unpruned sweep over every (t1, t2) with an independent per-task evaluator.
Check pair_literal(const TickSet& ts, kernels::PairVariant v, const Limits& lim = {});

// Reference evaluators of single points (scalar, from demand.hpp formulas).
Ticks prior_lhs(const TickSet& ts, Ticks t);
Ticks pair_lhs(const TickSet& ts, kernels::PairVariant v, Ticks t1, Ticks t2);

}  // namespace tick

}  // namespace mcs
