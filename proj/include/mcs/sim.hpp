#pragma once

// Preemptive EDF with the mode switch: before the switch HI jobs run against
// their tightened deadlines with C^L budgets; at the switch LO jobs are
// dropped and every HI job falls back to its real deadline and C^H.

#include "mcs/budget.hpp"
#include "mcs/model.hpp"
#include "mcs/schedulability.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mcs {

struct Scenario {
    // Release instants per task id; tasks not listed release synchronously
    // every period from 0.
    std::map<int, std::vector<Rational>> arrivals;
    std::optional<Rational> switch_at;  // empty: the run stays in LC behaviour
    Rational horizon;                   // jobs released before it are simulated
};

class InvalidScenario : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct JobRecord {
    int task = 0;
    bool hi = false;
    Rational release;
    Rational edf_deadline;  // absolute deadline the scheduler used last
    Rational tight_deadline;
    Rational real_deadline;
    std::optional<Rational> completion;
    bool dropped = false;
};

struct SimOutcome {
    std::vector<JobRecord> jobs;               // in release order
    std::vector<std::size_t> real_deadline_misses;   // indices into jobs
    std::vector<std::size_t> tight_deadline_misses;  // indices into jobs
    std::optional<Rational> switch_effective;
};

enum class SimEventKind { Release, Start, Preempt, Complete, Drop, Switch };

const char* to_string(SimEventKind k);

struct SimEvent {
    SimEventKind kind;
    Rational time;
    int task = 0;        // 0 for the switch event
    std::size_t job = 0;  // index into SimOutcome::jobs
};

using SimTrace = std::function<void(const SimEvent&)>;

SimOutcome simulate(const TaskSet& ts, const Scenario& sc, const SimTrace& trace = {});

struct SimulationOptions {
    std::optional<Rational> horizon;           // default: simulation_horizon(ts)
    std::optional<std::int64_t> max_ticks = std::int64_t{1} << 22;  // refuse longer sweeps
    const Budget* budget = nullptr;
};

// Longest of the LC and HC analysis horizons; overloaded modes use one
// hyperperiod plus the largest deadline.
Rational simulation_horizon(const TaskSet& ts);

// Synchronous releases, no switch and a switch at every grid instant in
// [0, horizon]. The witness is the first (switch, deadline) with a required
// real deadline missed; a missing t1 means the run without a switch.
Verdict exhaustive_simulation(const TaskSet& ts, const SimulationOptions& opt = {});

}  // namespace mcs
