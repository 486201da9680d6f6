#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcs/demand.hpp"
#include "mcs/schedulability.hpp"
#include "mcs/sim.hpp"
#include "mcs/tighten.hpp"
#include "support.hpp"

#include <set>

using namespace mcs;
using support::hi;
using support::lo;
using support::tightened;

namespace {

Rational q(std::int64_t n, std::int64_t d = 1)
{
    return make_rational(n, d);
}

Scenario run_for(std::int64_t horizon, std::optional<Rational> sw = std::nullopt)
{
    Scenario s;
    s.horizon = q(horizon);
    s.switch_at = sw;
    return s;
}

// Replays a trace and checks that the processor is busy whenever some
// released, non-dropped job is unfinished, and that no LO job starts at or
// after the switch.
void check_trace(const std::vector<SimEvent>& ev)
{
    std::set<std::size_t> pending;
    std::optional<std::size_t> running;
    std::optional<Rational> sw;
    std::set<int> lo_tasks;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const SimEvent& e = ev[i];
        switch (e.kind) {
        case SimEventKind::Release: pending.insert(e.job); break;
        case SimEventKind::Start:
            CHECK(pending.count(e.job));
            running = e.job;
            if (sw)
                CHECK_FALSE(lo_tasks.count(e.task));
            break;
        case SimEventKind::Preempt: running.reset(); break;
        case SimEventKind::Complete:
            pending.erase(e.job);
            running.reset();
            break;
        case SimEventKind::Drop:
            lo_tasks.insert(e.task);
            pending.erase(e.job);
            if (running == e.job)
                running.reset();
            break;
        case SimEventKind::Switch: sw = e.time; break;
        }
        const bool last_at_time = i + 1 == ev.size() || ev[i + 1].time != e.time;
        if (last_at_time && i + 1 < ev.size())
            CHECK((pending.empty() || running.has_value()));
    }
}

}  // namespace

TEST_CASE("two-task example runs without misses")
{
    const SimOutcome o = simulate(support::dominance_example(), run_for(42));
    CHECK(o.real_deadline_misses.empty());
    CHECK(o.tight_deadline_misses.empty());
    CHECK_FALSE(o.switch_effective);
    CHECK(o.jobs.size() == 7 + 6);
}

TEST_CASE("single HI job across a switch at 0")
{
    Scenario s = run_for(6, q(0));
    s.arrivals[1] = {q(0)};
    const SimOutcome o = simulate(TaskSet({hi(1, 6, 4, 1, 2)}), s);
    REQUIRE(o.jobs.size() == 1);
    REQUIRE(o.jobs[0].completion);
    CHECK(*o.jobs[0].completion == 2);
    CHECK(o.real_deadline_misses.empty());
    CHECK(o.switch_effective == std::optional<Rational>(q(0)));
}

TEST_CASE("two LO tasks over-full at t = 4")
{
    const SimOutcome o = simulate(TaskSet({lo(1, 4, 4, 3), lo(2, 4, 4, 3)}), run_for(4));
    REQUIRE(o.real_deadline_misses.size() == 1);
    const JobRecord& j = o.jobs[o.real_deadline_misses[0]];
    CHECK(j.task == 2);
    CHECK(j.real_deadline == 4);
    CHECK_FALSE(j.completion);
}

TEST_CASE("switch inflates the budget and restores the real deadline")
{
    const TaskSet ts({tightened(hi(1, 10, 10, 2, 5), q(4)), lo(2, 10, 8, 3)});
    std::vector<SimEvent> ev;
    const SimOutcome o = simulate(ts, run_for(10, q(1)), [&](const SimEvent& e) { ev.push_back(e); });
    check_trace(ev);
    // tau1 ran [0, 1) against deadline 4, then needs 1 + 3 more units.
    REQUIRE(o.jobs[0].completion);
    CHECK(*o.jobs[0].completion == 5);
    CHECK(o.jobs[0].edf_deadline == 10);
    CHECK(o.jobs[1].dropped);
    CHECK(o.real_deadline_misses.empty());
}

TEST_CASE("scenario validation")
{
    const TaskSet ts = support::dominance_example();
    Scenario s = run_for(20);
    s.arrivals[1] = {q(0), q(5)};
    CHECK_THROWS_AS(simulate(ts, s), InvalidScenario);
    s.arrivals[1] = {q(-1)};
    CHECK_THROWS_AS(simulate(ts, s), InvalidScenario);
    s.arrivals.clear();
    s.arrivals[7] = {q(0)};
    CHECK_THROWS_AS(simulate(ts, s), InvalidScenario);
    s.arrivals.clear();
    s.arrivals[1] = {q(1, 2), q(13, 2)};
    CHECK_NOTHROW(simulate(ts, s));
}

TEST_CASE("drops, work conservation and determinism on random runs")
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 300; ++i) {
        const TaskSet ts = support::random_set(rng);
        const std::int64_t sw = std::uniform_int_distribution<std::int64_t>(0, 40)(rng);
        const Scenario s = run_for(60, q(sw));
        std::vector<SimEvent> ev;
        const SimOutcome a = simulate(ts, s, [&](const SimEvent& e) { ev.push_back(e); });
        check_trace(ev);
        for (const JobRecord& j : a.jobs) {
            if (j.dropped) {
                CHECK_FALSE(j.hi);
                CHECK((j.release >= sw || !j.completion));
            }
            if (!j.hi && (j.release >= sw || (j.completion && *j.completion > sw)))
                CHECK(j.dropped);
            if (j.completion && !j.hi)
                CHECK(*j.completion <= sw);
        }
        const SimOutcome b = simulate(ts, s);
        CHECK(a.real_deadline_misses == b.real_deadline_misses);
        REQUIRE(a.jobs.size() == b.jobs.size());
        for (std::size_t k = 0; k < a.jobs.size(); ++k)
            CHECK(a.jobs[k].completion == b.jobs[k].completion);
    }
}

TEST_CASE("exhaustive_simulation")
{
    CHECK(exhaustive_simulation(support::dominance_example()).schedulable);

    const Verdict over = exhaustive_simulation(TaskSet({lo(1, 4, 4, 3), lo(2, 4, 4, 3)}));
    CHECK_FALSE(over.schedulable);
    REQUIRE(over.witness);
    CHECK_FALSE(over.witness->t1);
    CHECK(over.witness->t2 == 4);

    CHECK(exhaustive_simulation(TaskSet({lo(1, 4, 4, 1), lo(2, 8, 8, 4), lo(3, 16, 16, 4)})).schedulable);

    // Fine in LC behaviour, but two HC jobs of 3 cannot share a period of 4.
    const Verdict hc = exhaustive_simulation(TaskSet({hi(1, 4, 4, 1, 3), hi(2, 4, 4, 1, 3)}));
    CHECK_FALSE(hc.schedulable);
    REQUIRE(hc.witness);
    CHECK(hc.witness->t1 == std::optional<Rational>(q(0)));
}

TEST_CASE("no-switch tight-deadline misses agree with the LC test")
{
    std::mt19937_64 rng(55);
    int fails = 0;
    for (int i = 0; i < 500; ++i) {
        const TaskSet ts = support::random_set(rng);
        const Verdict v = lc_test(ts);
        std::int64_t h;
        if (!v.schedulable && v.witness) {
            h = to_int64(ceil_of(v.witness->t2)) + 1;
            ++fails;
        } else {
            h = to_int64(ceil_of(simulation_horizon(ts)));
        }
        const SimOutcome o = simulate(ts, run_for(h));
        CHECK(v.schedulable == o.tight_deadline_misses.empty());
        if (!v.schedulable && v.witness && !o.tight_deadline_misses.empty()) {
            Rational first = o.jobs[o.tight_deadline_misses[0]].tight_deadline;
            for (std::size_t k : o.tight_deadline_misses)
                first = std::min(first, o.jobs[k].tight_deadline);
            CHECK(first == v.witness->t2);
        }
    }
    CHECK(fails > 20);
}

TEST_CASE("accepted tightenings never miss in the oracle")
{
    std::mt19937_64 rng(77);
    int accepted = 0;
    for (int i = 0; i < 150; ++i) {
        const TaskSet ts = support::random_set(rng);
        const TighteningResult r = ecdf(ts);
        if (r.success) {
            ++accepted;
            CHECK(exhaustive_simulation(apply_tightening(ts, r.assignment)).schedulable);
        }
        if (lc_test(ts).schedulable && hc_test_improved(ts).schedulable)
            CHECK(exhaustive_simulation(ts).schedulable);
    }
    CHECK(accepted > 30);
}
