#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcs/demand.hpp"
#include "mcs/gen.hpp"
#include "support.hpp"

#include <set>

using namespace mcs;
using support::hi;
using support::lo;

namespace {

Rational q(std::int64_t n, std::int64_t d = 1)
{
    return make_rational(n, d);
}

// max over integer t in [1, t_end] of max{LC demand, HC demand} / t.
Rational brute_load(const TaskSet& ts, std::int64_t t_end)
{
    const TaskSet u = untightened(ts);
    Rational best = 0;
    for (std::int64_t t = 1; t <= t_end; ++t) {
        Rational l = 0, h = 0;
        for (const Task& k : u) {
            l += dbf_lc(k, q(t));
            if (k.is_hi())
                h += dbf_hc(k, q(t));
        }
        const Rational m = std::max(l, h) / t;
        best = std::max(best, m);
    }
    return best;
}

}  // namespace

TEST_CASE("reference values of the underlying generators")
{
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    std::mt19937_64 e;
    e.discard(9999);
    CHECK(e() == 9981545732273789042ULL);
}

TEST_CASE("Rng draws stay in range and cover it")
{
    Rng r(3);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t v = r.uniform(5, 9);
        CHECK(v >= 5);
        CHECK(v <= 9);
        seen.insert(v);
        const Rational x = r.uniform(q(1, 10), q(1, 4));
        CHECK(x >= q(1, 10));
        CHECK(x < q(1, 4));
    }
    CHECK(seen.size() == 5);
    CHECK_FALSE(r.bernoulli(0));
    CHECK(r.bernoulli(1));
}

TEST_CASE("generate_task")
{
    SUBCASE("p_criticality 0 gives LO tasks")
    {
        GenParams p;
        p.p_criticality = 0;
        Rng r(1);
        for (int i = 0; i < 200; ++i) {
            const Task t = generate_task(p, r, 1);
            CHECK_FALSE(t.is_hi());
            CHECK(t.wcet_hi == t.wcet_lo);
            CHECK(t.period >= 5);
            CHECK(t.period <= 100);
            CHECK(t.deadline >= t.wcet_lo);
            CHECK(t.deadline <= t.period);
        }
    }
    SUBCASE("fixed period and utilization")
    {
        GenParams p;
        p.p_criticality = 1;
        p.period_lo = p.period_hi = 10;
        p.util_lo = p.util_hi = q(1, 10);
        Rng r(2);
        std::set<std::int64_t> ch;
        for (int i = 0; i < 200; ++i) {
            const Task t = generate_task(p, r, 1);
            CHECK(t.is_hi());
            CHECK(t.period == 10);
            CHECK(t.wcet_lo == 1);
            ch.insert(t.wcet_hi);
        }
        CHECK(ch == std::set<std::int64_t>{2, 3, 4});
    }
    SUBCASE("skewed deadlines")
    {
        GenParams p;
        p.p_criticality = 1;
        p.period_lo = p.period_hi = 20;
        p.util_lo = p.util_hi = q(1, 10);
        p.mult_lo = p.mult_hi = 2;
        p.deadline_mode = DeadlineMode::Skewed;
        Rng r(3);
        std::set<std::int64_t> d;
        for (int i = 0; i < 500; ++i) {
            const Task t = generate_task(p, r, 1);
            REQUIRE(t.wcet_hi == 4);
            d.insert(t.deadline);
        }
        CHECK(*d.begin() == 12);
        CHECK(*d.rbegin() == 20);
        CHECK(d.size() == 9);
    }
    SUBCASE("implicit deadlines")
    {
        GenParams p;
        p.deadline_mode = DeadlineMode::Implicit;
        Rng r(4);
        for (int i = 0; i < 50; ++i) {
            const Task t = generate_task(p, r, 1);
            CHECK(t.deadline == t.period);
        }
    }
}

TEST_CASE("system_load")
{
    CHECK(system_load(TaskSet({lo(1, 10, 10, 4)})) == q(4, 10));
    CHECK(system_load(TaskSet({lo(1, 4, 4, 2), lo(2, 4, 4, 2)})) == 1);
    const TaskSet ex = support::dominance_example();
    CHECK(system_load(ex) == brute_load(ex, 2000));
    // HC behaviour dominates: 2 units due by t = 4.
    CHECK(system_load(ex) == q(1, 2));
    CHECK(system_load(TaskSet({lo(1, 4, 4, 3), lo(2, 4, 4, 3)})) == q(3, 2));
}

TEST_CASE("system_load equals a brute-force maximum")
{
    std::mt19937_64 rng(19);
    int strict = 0;
    for (int i = 0; i < 300; ++i) {
        const TaskSet ts = support::random_set(rng);
        const UtilizationSummary u = utilizations(ts);
        const Rational lc = u.u_lo_lo + u.u_hi_lo;
        if (lc > 1 || u.u_hi_hi > 1)
            continue;
        const Rational load = system_load(ts);
        const Rational b = brute_load(ts, 1500);
        CHECK(b <= load);
        if (load != std::max<Rational>(lc, u.u_hi_hi)) {
            CHECK(load == b);
            ++strict;
        }
    }
    CHECK(strict > 50);
}

TEST_CASE("generate_taskset")
{
    GenParams p;
    p.seed = 42;
    p.l_bound = q(13, 20);
    const TaskSet a = generate_taskset(p);
    CHECK(a == generate_taskset(p));
    p.seed = 43;
    CHECK_FALSE(a == generate_taskset(p));

    for (std::uint64_t s = 0; s < 1000; ++s) {
        p.seed = s;
        const TaskSet ts = generate_taskset(p);
        const Rational l = system_load(ts);
        CHECK(l > q(60, 100));
        CHECK(l <= q(65, 100));
    }

    GenParams c;
    c.p_criticality = 0;
    c.l_bound = 1;
    for (std::uint64_t s = 0; s < 50; ++s) {
        c.seed = s;
        const TaskSet ts = generate_taskset(c);
        CHECK(ts.hi_count() == 0);
        CHECK(system_load(ts) <= 1);
    }
}

TEST_CASE("parameter validation")
{
    GenParams p;
    p.l_bound = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = GenParams{};
    p.period_lo = 50;
    p.period_hi = 10;
    CHECK_THROWS_AS(generate_taskset(p), std::invalid_argument);
    p = GenParams{};
    p.l_bound = q(1, 100);
    p.max_attempts = 3;
    CHECK_THROWS_AS(generate_taskset(p), GenerationExhausted);
    CHECK(parse_deadline_mode("skewed") == DeadlineMode::Skewed);
    CHECK_THROWS(parse_deadline_mode("nope"));
}
