#include "mcs/gen.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace mcs {

std::string_view to_string(DeadlineMode m)
{
    switch (m) {
    case DeadlineMode::Full: return "full";
    case DeadlineMode::Skewed: return "skewed";
    case DeadlineMode::Implicit: return "implicit";
    }
    return "?";
}

DeadlineMode parse_deadline_mode(std::string_view text)
{
    if (text == "full")
        return DeadlineMode::Full;
    if (text == "skewed")
        return DeadlineMode::Skewed;
    if (text == "implicit")
        return DeadlineMode::Implicit;
    throw std::invalid_argument("unknown deadline mode '" + std::string(text) + "'");
}

void validate(const GenParams& p)
{
    auto fail = [](const std::string& m) { throw std::invalid_argument("generator parameters: " + m); };
    if (p.period_lo < 1 || p.period_lo > p.period_hi)
        fail("period range must be non-empty and positive");
    if (p.p_criticality < 0 || p.p_criticality > 1)
        fail("p_criticality must lie in [0, 1]");
    if (p.util_lo <= 0 || p.util_lo > p.util_hi || p.util_hi > 1)
        fail("LC utilization range must be non-empty within (0, 1]");
    if (p.mult_lo < 1 || p.mult_lo > p.mult_hi)
        fail("HC multiplier range must be non-empty and at least 1");
    if (p.l_bound <= 0 || p.l_bound > 1)
        fail("l_bound must lie in (0, 1]");
    if (p.load_window < 0)
        fail("load window must be non-negative");
    if (p.max_tasks < 1 || p.max_attempts < 1)
        fail("max_tasks and max_attempts must be positive");
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi)
{
    if (lo >= hi)
        return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0)
        return static_cast<std::int64_t>(next());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
}

Rational Rng::uniform(const Rational& lo, const Rational& hi)
{
    const std::uint64_t k = next() >> 32;
    Rational f(Integer(static_cast<unsigned long>(k)), Integer(1) << 32);
    f.canonicalize();
    return lo + (hi - lo) * f;
}

bool Rng::bernoulli(const Rational& p)
{
    if (p <= 0)
        return false;
    if (p >= 1)
        return true;
    const std::uint64_t k = next() >> 32;
    Rational f(Integer(static_cast<unsigned long>(k)), Integer(1) << 32);
    f.canonicalize();
    return f < p;
}

namespace {

std::int64_t round_half_up(const Rational& r)
{
    return to_int64(floor_of(r + make_rational(1, 2)));
}

}  // namespace

Task generate_task(const GenParams& p, Rng& rng, int id)
{
    RawTask r;
    r.id = id;
    r.period = rng.uniform(p.period_lo, p.period_hi);
    const Rational u = rng.uniform(p.util_lo, p.util_hi);
    r.wcet_lo = std::clamp<std::int64_t>(round_half_up(u * r.period), 1, r.period);
    const bool is_hi = rng.bernoulli(p.p_criticality);
    r.criticality = is_hi ? Criticality::HI : Criticality::LO;
    r.wcet_hi = r.wcet_lo;
    if (is_hi) {
        const std::int64_t lo = to_int64(ceil_of(p.mult_lo * r.wcet_lo));
        const std::int64_t hi = std::max(lo, to_int64(floor_of(p.mult_hi * r.wcet_lo)));
        r.wcet_hi = std::clamp(rng.uniform(lo, hi), r.wcet_lo, r.period);
    }
    const std::int64_t c = r.wcet_hi;
    switch (p.deadline_mode) {
    case DeadlineMode::Full: r.deadline = rng.uniform(c, r.period); break;
    case DeadlineMode::Skewed: r.deadline = rng.uniform(to_int64(ceil_of(c + make_rational(r.period - c, 2))), r.period); break;
    case DeadlineMode::Implicit: r.deadline = r.period; break;
    }
    return validate_task(r);
}

namespace {

struct Job {
    std::int64_t period, deadline, wcet;
};

using i128 = __int128;

// Exact max of dbf(t)/t over t > 0 for one behaviour. The maximum is at least
// U (it is attained at the hyperperiod) and dbf(t) <= U t + K with
// K = sum u (T - D), so the scan can stop once U + K/t drops to the maximum.
Rational mode_load(const std::vector<Job>& tasks)
{
    if (tasks.empty())
        return 0;
    Rational u = 0, k = 0;
    for (const Job& j : tasks) {
        const Rational ui = make_rational(j.wcet, j.period);
        u += ui;
        k += ui * (j.period - j.deadline);
    }
    if (u > 1)
        return u;

    Rational best = u;
    std::int64_t bn = to_int64(best.get_num()), bd = to_int64(best.get_den());
    auto threshold = [&]() -> std::int64_t {
        if (k == 0)
            return 0;
        if (best == u)
            return std::numeric_limits<std::int64_t>::max();
        const Integer t = ceil_of(k / (best - u));
        return fits_int64(t) ? to_int64(t) : std::numeric_limits<std::int64_t>::max();
    };
    std::int64_t stop = threshold();

    Integer hyper = 1;
    std::int64_t max_d = 0;
    for (const Job& j : tasks) {
        max_d = std::max(max_d, j.deadline);
        if (hyper < (Integer(1) << 40)) {
            const Integer p(static_cast<long>(j.period));
            mpz_lcm(hyper.get_mpz_t(), hyper.get_mpz_t(), p.get_mpz_t());
        }
    }
    hyper += static_cast<long>(max_d);
    if (hyper < stop)
        stop = to_int64(hyper);

    using Entry = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> q;
    for (std::size_t i = 0; i < tasks.size(); ++i)
        q.emplace(tasks[i].deadline, i);
    std::int64_t dbf = 0;
    while (!q.empty() && q.top().first <= stop) {
        const std::int64_t t = q.top().first;
        while (!q.empty() && q.top().first == t) {
            const std::size_t i = q.top().second;
            q.pop();
            dbf += tasks[i].wcet;
            q.emplace(t + tasks[i].period, i);
        }
        if (static_cast<i128>(dbf) * bd > static_cast<i128>(bn) * t) {
            best = make_rational(dbf, t);
            bn = dbf;
            bd = t;
            stop = std::min(stop, threshold());
        }
    }
    return best;
}

}  // namespace

Rational system_load(const TaskSet& ts)
{
    std::vector<Job> lc, hc;
    for (const Task& t : ts) {
        lc.push_back({t.period, t.deadline, t.wcet_lo});
        if (t.is_hi())
            hc.push_back({t.period, t.deadline, t.wcet_hi});
    }
    return std::max(mode_load(lc), mode_load(hc));
}

TaskSet generate_taskset(const GenParams& p)
{
    validate(p);
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        std::vector<Task> tasks;
        Rational load = 0;
        for (int i = 0; i < p.max_tasks; ++i) {
            Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(i)));
            std::vector<Task> next = tasks;
            next.push_back(generate_task(p, rng, i + 1));
            const Rational l = system_load(TaskSet(next));
            if (l > p.l_bound)
                break;
            tasks = std::move(next);
            load = l;
        }
        if (!tasks.empty() && load > p.l_bound - p.load_window)
            return TaskSet(std::move(tasks));
    }
    throw GenerationExhausted("no task set within the load window after " + std::to_string(p.max_attempts)
                              + " attempts");
}

}  // namespace mcs
