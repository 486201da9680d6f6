#include "mcs/sim.hpp"

#include "mcs/demand.hpp"
#include "mcs/timebase.hpp"

#include <algorithm>
#include <limits>
#include <memory>

namespace mcs {

const char* to_string(SimEventKind k)
{
    switch (k) {
    case SimEventKind::Release: return "release";
    case SimEventKind::Start: return "start";
    case SimEventKind::Preempt: return "preempt";
    case SimEventKind::Complete: return "complete";
    case SimEventKind::Drop: return "drop";
    case SimEventKind::Switch: return "switch";
    }
    return "?";
}

namespace {

constexpr Ticks kNever = std::numeric_limits<Ticks>::max();

struct Job {
    std::size_t rec = 0;
    std::size_t task = 0;  // index into the TickSet
    bool hi = false;
    Ticks release = 0, edf_dl = 0, tight_dl = 0, real_dl = 0;
    Ticks remaining = 0;
};

using Releases = std::vector<std::vector<Ticks>>;

// Event loop on the tick grid. Copyable, so a run can be forked at the
// switch instant.
class Engine {
public:
    std::function<void(const Job&)> on_release;
    std::function<void(const Job&, std::optional<Ticks> completion, bool dropped)> on_finish;
    std::function<void(SimEventKind, Ticks, const Job*)> on_event;
    bool stop_when_idle_after_switch = false;
    bool stop = false;

    Engine(const TickSet& k, std::shared_ptr<const Releases> rel, Ticks release_limit)
        : k_(&k), rel_(std::move(rel)), next_(k.tasks.size(), 0), release_limit_(release_limit)
    {
    }

    Ticks now() const { return now_; }
    void set_release_limit(Ticks t) { release_limit_ = t; }

    void run_until(Ticks until)
    {
        while (now_ < until && !stop) {
            release_due();
            if (switched_ && stop_when_idle_after_switch && pending_.empty()) {
                stop = true;
                break;
            }
            const std::ptrdiff_t r = pick();
            Ticks next = std::min(until, next_release());
            if (r >= 0) {
                Job& j = pending_[r];
                next = std::min(next, now_ + j.remaining);
                dispatch(j);
                j.remaining -= next - now_;
            }
            now_ = next;
            if (r >= 0 && pending_[r].remaining == 0)
                complete(r);
        }
    }

    void switch_now()
    {
        switched_ = true;
        event(SimEventKind::Switch, nullptr);
        std::vector<Job> keep;
        for (Job& j : pending_) {
            if (!j.hi) {
                if (running_ == j.rec)
                    running_.reset();
                event(SimEventKind::Drop, &j);
                finish(j, std::nullopt, true);
                continue;
            }
            const TickTask& t = k_->tasks[j.task];
            j.edf_dl = j.release + t.deadline;
            j.remaining += t.wcet_hi - t.wcet_lo;
            keep.push_back(j);
        }
        pending_ = std::move(keep);
    }

    void finish_all()
    {
        for (const Job& j : pending_)
            finish(j, std::nullopt, false);
        pending_.clear();
    }

    std::size_t released() const { return count_; }

private:
    void event(SimEventKind kind, const Job* j)
    {
        if (on_event)
            on_event(kind, now_, j);
    }

    void finish(const Job& j, std::optional<Ticks> c, bool dropped)
    {
        if (on_finish)
            on_finish(j, c, dropped);
    }

    Ticks next_release() const
    {
        Ticks t = kNever;
        for (std::size_t i = 0; i < next_.size(); ++i) {
            const auto& r = (*rel_)[i];
            if (next_[i] < r.size() && r[next_[i]] < release_limit_)
                t = std::min(t, r[next_[i]]);
        }
        return t;
    }

    void release_due()
    {
        for (std::size_t i = 0; i < next_.size(); ++i) {
            const auto& r = (*rel_)[i];
            while (next_[i] < r.size() && r[next_[i]] <= now_ && r[next_[i]] < release_limit_) {
                const TickTask& t = k_->tasks[i];
                Job j;
                j.rec = count_++;
                j.task = i;
                j.hi = t.hi;
                j.release = r[next_[i]++];
                j.tight_dl = j.release + t.tight;
                j.real_dl = j.release + t.deadline;
                const bool hc = switched_ && t.hi;
                j.edf_dl = hc ? j.real_dl : j.tight_dl;
                j.remaining = hc ? t.wcet_hi : t.wcet_lo;
                if (on_release)
                    on_release(j);
                event(SimEventKind::Release, &j);
                if (switched_ && !t.hi) {
                    event(SimEventKind::Drop, &j);
                    finish(j, std::nullopt, true);
                    continue;
                }
                pending_.push_back(j);
            }
        }
    }

    std::ptrdiff_t pick() const
    {
        std::ptrdiff_t best = -1;
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            if (best < 0) {
                best = static_cast<std::ptrdiff_t>(i);
                continue;
            }
            const Job& a = pending_[i];
            const Job& b = pending_[best];
            const int ia = k_->tasks[a.task].id, ib = k_->tasks[b.task].id;
            if (a.edf_dl < b.edf_dl || (a.edf_dl == b.edf_dl && (ia < ib || (ia == ib && a.release < b.release))))
                best = static_cast<std::ptrdiff_t>(i);
        }
        return best;
    }

    void dispatch(const Job& j)
    {
        if (running_ == j.rec)
            return;
        if (running_) {
            for (const Job& p : pending_)
                if (p.rec == *running_)
                    event(SimEventKind::Preempt, &p);
        }
        running_ = j.rec;
        event(SimEventKind::Start, &j);
    }

    void complete(std::ptrdiff_t r)
    {
        const Job j = pending_[r];
        pending_.erase(pending_.begin() + r);
        running_.reset();
        event(SimEventKind::Complete, &j);
        finish(j, now_, false);
    }

    const TickSet* k_;
    std::shared_ptr<const Releases> rel_;
    std::vector<std::size_t> next_;
    Ticks release_limit_;
    Ticks now_ = 0;
    bool switched_ = false;
    std::vector<Job> pending_;
    std::optional<std::size_t> running_;
    std::size_t count_ = 0;
};

// LO deadlines count only up to the switch; HI deadlines always. Deadlines
// after `end` are not judged.
bool misses_real(const Job& j, std::optional<Ticks> c, std::optional<Ticks> sw, Ticks end)
{
    const bool required = j.hi || !sw || j.real_dl <= *sw;
    if (!required)
        return false;
    if (c)
        return *c > j.real_dl;
    return j.real_dl <= end;
}

bool misses_tight(const Job& j, std::optional<Ticks> c, std::optional<Ticks> sw, Ticks end)
{
    if (j.tight_dl > end || (sw && j.tight_dl > *sw))
        return false;
    return !c || *c > j.tight_dl;
}

Ticks refine_scale(Ticks a, const Integer& den)
{
    Integer l(static_cast<long>(a));
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
    if (l > kMaxTickValue)
        throw TimebaseOverflow("scenario instants need a timebase finer than supported");
    return to_int64(l);
}

TickSet rescale(const TickSet& k, Ticks scale)
{
    TickSet out = k;
    const Ticks f = scale / k.scale;
    out.scale = scale;
    for (auto& t : out.tasks) {
        for (Ticks* v : {&t.period, &t.deadline, &t.tight, &t.wcet_lo, &t.wcet_hi}) {
            if (*v > kMaxTickValue / f)
                throw TimebaseOverflow("scenario instants need a timebase finer than supported");
            *v *= f;
        }
    }
    return out;
}

std::shared_ptr<Releases> synchronous(const TickSet& k, Ticks limit)
{
    auto rel = std::make_shared<Releases>(k.tasks.size());
    for (std::size_t i = 0; i < k.tasks.size(); ++i)
        for (Ticks r = 0; r < limit; r += k.tasks[i].period)
            (*rel)[i].push_back(r);
    return rel;
}

}  // namespace

SimOutcome simulate(const TaskSet& ts, const Scenario& sc, const SimTrace& trace)
{
    if (sc.horizon <= 0)
        throw InvalidScenario("horizon must be positive");
    for (const auto& [id, rs] : sc.arrivals) {
        const Task* t = ts.find(id);
        if (!t)
            throw InvalidScenario("arrivals for unknown task " + std::to_string(id));
        for (std::size_t i = 0; i < rs.size(); ++i) {
            if (rs[i] < 0)
                throw InvalidScenario("task " + std::to_string(id) + " releases before 0");
            if (i > 0 && rs[i] - rs[i - 1] < t->period)
                throw InvalidScenario("task " + std::to_string(id) + " releases closer than its period");
        }
    }

    const TickSet base = to_ticks(ts);
    Ticks scale = base.scale;
    scale = refine_scale(scale, sc.horizon.get_den());
    if (sc.switch_at)
        scale = refine_scale(scale, sc.switch_at->get_den());
    for (const auto& [id, rs] : sc.arrivals)
        for (const Rational& r : rs)
            scale = refine_scale(scale, r.get_den());
    const TickSet k = rescale(base, scale);
    const Ticks end = time_to_ticks(sc.horizon, scale);

    auto rel = synchronous(k, end);
    for (std::size_t i = 0; i < k.tasks.size(); ++i) {
        const auto it = sc.arrivals.find(k.tasks[i].id);
        if (it == sc.arrivals.end())
            continue;
        (*rel)[i].clear();
        for (const Rational& r : it->second) {
            const Ticks t = time_to_ticks(r, scale);
            if (t < end)
                (*rel)[i].push_back(t);
        }
    }

    SimOutcome out;
    std::optional<Ticks> sw;
    if (sc.switch_at && *sc.switch_at <= sc.horizon)
        sw = time_to_ticks(*sc.switch_at, scale);
    auto tm = [&](Ticks t) { return ticks_to_time(t, scale); };

    Engine e(k, rel, end);
    std::vector<Job> jobs;
    e.on_release = [&](const Job& j) {
        JobRecord r;
        r.task = k.tasks[j.task].id;
        r.hi = j.hi;
        r.release = tm(j.release);
        r.edf_deadline = tm(j.edf_dl);
        r.tight_deadline = tm(j.tight_dl);
        r.real_deadline = tm(j.real_dl);
        out.jobs.push_back(r);
        jobs.push_back(j);
    };
    e.on_finish = [&](const Job& j, std::optional<Ticks> c, bool dropped) {
        JobRecord& r = out.jobs[j.rec];
        r.edf_deadline = tm(j.edf_dl);
        r.dropped = dropped;
        if (c)
            r.completion = tm(*c);
        if (misses_real(j, c, sw, end))
            out.real_deadline_misses.push_back(j.rec);
        if (misses_tight(j, c, sw, end))
            out.tight_deadline_misses.push_back(j.rec);
    };
    if (trace)
        e.on_event = [&](SimEventKind kind, Ticks t, const Job* j) {
            trace({kind, tm(t), j ? k.tasks[j->task].id : 0, j ? j->rec : 0});
        };

    if (sw) {
        e.run_until(*sw);
        e.switch_now();
        out.switch_effective = tm(*sw);
    }
    e.run_until(end);
    e.finish_all();
    std::sort(out.real_deadline_misses.begin(), out.real_deadline_misses.end());
    std::sort(out.tight_deadline_misses.begin(), out.tight_deadline_misses.end());
    return out;
}

Rational simulation_horizon(const TaskSet& ts)
{
    const TickSet k = to_ticks(ts);
    Ticks h = k.max_deadline();
    for (Mode m : {Mode::LC, Mode::HC}) {
        if (m == Mode::HC && k.hi_count() == 0)
            continue;
        const HorizonProbe p = probe_horizon(k, m);
        if (!p.overloaded) {
            h = std::max(h, p.horizon.t_max);
            continue;
        }
        if (p.hyperperiod_bound == 0)
            throw BudgetExceeded("no finite simulation horizon within the tick range");
        h = std::max(h, p.hyperperiod_bound);
    }
    return Rational(ceil_of(make_rational(h, k.scale)));
}

namespace {

// HC-only synchronous dbf check with real deadlines: when it holds, no HI job
// released after an idle instant can miss, so runs may stop there.
bool hc_alone_feasible(const TaskSet& ts)
{
    std::vector<Task> v;
    for (Task t : ts) {
        if (!t.is_hi())
            continue;
        t.criticality = Criticality::LO;
        t.wcet_lo = t.wcet_hi;
        t.tight_deadline = Rational(t.deadline);
        v.push_back(t);
    }
    if (v.empty())
        return true;
    return lc_test(TaskSet(v)).schedulable;
}

}  // namespace

Verdict exhaustive_simulation(const TaskSet& ts, const SimulationOptions& opt)
{
    Verdict v;
    v.test_name = "simulation";
    const TickSet k = to_ticks(ts);
    const Rational horizon = opt.horizon ? *opt.horizon : simulation_horizon(ts);
    const Ticks end = to_int64(ceil_of(horizon * k.scale));
    if (opt.max_ticks && end > *opt.max_ticks)
        throw BudgetExceeded("simulation horizon of " + std::to_string(end) + " ticks exceeds the cap");
    const bool stop_idle = hc_alone_feasible(ts);
    const auto rel = synchronous(k, 2 * end);
    auto tm = [&](Ticks t) { return ticks_to_time(t, k.scale); };

    struct Miss {
        Ticks deadline;
        Ticks seen;  // completion, or the end of the run
    };
    std::optional<Miss> miss;
    auto checker = [&](std::optional<Ticks> sw, Ticks until, Engine& e) {
        e.on_finish = [&, sw, until](const Job& j, std::optional<Ticks> c, bool) {
            if (misses_real(j, c, sw, until) && (!miss || j.real_dl < miss->deadline))
                miss = Miss{j.real_dl, c ? *c : until};
        };
    };

    Engine none(k, rel, end);
    checker(std::nullopt, end, none);
    none.run_until(end);
    none.finish_all();
    if (miss) {
        v.schedulable = false;
        v.witness = Witness{std::nullopt, tm(miss->deadline)};
        v.lhs_at_witness = tm(miss->seen);
        v.note = "miss without a switch";
        return v;
    }

    Engine lc(k, rel, 2 * end);
    for (Ticks t1 = 0; t1 <= end; ++t1) {
        poll(opt.budget);
        lc.run_until(t1);
        Engine c = lc;
        c.set_release_limit(t1 + end);
        c.stop_when_idle_after_switch = stop_idle;
        checker(t1, t1 + end, c);
        c.switch_now();
        c.run_until(t1 + end);
        if (!c.stop)
            c.finish_all();
        if (miss) {
            v.schedulable = false;
            v.witness = Witness{tm(t1), tm(miss->deadline)};
            v.lhs_at_witness = tm(miss->seen);
            v.note = "miss after the switch";
            return v;
        }
    }
    return v;
}

}  // namespace mcs
