#include "mcs/tighten.hpp"

#include "mcs/demand.hpp"
#include "mcs/schedulability.hpp"
#include "mcs/timebase.hpp"

#include <algorithm>
#include <limits>

namespace mcs {

using kernels::PairVariant;

namespace {

constexpr Ticks kInf = std::numeric_limits<Ticks>::max();
// Finest tick grid on which proportionate deadlines are checked as they are.
constexpr Ticks kPdMaxScale = 8;

// Working copy on the integer grid: tightening strategies only move D^L in
// whole time units, so an untightened integer set keeps scale 1 throughout.
struct Work {
    TaskSet base;
    TickSet k;

    explicit Work(const TaskSet& ts) : base(untightened(ts)), k(to_ticks(base)) {}

    DeadlineAssignment assignment() const
    {
        DeadlineAssignment a;
        for (const auto& t : k.tasks)
            if (t.hi)
                a[t.id] = make_rational(t.tight);
        return a;
    }
};

TraceStep step(std::size_t it, std::string action, int task = 0)
{
    TraceStep s;
    s.iteration = it;
    s.action = std::move(action);
    s.task = task;
    return s;
}

TraceStep step_at(std::size_t it, std::string action, int task, const tick::Check& c)
{
    TraceStep s = step(it, std::move(action), task);
    if (c.t1 >= 0)
        s.t1 = make_rational(c.t1);
    if (c.t2 >= 0) {
        s.t2 = make_rational(c.t2);
        s.excess = make_rational(c.excess());
    }
    return s;
}

TighteningResult finish(TighteningResult r, const Work& w, bool ok, std::string note = {})
{
    r.success = ok;
    r.assignment = w.assignment();
    if (!note.empty())
        r.note = std::move(note);
    r.trace.push_back(step(r.iterations, ok ? "accept" : "reject"));
    return r;
}

std::optional<std::size_t> pick_case2(const TickSet& k, const std::set<int>& cand, Ticks t1, Ticks t2,
                                      Ticks excess, bool filter)
{
    std::optional<std::size_t> best;
    Ticks dec = kInf, diff = 0;
    for (std::size_t i = 0; i < k.tasks.size(); ++i) {
        const TickTask& t = k.tasks[i];
        if (!cand.count(t.id) || !t.hi || ticks::classify(t, t1, t2) != CarryCase::Case2)
            continue;
        const Ticks gain = t.wcet_hi - t.wcet_lo;
        if (filter && gain < excess)
            continue;
        const Ticks d = ticks::mod(t2 - t1, t.period) - (t.deadline - t.tight);
        const bool better = d < dec || (d == dec && (gain > diff || (gain == diff && best && t.id < k.tasks[*best].id)));
        if (!best || better) {
            best = i;
            dec = d;
            diff = gain;
        }
    }
    return best;
}

}  // namespace

std::optional<int> find_candidate(const TaskSet& ts, const std::set<int>& candidates, const Rational& t1,
                                  const Rational& t2, const Rational& excess)
{
    std::optional<int> best;
    Rational dec;
    std::int64_t diff = 0;
    for (const Task& t : ts) {
        if (!t.is_hi() || !candidates.count(t.id) || classify_case(t, t1, t2) != CarryCase::Case2)
            continue;
        const std::int64_t gain = t.wcet_hi - t.wcet_lo;
        if (Rational(gain) < excess)
            continue;
        const Rational d = mod_rem(t2 - t1, t.period) - (Rational(t.deadline) - t.tight_deadline);
        if (!best || d < dec || (d == dec && (gain > diff || (gain == diff && t.id < *best)))) {
            best = t.id;
            dec = d;
            diff = gain;
        }
    }
    return best;
}

TighteningResult ecdf(const TaskSet& ts, const Budget* budget)
{
    TighteningResult r;
    r.strategy = "ecdf";
    Work w(ts);
    TickSet& k = w.k;
    const tick::Limits lim{std::nullopt, budget};

    std::set<int> cand;
    for (const auto& t : k.tasks)
        if (t.hi && t.tight - 1 >= t.wcet_lo)
            cand.insert(t.id);
    std::optional<std::size_t> last;

    while (true) {
        poll(budget);
        const tick::Check lc = tick::lc(k, lim);
        if (!lc.ok) {
            if (!last)
                return finish(std::move(r), w, false, lc.t2 < 0 ? lc.note : "lc");
            TickTask& t = k.tasks[*last];
            t.tight += 1;
            cand.erase(t.id);
            r.removed_candidates.push_back(t.id);
            r.trace.push_back(step_at(++r.iterations, "backtrack", t.id, lc));
            last.reset();
        }
        const tick::Check hc = tick::pair(k, PairVariant::Improved, lim);
        if (hc.ok) {
            if (lc.ok)
                return finish(std::move(r), w, true);
            continue;  // re-check LC on the restored deadlines
        }
        if (hc.t2 < 0)
            return finish(std::move(r), w, false, hc.note);
        if (hc.t1 == 0 || cand.empty())
            return finish(std::move(r), w, false, hc.t1 == 0 ? "t1 = 0" : "no candidates");

        std::optional<std::size_t> i = pick_case2(k, cand, hc.t1, hc.t2, hc.excess(), true);
        if (!i) {
            i = pick_case2(k, cand, hc.t1, hc.t2, hc.excess(), false);
            if (!i)
                return finish(std::move(r), w, false, "no case2 candidate");
            r.trace.push_back(step_at(r.iterations, "fallback", k.tasks[*i].id, hc));
        }
        TickTask& t = k.tasks[*i];
        t.tight -= 1;
        r.trace.push_back(step_at(++r.iterations, "tighten", t.id, hc));
        last = i;
        if (t.tight - 1 < t.wcet_lo) {
            cand.erase(t.id);
            r.removed_candidates.push_back(t.id);
            r.trace.push_back(step(r.iterations, "remove", t.id));
        }
    }
}

namespace {

Ticks prior_share(const TickTask& k, Ticks t)
{
    Ticks d = ticks::dbf_hc(k, t);
    if (ticks::in_carry_set(k, t))
        d += k.wcet_hi - k.wcet_lo + ticks::carry_over(k, t);
    return d;
}

}  // namespace

TighteningResult greedy_reconstruction(const TaskSet& ts, const Budget* budget)
{
    TighteningResult r;
    r.strategy = "greedy";
    Work w(ts);
    TickSet& k = w.k;
    const tick::Limits lim{std::nullopt, budget};

    std::set<int> cand;
    for (const auto& t : k.tasks)
        if (t.hi && t.tight - 1 >= t.wcet_lo)
            cand.insert(t.id);
    std::optional<std::size_t> last;

    while (true) {
        poll(budget);
        const tick::Check lc = tick::lc(k, lim);
        if (!lc.ok) {
            if (!last)
                return finish(std::move(r), w, false, lc.t2 < 0 ? lc.note : "lc");
            TickTask& t = k.tasks[*last];
            t.tight += 1;
            cand.erase(t.id);
            r.removed_candidates.push_back(t.id);
            r.trace.push_back(step_at(++r.iterations, "backtrack", t.id, lc));
            last.reset();
        }
        const tick::Check hc = tick::prior(k, lim);
        if (hc.ok) {
            if (lc.ok)
                return finish(std::move(r), w, true);
            continue;
        }
        if (hc.t2 < 0)
            return finish(std::move(r), w, false, hc.note);
        if (cand.empty())
            return finish(std::move(r), w, false, "no candidates");

        std::optional<std::size_t> best;
        Ticks gain = 0;
        for (std::size_t i = 0; i < k.tasks.size(); ++i) {
            TickTask t = k.tasks[i];
            if (!cand.count(t.id))
                continue;
            const Ticks before = prior_share(t, hc.t2);
            t.tight -= 1;
            const Ticks g = before - prior_share(t, hc.t2);
            if (g > gain || (g == gain && g > 0 && best && t.id < k.tasks[*best].id)) {
                best = i;
                gain = g;
            }
        }
        if (!best)
            return finish(std::move(r), w, false, "no reducing candidate");
        TickTask& t = k.tasks[*best];
        t.tight -= 1;
        r.trace.push_back(step_at(++r.iterations, "tighten", t.id, hc));
        last = best;
        if (t.tight - 1 < t.wcet_lo) {
            cand.erase(t.id);
            r.removed_candidates.push_back(t.id);
            r.trace.push_back(step(r.iterations, "remove", t.id));
        }
    }
}

ProportionateDeadlines edfpd_preprocess(const TaskSet& ts)
{
    if (!ts.implicit_deadlines())
        throw NotImplicitDeadline("proportionate deadlines need implicit deadlines");
    const UtilizationSummary u = utilizations(ts);
    Rational num = 0;
    for (const Task& t : ts)
        if (t.is_hi())
            num += (t.u_hi() - t.u_lo()) * t.u_lo();

    ProportionateDeadlines out;
    if (num == 0) {
        out.degenerate = true;
        for (const Task& t : ts)
            if (t.is_hi()) {
                out.shares[t.id] = 0;
                out.pd[t.id] = make_rational(t.period);
            }
        return out;
    }
    const Rational slack = 1 - u.u_lo_lo - u.u_hi_lo;
    if (slack <= 0)
        throw ZeroSlack("no LC utilization left to distribute (U_LL + U_HL = " + to_string(1 - slack) + ")");
    const Rational x = num / slack;
    out.x = x;
    for (const Task& t : ts) {
        if (!t.is_hi())
            continue;
        const Rational gap = t.u_hi() - t.u_lo();
        out.shares[t.id] = gap * t.u_lo() / x;
        out.pd[t.id] = x * t.period / (x + gap);
    }
    return out;
}

TighteningResult edfpd(const TaskSet& ts, const Budget* budget)
{
    TighteningResult r;
    r.strategy = "edfpd";
    ProportionateDeadlines p;
    try {
        p = edfpd_preprocess(ts);
    } catch (const std::exception& e) {
        r.note = e.what();
        r.trace.push_back(step(0, "reject"));
        return r;
    }
    for (const auto& [id, d] : p.pd) {
        if (d < ts.find(id)->wcet_lo) {
            r.assignment = p.pd;
            r.note = "proportionate deadline below C^L for task " + std::to_string(id);
            r.trace.push_back(step(0, "reject", id));
            return r;
        }
    }
    r.assignment = p.pd;
    TaskSet tight = apply_tightening(ts, r.assignment);
    Ticks scale = 0;
    try {
        scale = to_ticks(tight).scale;
    } catch (const TimebaseOverflow&) {
    }
    if (scale == 0 || scale > kPdMaxScale) {
        // The pair sweep is quadratic in the tick resolution; fall back to
        // whole time units, rounding towards the tighter deadline.
        for (auto& [id, d] : r.assignment)
            d = std::max(Rational(floor_of(d)), Rational(ts.find(id)->wcet_lo));
        tight = apply_tightening(ts, r.assignment);
        r.note = "rounded to integers";
    }
    SweepOptions opt;
    opt.budget = budget;
    r.iterations = 1;
    r.success = lc_test(tight, opt).schedulable && hc_test_improved(tight, opt).schedulable;
    r.trace.push_back(step(1, r.success ? "accept" : "reject"));
    return r;
}

// ---------------------------------------------------------------------------
// Exhaustive search.
//
// Assignments are enumerated depth-first in lexicographic order. Failing
// points found by full sweeps are cached; every cached point yields a lower
// bound on the demand of a whole subtree, because both demands are monotone
// in their per-task aggregates.

namespace {

struct Parts {
    Ticks cap = 0, un = 0, before = 0, lpart = 0, hpart = 0;
};

Parts improved_parts(const TickTask& k, Ticks t1, Ticks t2)
{
    Parts p;
    const CarryCase c = k.hi ? ticks::classify(k, t1, t2) : CarryCase::Case1;
    if (c == CarryCase::Case1) {
        p.before = ticks::dbf_lc(k, t1);
        p.un = ticks::unnecessary(k, t1, t2);
        p.cap = k.tight;
        return p;
    }
    const ticks::PairParts q = ticks::pair_parts(k, t1, t2, c);
    if (c == CarryCase::Case2) {
        const Ticks co = ticks::carry_over(k, t2 - t1);
        p.lpart = std::max<Ticks>(0, q.lc + k.wcet_lo - co);
        p.hpart = q.hc + co + k.wcet_hi - k.wcet_lo;
    } else {
        p.lpart = q.lc + q.co;
        p.hpart = q.hc;
    }
    return p;
}

Parts lower(const Parts& a, const Parts& b)
{
    return {std::min(a.cap, b.cap), std::min(a.un, b.un), std::min(a.before, b.before), std::min(a.lpart, b.lpart),
            std::min(a.hpart, b.hpart)};
}

struct Acc {
    Ticks cap = 0, un = 0, before = 0, lpart = 0, hpart = 0;
    void add(const Parts& p)
    {
        cap = std::max(cap, p.cap);
        un += p.un;
        before += p.before;
        lpart += p.lpart;
        hpart += p.hpart;
    }
    Ticks value(Ticks t1) const { return std::min(t1, std::min(cap, un) + before + lpart) + hpart; }
};

struct PairPoint {
    Ticks t1 = 0, t2 = 0;
    Acc fixed;                            // LO tasks
    std::vector<std::vector<Parts>> by;   // [hi j][d - lo_j]
    std::vector<Parts> free_min;          // [hi j]
};

struct LcPoint {
    Ticks t = 0;
    Ticks fixed = 0;
    std::vector<std::vector<Ticks>> by;  // [hi j][d - lo_j]
};

class Search {
public:
    Search(const TaskSet& ts, const ExhaustiveOptions& opt) : w_(ts), opt_(opt)
    {
        for (std::size_t i = 0; i < w_.k.tasks.size(); ++i)
            if (w_.k.tasks[i].hi)
                hi_.push_back(i);
        std::sort(hi_.begin(), hi_.end(), [&](auto a, auto b) { return w_.k.tasks[a].id < w_.k.tasks[b].id; });
        cur_.resize(hi_.size());
    }

    TighteningResult run()
    {
        TighteningResult r;
        r.strategy = "exhaustive";
        const bool found = dfs(0);
        r.iterations = tried_;
        r.success = found;
        if (found) {
            for (std::size_t j = 0; j < hi_.size(); ++j)
                w_.k.tasks[hi_[j]].tight = cur_[j];
        }
        r.assignment = w_.assignment();
        r.note = std::to_string(lc_cache_.size()) + " LC and " + std::to_string(pair_cache_.size())
                 + " HC failure points cached";
        r.trace.push_back(step(tried_, found ? "accept" : "reject"));
        return r;
    }

private:
    Ticks lo(std::size_t j) const { return w_.k.tasks[hi_[j]].wcet_lo; }
    Ticks hi(std::size_t j) const { return w_.k.tasks[hi_[j]].deadline; }

    // True when the subtree with cur_[0..fixed) fixed is known to fail.
    bool doomed(std::size_t fixed) const
    {
        for (const LcPoint& p : lc_cache_) {
            Ticks d = p.fixed;
            for (std::size_t j = 0; j < hi_.size(); ++j)
                d += j < fixed ? p.by[j][cur_[j] - lo(j)] : p.by[j].back();
            if (d > p.t)
                return true;
        }
        for (const PairPoint& p : pair_cache_) {
            Acc a = p.fixed;
            for (std::size_t j = 0; j < hi_.size(); ++j)
                a.add(j < fixed ? p.by[j][cur_[j] - lo(j)] : p.free_min[j]);
            if (a.value(p.t1) > p.t2)
                return true;
        }
        return false;
    }

    void remember_lc(Ticks t)
    {
        LcPoint p;
        p.t = t;
        for (const auto& k : w_.k.tasks)
            if (!k.hi)
                p.fixed += ticks::dbf_lc(k, t);
        p.by.resize(hi_.size());
        for (std::size_t j = 0; j < hi_.size(); ++j) {
            TickTask k = w_.k.tasks[hi_[j]];
            for (k.tight = lo(j); k.tight <= hi(j); ++k.tight)
                p.by[j].push_back(ticks::dbf_lc(k, t));
        }
        lc_cache_.insert(lc_cache_.begin(), std::move(p));
    }

    void remember_pair(Ticks t1, Ticks t2)
    {
        PairPoint p;
        p.t1 = t1;
        p.t2 = t2;
        for (const auto& k : w_.k.tasks)
            if (!k.hi)
                p.fixed.add(improved_parts(k, t1, t2));
        p.by.resize(hi_.size());
        p.free_min.resize(hi_.size());
        for (std::size_t j = 0; j < hi_.size(); ++j) {
            TickTask k = w_.k.tasks[hi_[j]];
            for (k.tight = lo(j); k.tight <= hi(j); ++k.tight) {
                const Parts q = improved_parts(k, t1, t2);
                p.free_min[j] = p.by[j].empty() ? q : lower(p.free_min[j], q);
                p.by[j].push_back(q);
            }
        }
        pair_cache_.insert(pair_cache_.begin(), std::move(p));
    }

    bool leaf()
    {
        if (++tried_ > opt_.max_assignments)
            throw BudgetExceeded("exhaustive search tried more than " + std::to_string(opt_.max_assignments)
                                 + " assignments");
        if ((tried_ & 0xff) == 0)
            poll(opt_.budget);
        if (doomed(hi_.size()))
            return false;
        for (std::size_t j = 0; j < hi_.size(); ++j)
            w_.k.tasks[hi_[j]].tight = cur_[j];
        const tick::Limits lim{std::nullopt, opt_.budget};
        const tick::Check lc = tick::lc(w_.k, lim);
        if (!lc.ok) {
            if (lc.t2 >= 0)
                remember_lc(lc.t2);
            return false;
        }
        const tick::Check hc = tick::pair(w_.k, PairVariant::Improved, lim);
        if (!hc.ok && hc.t2 >= 0)
            remember_pair(hc.t1, hc.t2);
        return hc.ok;
    }

    bool dfs(std::size_t j)
    {
        if (j == hi_.size())
            return leaf();
        for (Ticks d = lo(j); d <= hi(j); ++d) {
            cur_[j] = d;
            if (j + 1 < hi_.size() && doomed(j + 1))
                continue;
            if (dfs(j + 1))
                return true;
        }
        return false;
    }

    Work w_;
    ExhaustiveOptions opt_;
    std::vector<std::size_t> hi_;
    std::vector<Ticks> cur_;
    std::vector<LcPoint> lc_cache_;
    std::vector<PairPoint> pair_cache_;
    std::uint64_t tried_ = 0;
};

}  // namespace

TighteningResult exhaustive_test_search(const TaskSet& ts, const ExhaustiveOptions& opt)
{
    if (ts.hi_count() == 0) {
        TighteningResult r;
        r.strategy = "exhaustive";
        SweepOptions so;
        so.budget = opt.budget;
        r.success = lc_test(ts, so).schedulable;
        r.iterations = 1;
        r.trace.push_back(step(1, r.success ? "accept" : "reject"));
        return r;
    }
    return Search(ts, opt).run();
}

}  // namespace mcs
