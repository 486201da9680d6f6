#include "mcs/harness.hpp"

#include "mcs/schedulability.hpp"
#include "mcs/sim.hpp"
#include "mcs/tighten.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

namespace mcs {

namespace {

constexpr Algorithm kAllAlgorithms[] = {Algorithm::Ecdf,  Algorithm::Greedy,         Algorithm::Edfpd,
                                        Algorithm::Edfvd, Algorithm::ExhaustiveTest, Algorithm::ExhaustiveSim};

bool needs_implicit(Algorithm a)
{
    return a == Algorithm::Edfpd || a == Algorithm::Edfvd;
}

}  // namespace

std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Ecdf: return "ecdf";
    case Algorithm::Greedy: return "greedy";
    case Algorithm::Edfpd: return "edfpd";
    case Algorithm::Edfvd: return "edfvd";
    case Algorithm::ExhaustiveTest: return "exhaustive-test";
    case Algorithm::ExhaustiveSim: return "exhaustive-sim";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view text)
{
    for (Algorithm a : kAllAlgorithms)
        if (to_string(a) == text)
            return a;
    throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

CampaignConfig default_campaign()
{
    CampaignConfig c;
    for (int permille : {650, 700, 750, 800, 850, 900, 950, 975})
        c.l_bounds.push_back(make_rational(permille, 1000));
    c.p_criticalities = {make_rational(1, 2), make_rational(7, 10)};
    c.algorithms = {Algorithm::Ecdf, Algorithm::Greedy};
    return c;
}

void validate(const CampaignConfig& cfg)
{
    auto fail = [](const std::string& m) { throw ConfigError("campaign config: " + m); };
    if (cfg.sets_per_bucket < 1)
        fail("sets_per_bucket must be at least 1");
    if (cfg.algorithms.empty())
        fail("algorithms must not be empty");
    if (cfg.workers < 1)
        fail("workers must be at least 1");
    if (!(cfg.timeout_s > 0))
        fail("timeout_s must be positive");
    for (const Rational& l : cfg.l_bounds)
        if (l <= 0 || l > 1)
            fail("every l_bound must lie in (0, 1]");
    for (const Rational& p : cfg.p_criticalities)
        if (p < 0 || p > 1)
            fail("every p_criticality must lie in [0, 1]");
    GenParams g = cfg.generator;
    g.l_bound = cfg.l_bounds.empty() ? make_rational(1, 2) : cfg.l_bounds.front();
    try {
        validate(g);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

CampaignConfig campaign_from_json(const Json& j)
{
    CampaignConfig c = default_campaign();
    try {
        if (!j.is_object())
            throw ConfigError("campaign config must be a JSON object");
        auto rationals = [](const Json& v) {
            if (!v.is_array())
                throw ConfigError("expected an array of numbers");
            std::vector<Rational> out;
            for (const Json& e : v)
                out.push_back(rational_from_json(e));
            return out;
        };
        bool implicit = false;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const Json& v = it.value();
            if (k == "l_bounds") {
                c.l_bounds = rationals(v);
            } else if (k == "p_criticalities") {
                c.p_criticalities = rationals(v);
            } else if (k == "deadline_mode") {
                c.deadline_mode = parse_deadline_mode(v.get<std::string>());
            } else if (k == "implicit_deadlines") {
                implicit = v.get<bool>();
            } else if (k == "sets_per_bucket") {
                c.sets_per_bucket = v.get<int>();
            } else if (k == "algorithms") {
                c.algorithms.clear();
                for (const Json& a : v)
                    c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
            } else if (k == "base_seed") {
                c.base_seed = v.get<std::uint64_t>();
            } else if (k == "workers") {
                c.workers = v.get<int>();
            } else if (k == "timeout_s") {
                c.timeout_s = v.get<double>();
            } else if (k == "record_wall_time") {
                c.record_wall_time = v.get<bool>();
            } else if (k == "generator") {
                c.generator = params_from_json(v, c.generator);
            } else if (k == "fixtures") {
                for (const Json& ts : v)
                    c.fixtures.push_back(taskset_from_json(ts));
            } else {
                throw ConfigError("unknown key '" + k + "'");
            }
        }
        if (implicit)
            c.deadline_mode = DeadlineMode::Implicit;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("campaign config: ") + e.what());
    }
    validate(c);
    return c;
}

bool BucketResult::operator==(const BucketResult& o) const
{
    return l_bound == o.l_bound && p_criticality == o.p_criticality && deadline_mode == o.deadline_mode
           && algorithm == o.algorithm && accepted == o.accepted && total == o.total && fraction == o.fraction
           && wall_time_s == o.wall_time_s;
}

std::uint64_t set_seed(std::uint64_t base_seed, std::size_t bucket, std::size_t index)
{
    return mix_seed(base_seed, 0x6275636b6574ULL ^ bucket, index);
}

bool exhaustive_sim_search(const TaskSet& ts, const Budget* budget)
{
    ExhaustiveOptions eo;
    eo.budget = budget;
    if (exhaustive_test_search(ts, eo).success)
        return true;

    SimulationOptions so;
    so.budget = budget;
    // A switch at 0 resets every job to its real deadline before it runs, so
    // that run does not depend on the assignment.
    {
        Scenario sc;
        sc.switch_at = Rational(0);
        sc.horizon = simulation_horizon(ts);
        if (!simulate(ts, sc).real_deadline_misses.empty())
            return false;
    }
    std::vector<const Task*> hi;
    for (const Task& t : ts)
        if (t.is_hi())
            hi.push_back(&t);
    std::vector<std::int64_t> d(hi.size());
    for (std::size_t i = 0; i < hi.size(); ++i)
        d[i] = hi[i]->wcet_lo;
    for (;;) {
        poll(budget);
        DeadlineAssignment a;
        for (std::size_t i = 0; i < hi.size(); ++i)
            a[hi[i]->id] = make_rational(d[i]);
        if (exhaustive_simulation(apply_tightening(ts, a), so).schedulable)
            return true;
        std::size_t i = hi.size();
        while (i > 0) {
            --i;
            if (d[i] < hi[i]->deadline) {
                ++d[i];
                break;
            }
            d[i] = hi[i]->wcet_lo;
            if (i == 0)
                return false;
        }
        if (hi.empty())
            return false;
    }
}

namespace {

struct Outcome {
    bool accepted = false;
    bool timeout = false;
    bool error = false;
    bool violation = false;
    double seconds = 0;
};

struct SetResult {
    bool generated = false;
    std::vector<Outcome> per_algorithm;
};

bool run_one(Algorithm a, const TaskSet& ts, const Budget* b, bool& violation)
{
    switch (a) {
    case Algorithm::Ecdf: return ecdf(ts, b).success;
    case Algorithm::Greedy: {
        const TighteningResult r = greedy_reconstruction(ts, b);
        if (r.success) {
            const TaskSet t = apply_tightening(ts, r.assignment);
            violation = !(lc_test(t).schedulable && hc_test_improved(t).schedulable);
        }
        return r.success;
    }
    case Algorithm::Edfpd: return edfpd(ts, b).success;
    case Algorithm::Edfvd: return edfvd_test(ts).schedulable;
    case Algorithm::ExhaustiveTest: {
        ExhaustiveOptions o;
        o.budget = b;
        return exhaustive_test_search(ts, o).success;
    }
    case Algorithm::ExhaustiveSim: return exhaustive_sim_search(ts, b);
    }
    return false;
}

int worker_count(const CampaignConfig& cfg)
{
    if (const char* env = std::getenv("MCS_WORKERS")) {
        int n = 0;
        const std::string_view s(env);
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc() && p == s.data() + s.size() && n > 0)
            return n;
    }
    return cfg.workers;
}

}  // namespace

std::vector<BucketResult> run_campaign(const CampaignConfig& cfg, CampaignLog* log)
{
    validate(cfg);
    std::vector<Algorithm> algs;
    for (Algorithm a : cfg.algorithms) {
        if (needs_implicit(a) && cfg.deadline_mode != DeadlineMode::Implicit) {
            if (log)
                log->messages.push_back(std::string(to_string(a)) + " skipped: needs implicit deadlines (deadline_mode = "
                                        + std::string(to_string(cfg.deadline_mode)) + ")");
            continue;
        }
        algs.push_back(a);
    }

    const std::size_t nb = cfg.l_bounds.size() * cfg.p_criticalities.size();
    const std::size_t per = static_cast<std::size_t>(cfg.sets_per_bucket);
    std::vector<SetResult> sets(nb * per);
    const auto timeout = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(cfg.timeout_s));

    auto evaluate = [&](std::size_t item) {
        const std::size_t b = item / per, j = item % per;
        SetResult& out = sets[item];
        out.per_algorithm.resize(algs.size());
        std::optional<TaskSet> ts;
        if (!cfg.fixtures.empty()) {
            ts = cfg.fixtures[j % cfg.fixtures.size()];
        } else {
            GenParams g = cfg.generator;
            g.l_bound = cfg.l_bounds[b / cfg.p_criticalities.size()];
            g.p_criticality = cfg.p_criticalities[b % cfg.p_criticalities.size()];
            g.deadline_mode = cfg.deadline_mode;
            g.seed = set_seed(cfg.base_seed, b, j);
            try {
                ts = generate_taskset(g);
            } catch (const std::exception&) {
                return;
            }
        }
        out.generated = true;
        for (std::size_t k = 0; k < algs.size(); ++k) {
            Outcome& o = out.per_algorithm[k];
            const Budget budget(timeout);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                o.accepted = run_one(algs[k], *ts, &budget, o.violation);
            } catch (const AnalysisTimeout&) {
                o.timeout = true;
            } catch (const BudgetExceeded&) {
                o.timeout = true;
            } catch (const std::exception&) {
                o.error = true;
            }
            o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        // Exhaustive searches cover every ECDF assignment.
        auto at = [&](Algorithm a) -> Outcome* {
            auto it = std::find(algs.begin(), algs.end(), a);
            return it == algs.end() ? nullptr : &out.per_algorithm[static_cast<std::size_t>(it - algs.begin())];
        };
        const Outcome* e = at(Algorithm::Ecdf);
        for (Algorithm x : {Algorithm::ExhaustiveTest, Algorithm::ExhaustiveSim}) {
            Outcome* o = at(x);
            if (e && o && e->accepted && !o->accepted && !o->timeout && !o->error)
                o->violation = true;
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < sets.size();)
            evaluate(i);
    };
    const int nw = std::max(1, std::min<int>(worker_count(cfg), static_cast<int>(sets.size())));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    std::vector<BucketResult> rows;
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t k = 0; k < algs.size(); ++k) {
            BucketResult r;
            r.l_bound = cfg.l_bounds[b / cfg.p_criticalities.size()];
            r.p_criticality = cfg.p_criticalities[b % cfg.p_criticalities.size()];
            r.deadline_mode = cfg.deadline_mode;
            r.algorithm = std::string(to_string(algs[k]));
            for (std::size_t j = 0; j < per; ++j) {
                const SetResult& s = sets[b * per + j];
                if (!s.generated) {
                    ++r.errors;
                    continue;
                }
                const Outcome& o = s.per_algorithm[k];
                ++r.total;
                r.accepted += o.accepted;
                r.timeouts += o.timeout;
                r.errors += o.error;
                r.violations += o.violation;
                r.wall_time_s += o.seconds;
            }
            r.fraction = r.total ? make_rational(r.accepted, r.total) : Rational(0);
            if (!cfg.record_wall_time)
                r.wall_time_s = 0;
            rows.push_back(std::move(r));
        }
    }
    if (log) {
        for (const BucketResult& r : rows) {
            if (r.timeouts || r.errors || r.violations)
                log->messages.push_back("l_bound " + to_decimal_string(r.l_bound) + ", p " + to_decimal_string(r.p_criticality)
                                        + ", " + r.algorithm + ": " + std::to_string(r.timeouts) + " timed out, "
                                        + std::to_string(r.errors) + " errors, " + std::to_string(r.violations)
                                        + " cross-check violations");
        }
    }
    return rows;
}

namespace {

const char* const kCsvHeader = "l_bound,p_criticality,deadline_mode,algorithm,accepted,total,fraction,wall_time_s";

std::string fraction_text(const Rational& f)
{
    std::string s = to_decimal_string(f);
    if (s.find('/') == std::string::npos)
        return s;
    // Non-terminating: six decimals, rounded half up.
    const Integer scaled = floor_of(f * 1000000 + make_rational(1, 2));
    std::string digits = scaled.get_str();
    if (digits.size() < 7)
        digits.insert(0, 7 - digits.size(), '0');
    return digits.substr(0, digits.size() - 6) + "." + digits.substr(digits.size() - 6);
}

std::string double_text(double v)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

std::int64_t parse_int(const std::string& s)
{
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("malformed integer '" + s + "'");
    return v;
}

}  // namespace

std::string results_csv(const std::vector<BucketResult>& rs)
{
    std::string out = std::string(kCsvHeader) + "\n";
    for (const BucketResult& r : rs) {
        out += to_decimal_string(r.l_bound) + "," + to_decimal_string(r.p_criticality) + ","
               + std::string(to_string(r.deadline_mode)) + "," + r.algorithm + "," + std::to_string(r.accepted) + ","
               + std::to_string(r.total) + "," + fraction_text(r.fraction) + "," + double_text(r.wall_time_s) + "\n";
    }
    return out;
}

std::vector<BucketResult> parse_results_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::invalid_argument("results CSV: unexpected header");
    std::vector<BucketResult> rs;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 8)
            throw std::invalid_argument("results CSV: expected 8 fields in '" + line + "'");
        BucketResult r;
        r.l_bound = parse_rational(f[0]);
        r.p_criticality = parse_rational(f[1]);
        r.deadline_mode = parse_deadline_mode(f[2]);
        r.algorithm = f[3];
        r.accepted = parse_int(f[4]);
        r.total = parse_int(f[5]);
        r.fraction = r.total ? make_rational(r.accepted, r.total) : Rational(0);
        const auto [p, ec] = std::from_chars(f[7].data(), f[7].data() + f[7].size(), r.wall_time_s);
        if (ec != std::errc() || p != f[7].data() + f[7].size())
            throw std::invalid_argument("results CSV: malformed wall time '" + f[7] + "'");
        rs.push_back(std::move(r));
    }
    return rs;
}

Json results_json(const std::vector<BucketResult>& rs)
{
    Json arr = Json::array();
    for (const BucketResult& r : rs) {
        arr.push_back({{"l_bound", rational_to_json(r.l_bound)},
                       {"p_criticality", rational_to_json(r.p_criticality)},
                       {"deadline_mode", std::string(to_string(r.deadline_mode))},
                       {"algorithm", r.algorithm},
                       {"accepted", r.accepted},
                       {"total", r.total},
                       {"fraction", rational_to_json(r.fraction)},
                       {"wall_time_s", r.wall_time_s},
                       {"timeouts", r.timeouts},
                       {"errors", r.errors},
                       {"violations", r.violations}});
    }
    return arr;
}

std::string plot_tsv(const std::vector<BucketResult>& rs)
{
    std::vector<Rational> xs;
    std::vector<std::string> curves;
    std::vector<std::pair<Rational, DeadlineMode>> groups;
    for (const BucketResult& r : rs) {
        if (std::find(xs.begin(), xs.end(), r.l_bound) == xs.end())
            xs.push_back(r.l_bound);
        const std::pair<Rational, DeadlineMode> g{r.p_criticality, r.deadline_mode};
        if (std::find(groups.begin(), groups.end(), g) == groups.end())
            groups.push_back(g);
    }
    auto name = [&](const BucketResult& r) {
        if (groups.size() <= 1)
            return r.algorithm;
        return r.algorithm + "/p=" + to_decimal_string(r.p_criticality) + "/" + std::string(to_string(r.deadline_mode));
    };
    std::map<std::pair<std::string, Rational>, Rational> cell;
    for (const BucketResult& r : rs) {
        const std::string n = name(r);
        if (std::find(curves.begin(), curves.end(), n) == curves.end())
            curves.push_back(n);
        cell[{n, r.l_bound}] = r.fraction;
    }
    std::string out = "l_bound";
    for (const std::string& c : curves)
        out += "\t" + c;
    out += "\n";
    for (const Rational& x : xs) {
        out += to_decimal_string(x);
        for (const std::string& c : curves) {
            auto it = cell.find({c, x});
            out += "\t" + (it == cell.end() ? std::string("nan") : fraction_text(it->second));
        }
        out += "\n";
    }
    return out;
}

void emit_results(const std::vector<BucketResult>& rs, ResultFormat f, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    if (f == ResultFormat::Csv)
        write_text(dir / "results.csv", results_csv(rs));
    else
        write_text(dir / "results.json", results_json(rs).dump(2) + "\n");
    write_text(dir / "plot.tsv", plot_tsv(rs));
}

}  // namespace mcs
