#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcs/harness.hpp"
#include "mcs/sim.hpp"
#include "mcs/tighten.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>

using namespace mcs;

namespace {

Rational q(std::int64_t n, std::int64_t d = 1)
{
    return make_rational(n, d);
}

CampaignConfig small_config()
{
    CampaignConfig c;
    c.l_bounds = {q(13, 20), q(9, 10)};
    c.p_criticalities = {q(1, 2)};
    c.sets_per_bucket = 20;
    c.algorithms = {Algorithm::Ecdf, Algorithm::Greedy, Algorithm::ExhaustiveTest};
    c.record_wall_time = false;
    return c;
}

// Every integer assignment, each checked by the simulation oracle.
bool brute_sim(const TaskSet& ts)
{
    std::vector<const Task*> hi;
    for (const Task& t : ts)
        if (t.is_hi())
            hi.push_back(&t);
    std::vector<std::int64_t> d(hi.size());
    for (std::size_t i = 0; i < hi.size(); ++i)
        d[i] = hi[i]->wcet_lo;
    for (;;) {
        DeadlineAssignment a;
        for (std::size_t i = 0; i < hi.size(); ++i)
            a[hi[i]->id] = q(d[i]);
        if (exhaustive_simulation(apply_tightening(ts, a)).schedulable)
            return true;
        std::size_t i = 0;
        while (i < hi.size() && d[i] == hi[i]->deadline)
            d[i] = hi[i]->wcet_lo, ++i;
        if (i == hi.size())
            return false;
        ++d[i];
    }
}

}  // namespace

TEST_CASE("algorithm names")
{
    for (Algorithm a : {Algorithm::Ecdf, Algorithm::Greedy, Algorithm::Edfpd, Algorithm::Edfvd, Algorithm::ExhaustiveTest,
                        Algorithm::ExhaustiveSim})
        CHECK(parse_algorithm(to_string(a)) == a);
    CHECK_THROWS(parse_algorithm("test"));
}

TEST_CASE("config validation")
{
    CampaignConfig c = small_config();
    c.sets_per_bucket = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config();
    c.algorithms.clear();
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config();
    c.l_bounds.push_back(q(3, 2));
    CHECK_THROWS_AS(validate(c), ConfigError);

    const CampaignConfig j = campaign_from_json(Json::parse(
        R"({"l_bounds":[0.65,0.975],"p_criticalities":[0.7],"algorithms":["ecdf","exhaustive-test"],
            "sets_per_bucket":3,"generator":{"period_range":[10,30],"max_tasks":6}})"));
    CHECK(j.l_bounds == std::vector<Rational>{q(13, 20), q(39, 40)});
    CHECK(j.p_criticalities == std::vector<Rational>{q(7, 10)});
    CHECK(j.generator.period_lo == 10);
    CHECK(j.generator.max_tasks == 6);
    CHECK_THROWS_AS(campaign_from_json(Json::parse(R"({"algorithms":["nope"]})")), ConfigError);
    CHECK_THROWS_AS(campaign_from_json(Json::parse(R"({"sets_per_bucket":"many"})")), ConfigError);
    CHECK_THROWS_AS(campaign_from_json(Json::parse(R"({"colour":"red"})")), ConfigError);
    CHECK_THROWS_AS(campaign_from_json(Json::parse("[]")), ConfigError);

    const CampaignConfig d = default_campaign();
    CHECK(d.l_bounds.size() == 8);
    CHECK(d.l_bounds.back() == q(39, 40));
}

TEST_CASE("empty l_bounds give no rows")
{
    CampaignConfig c = small_config();
    c.l_bounds.clear();
    CHECK(run_campaign(c).empty());
}

TEST_CASE("EDF-VD on the implicit-deadline fixture")
{
    CampaignConfig c;
    c.l_bounds = {q(9, 10)};
    c.p_criticalities = {q(1, 2)};
    c.sets_per_bucket = 1;
    c.deadline_mode = DeadlineMode::Implicit;
    c.algorithms = {Algorithm::Edfvd};
    c.fixtures = {support::four_task_example()};
    const std::vector<BucketResult> r = run_campaign(c);
    REQUIRE(r.size() == 1);
    CHECK(r[0].algorithm == "edfvd");
    CHECK(r[0].total == 1);
    CHECK(r[0].accepted == 0);
    CHECK(r[0].fraction == 0);
}

TEST_CASE("implicit-only algorithms are skipped on constrained campaigns")
{
    CampaignConfig c = small_config();
    c.algorithms = {Algorithm::Edfpd, Algorithm::Ecdf, Algorithm::Edfvd};
    c.sets_per_bucket = 2;
    CampaignLog log;
    const std::vector<BucketResult> r = run_campaign(c, &log);
    CHECK(r.size() == 2);
    for (const BucketResult& b : r)
        CHECK(b.algorithm == "ecdf");
    REQUIRE(log.messages.size() == 2);
    CHECK(log.messages[0].find("edfpd skipped") == 0);

    c.deadline_mode = DeadlineMode::Implicit;
    const std::vector<BucketResult> i = run_campaign(c);
    CHECK(i.size() == 6);
}

TEST_CASE("paired, deterministic campaigns")
{
    const CampaignConfig c = small_config();
    const std::vector<BucketResult> a = run_campaign(c);
    REQUIRE(a.size() == 6);
    CHECK(results_csv(a) == results_csv(run_campaign(c)));
    for (std::size_t b = 0; b < 2; ++b) {
        const BucketResult& e = a[3 * b];
        const BucketResult& x = a[3 * b + 2];
        CHECK(e.algorithm == "ecdf");
        CHECK(x.algorithm == "exhaustive-test");
        CHECK(e.total == 20);
        CHECK(x.accepted >= e.accepted);
        CHECK(e.violations + a[3 * b + 1].violations + x.violations == 0);
        CHECK(e.fraction == q(e.accepted, e.total));
    }

    // Rows follow the configuration, not the completion order.
    CampaignConfig w = c;
    w.workers = 3;
    CHECK(results_csv(run_campaign(w)) == results_csv(a));

    // Each set's seed depends only on its bucket and index.
    CampaignConfig one = c;
    one.l_bounds = {q(13, 20)};
    const std::vector<BucketResult> s = run_campaign(one);
    CHECK(s[0] == a[0]);
}

TEST_CASE("CSV, JSON and plot output")
{
    BucketResult r;
    r.l_bound = q(13, 20);
    r.p_criticality = q(1, 2);
    r.algorithm = "ecdf";
    r.accepted = 1;
    r.total = 3;
    r.fraction = q(1, 3);
    r.wall_time_s = 0.1 + 0.2;
    const std::string csv = results_csv({r});
    CHECK(csv
          == "l_bound,p_criticality,deadline_mode,algorithm,accepted,total,fraction,wall_time_s\n"
             "0.65,0.5,full,ecdf,1,3,0.333333,0.30000000000000004\n");
    CHECK(parse_results_csv(csv) == std::vector<BucketResult>{r});

    BucketResult g = r;
    g.algorithm = "greedy";
    g.accepted = 0;
    g.fraction = 0;
    const std::string tsv = plot_tsv({r, g});
    CHECK(tsv == "l_bound\tecdf\tgreedy\n0.65\t0.333333\t0\n");

    BucketResult h = r;
    h.p_criticality = q(7, 10);
    h.l_bound = q(39, 40);
    CHECK(plot_tsv({r, h}) == "l_bound\tecdf/p=0.5/full\tecdf/p=0.7/full\n0.65\t0.333333\tnan\n0.975\tnan\t0.333333\n");

    const Json j = results_json({r});
    CHECK(j[0]["fraction"] == "1/3");
    CHECK(j[0]["total"] == 3);

    const std::vector<BucketResult> run = run_campaign(small_config());
    CHECK(parse_results_csv(results_csv(run)) == run);

    const auto dir = std::filesystem::temp_directory_path() / "mcs_test_harness";
    std::filesystem::remove_all(dir);
    emit_results(run, ResultFormat::Csv, dir);
    emit_results(run, ResultFormat::Json, dir);
    std::ifstream in(dir / "results.csv");
    const std::string back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(back == results_csv(run));
    CHECK(read_json(dir / "results.json").size() == run.size());
    CHECK(std::filesystem::exists(dir / "plot.tsv"));
    std::filesystem::remove_all(dir);

    CHECK_THROWS(parse_results_csv("bad header\n"));
    CHECK_THROWS(emit_results(run, ResultFormat::Csv, "/proc/no/such/dir"));
}

TEST_CASE("exhaustive_sim_search agrees with plain enumeration")
{
    std::mt19937_64 rng(31);
    support::RandomSpec spec;
    spec.max_tasks = 4;
    spec.t_lo = 4;
    spec.t_hi = 12;
    spec.tighten = false;
    int accepted = 0, beyond_test = 0;
    for (int i = 0; i < 800; ++i) {
        const TaskSet ts = support::random_set(rng, spec);
        const bool fast = exhaustive_sim_search(ts);
        CHECK(fast == brute_sim(ts));
        accepted += fast;
        beyond_test += fast && !exhaustive_test_search(ts).success;
    }
    CHECK(accepted > 20);
    CHECK(beyond_test > 5);
}
