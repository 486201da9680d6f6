// mcs: command-line front end (analyze, tighten, simulate, generate, campaign).
//
// Exit codes: 0 on completion, 1 on runtime failure, 2 on bad arguments,
// configuration or input documents.

#include "mcs/harness.hpp"
#include "mcs/io.hpp"
#include "mcs/schedulability.hpp"
#include "mcs/sim.hpp"
#include "mcs/tighten.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace mcs;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TaskSet load(const std::string& path)
{
    try {
        return read_taskset(path);
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
}

Rational rational_arg(const std::string& s, const char* what)
{
    try {
        return parse_rational(s);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

int analyze(const std::string& input, const std::string& test, std::optional<std::int64_t> t_max, bool grid)
{
    const TaskSet ts = load(input);
    SweepOptions o;
    o.t_max = t_max;
    o.integer_grid = grid;
    auto one = [&](const std::string& name) -> Json {
        if (name == "lc")
            return verdict_to_json(lc_test(ts, o));
        if (name == "prior")
            return verdict_to_json(hc_test_prior(ts, o));
        if (name == "new")
            return verdict_to_json(hc_test_new(ts, o));
        if (name == "improved")
            return verdict_to_json(hc_test_improved(ts, o));
        try {
            return verdict_to_json(edfvd_test(ts));
        } catch (const NotImplicitDeadline& e) {
            return {{"test", "edfvd"}, {"error", e.what()}};
        }
    };
    if (test == "all") {
        Json arr = Json::array();
        for (const char* n : {"lc", "prior", "new", "improved", "edfvd"})
            arr.push_back(one(n));
        std::cout << arr.dump(2) << "\n";
    } else {
        std::cout << one(test).dump(2) << "\n";
    }
    return 0;
}

int tighten(const std::string& input, const std::string& output, const std::string& strategy, bool trace)
{
    const TaskSet ts = load(input);
    TighteningResult r;
    if (strategy == "ecdf") {
        r = ecdf(ts);
    } else if (strategy == "greedy") {
        r = greedy_reconstruction(ts);
    } else if (strategy == "edfpd") {
        try {
            r = edfpd(ts);
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    } else {
        r = exhaustive_test_search(ts);
    }
    if (!output.empty())
        write_taskset(output, apply_tightening(ts, r.assignment));
    std::cout << result_to_json(r, trace).dump(2) << "\n";
    return 0;
}

int simulate_cmd(const std::string& input, const std::optional<std::string>& switch_at, bool exhaustive,
                 const std::optional<std::string>& horizon, const std::string& trace_path)
{
    const TaskSet ts = load(input);
    if (exhaustive) {
        SimulationOptions o;
        if (horizon)
            o.horizon = rational_arg(*horizon, "--horizon");
        std::cout << verdict_to_json(exhaustive_simulation(ts, o)).dump(2) << "\n";
        return 0;
    }
    Scenario sc;
    sc.horizon = horizon ? rational_arg(*horizon, "--horizon") : simulation_horizon(ts);
    if (switch_at)
        sc.switch_at = rational_arg(*switch_at, "--switch-at");
    std::vector<SimEvent> events;
    SimOutcome o;
    try {
        o = simulate(ts, sc, [&](const SimEvent& e) { events.push_back(e); });
    } catch (const InvalidScenario& e) {
        throw InputError(e.what());
    }
    if (!trace_path.empty()) {
        std::string lines;
        for (const SimEvent& e : events)
            lines += event_to_json(e, &o).dump() + "\n";
        write_text(trace_path, lines);
    }
    std::cout << outcome_to_json(o).dump(2) << "\n";
    return 0;
}

int generate(const std::string& params_path, int count, const std::string& out_dir)
{
    GenParams p;
    try {
        p = params_from_json(read_json(params_path));
        validate(p);
    } catch (const std::invalid_argument& e) {
        throw InputError(params_path + ": " + e.what());
    }
    std::filesystem::create_directories(out_dir);
    const std::uint64_t first = p.seed;
    for (int k = 0; k < count; ++k) {
        p.seed = first + static_cast<std::uint64_t>(k);
        const TaskSet ts = generate_taskset(p);
        write_taskset(std::filesystem::path(out_dir) / ("taskset_" + std::to_string(p.seed) + ".json"), ts);
    }
    std::cout << "wrote " << count << " task sets to " << out_dir << "\n";
    return 0;
}

int campaign(const std::string& config_path, const std::string& out)
{
    CampaignConfig cfg;
    try {
        cfg = campaign_from_json(read_json(config_path));
    } catch (const std::invalid_argument& e) {
        std::cerr << "mcs: " << config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "mcs: " << e.what() << "\n";
        return 2;
    }
    CampaignLog log;
    const std::vector<BucketResult> rs = run_campaign(cfg, &log);
    for (const std::string& m : log.messages)
        std::cerr << "mcs: " << m << "\n";
    emit_results(rs, ResultFormat::Csv, out);
    emit_results(rs, ResultFormat::Json, out);
    std::cout << results_csv(rs);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dual-criticality EDF schedulability toolkit"};
    app.require_subcommand(1);

    std::string input, output, test = "all", strategy = "ecdf", trace_path, params, out_dir, config;
    std::optional<std::int64_t> t_max;
    std::optional<std::string> switch_at, horizon;
    bool grid = false, trace = false, exhaustive = false;
    int count = 1;

    auto* an = app.add_subcommand("analyze", "Run schedulability tests and print JSON verdicts");
    an->add_option("--input", input, "Task-set JSON")->required()->check(CLI::ExistingFile);
    an->add_option("--test", test)->check(CLI::IsMember({"lc", "prior", "new", "improved", "edfvd", "all"}));
    an->add_option("--t-max", t_max, "Override the sweep horizon")->check(CLI::PositiveNumber);
    an->add_flag("--integer-grid", grid, "Unpruned unit-step sweep");

    auto* ti = app.add_subcommand("tighten", "Assign tightened deadlines");
    ti->add_option("--strategy", strategy)->check(CLI::IsMember({"ecdf", "greedy", "edfpd", "exhaustive"}));
    ti->add_option("--input", input)->required()->check(CLI::ExistingFile);
    ti->add_option("--output", output, "Task set with tight_deadline fields");
    ti->add_flag("--trace", trace, "Include the step trace in the printed result");

    auto* si = app.add_subcommand("simulate", "Run the mode-switch EDF simulator");
    si->add_option("--input", input)->required()->check(CLI::ExistingFile);
    auto* sw = si->add_option("--switch-at", switch_at, "Switch instant t1");
    si->add_flag("--exhaustive", exhaustive, "Every switch instant; prints a verdict")->excludes(sw);
    si->add_option("--horizon", horizon);
    si->add_option("--trace", trace_path, "JSONL event trace");

    auto* ge = app.add_subcommand("generate", "Generate random task sets");
    ge->add_option("--params", params)->required()->check(CLI::ExistingFile);
    ge->add_option("--count", count)->check(CLI::PositiveNumber);
    ge->add_option("--out-dir", out_dir)->required();

    auto* ca = app.add_subcommand("campaign", "Run an acceptance-ratio campaign");
    ca->add_option("--config", config)->required();
    ca->add_option("--out", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*an)
            return analyze(input, test, t_max, grid);
        if (*ti)
            return tighten(input, output, strategy, trace);
        if (*si)
            return simulate_cmd(input, switch_at, exhaustive, horizon, trace_path);
        if (*ge)
            return generate(params, count, out_dir);
        return campaign(config, out_dir);
    } catch (const InputError& e) {
        std::cerr << "mcs: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mcs: " << e.what() << "\n";
        return 1;
    }
}
