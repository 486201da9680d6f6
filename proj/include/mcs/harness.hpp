#pragma once

// Acceptance-ratio campaigns: generate task sets per (l_bound, p_criticality)
// bucket and run every requested algorithm on the same sets.

#include "mcs/gen.hpp"
#include "mcs/io.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcs {

enum class Algorithm { Ecdf, Greedy, Edfpd, Edfvd, ExhaustiveTest, ExhaustiveSim };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CampaignConfig {
    std::vector<Rational> l_bounds;
    std::vector<Rational> p_criticalities;
    DeadlineMode deadline_mode = DeadlineMode::Full;
    int sets_per_bucket = 500;
    std::vector<Algorithm> algorithms;
    std::uint64_t base_seed = 1;
    int workers = 1;
    double timeout_s = 30;
    bool record_wall_time = true;  // false writes 0, making the CSV byte-reproducible
    // Period, utilization and multiplier ranges, max_tasks, load window. Its
    // l_bound, p_criticality, deadline_mode and seed are overridden per set.
    GenParams generator;
    // When non-empty these sets replace generation, cycled per set index.
    std::vector<TaskSet> fixtures;
};

// l_bound grid 0.65 ... 0.975 with p_criticality 0.5 and 0.7.
CampaignConfig default_campaign();

void validate(const CampaignConfig& cfg);
// Throws ConfigError on any malformed or unknown key.
CampaignConfig campaign_from_json(const Json& j);

struct BucketResult {
    Rational l_bound;
    Rational p_criticality;
    DeadlineMode deadline_mode = DeadlineMode::Full;
    std::string algorithm;
    std::int64_t accepted = 0;
    std::int64_t total = 0;
    Rational fraction;
    double wall_time_s = 0;  // summed analysis time over the bucket's sets
    // Not part of the CSV.
    std::int64_t timeouts = 0;
    std::int64_t errors = 0;
    std::int64_t violations = 0;  // failed inline cross-checks

    bool operator==(const BucketResult& o) const;
};

struct CampaignLog {
    std::vector<std::string> messages;
};

// The seed of set `index` in bucket `bucket` (row-major over l_bounds, then
// p_criticalities).
std::uint64_t set_seed(std::uint64_t base_seed, std::size_t bucket, std::size_t index);

// Rows ordered by bucket, then by the order of cfg.algorithms. Algorithms that
// do not apply to the deadline mode are skipped and reported in `log`.
std::vector<BucketResult> run_campaign(const CampaignConfig& cfg, CampaignLog* log = nullptr);

// Searches integer assignments D^L in [C^L, D] for one that the exhaustive
// simulation accepts. Exhaustive TEST acceptances are taken as they are (the
// tests are sufficient), so only sets it rejects are simulated.
bool exhaustive_sim_search(const TaskSet& ts, const Budget* budget = nullptr);

std::string results_csv(const std::vector<BucketResult>& rs);
std::vector<BucketResult> parse_results_csv(const std::string& text);
Json results_json(const std::vector<BucketResult>& rs);
// x = l_bound; one column per algorithm, or per algorithm/p_criticality/mode
// curve when the results hold several of those.
std::string plot_tsv(const std::vector<BucketResult>& rs);

enum class ResultFormat { Csv, Json };
// Writes results.csv or results.json plus plot.tsv into `dir`.
void emit_results(const std::vector<BucketResult>& rs, ResultFormat f, const std::filesystem::path& dir);

}  // namespace mcs
