#pragma once

// Random task sets with a controlled system load.
//
// Reproducibility: every task is drawn from its own std::mt19937_64 stream,
// seeded with splitmix64 over (seed, attempt, task index). Draws use the raw
// 64-bit outputs only (no std distributions, whose output is
// implementation-defined), so a (seed, params) pair yields the same set on
// every platform.

#include "mcs/model.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace mcs {

enum class DeadlineMode { Full, Skewed, Implicit };

std::string_view to_string(DeadlineMode m);
DeadlineMode parse_deadline_mode(std::string_view text);

struct GenParams {
    std::int64_t period_lo = 5, period_hi = 100;
    Rational p_criticality = make_rational(1, 2);
    Rational util_lo = make_rational(2, 100), util_hi = make_rational(25, 100);  // LC utilization per task
    Rational mult_lo = 2, mult_hi = 4;                                           // C^H / C^L
    DeadlineMode deadline_mode = DeadlineMode::Full;
    Rational l_bound = make_rational(9, 10);
    Rational load_window = make_rational(5, 100);  // accepted load lies in (l_bound - window, l_bound]
    std::uint64_t seed = 1;
    int max_tasks = 64;
    int max_attempts = 1000;
};

// Throws std::invalid_argument on empty ranges or l_bound outside (0, 1].
void validate(const GenParams& p);

class GenerationExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

/// Portable draws on top of std::mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    // Uniform integer in [lo, hi], by rejection.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);
    // Uniform on the grid {lo + (hi - lo) k / 2^32 : 0 <= k < 2^32}.
    Rational uniform(const Rational& lo, const Rational& hi);
    bool bernoulli(const Rational& p);

private:
    std::mt19937_64 eng_;
};

Task generate_task(const GenParams& p, Rng& rng, int id);

// max over t of max{sum dbf^L(t), sum over HI of dbf^H(t)} / t, with real
// deadlines. When either mode has utilization above 1 that utilization is
// returned instead (a value > 1 flags the overload).
Rational system_load(const TaskSet& ts);

TaskSet generate_taskset(const GenParams& p);

}  // namespace mcs
