#pragma once

// Deadline-tightening strategies. Each one searches for LC (virtual)
// deadlines of the HI tasks under which the LC test and an HC test pass.

#include "mcs/budget.hpp"
#include "mcs/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcs {

struct TraceStep {
    std::size_t iteration = 0;
    std::string action;  // tighten, backtrack, remove, fallback, accept, reject
    int task = 0;        // 0 when no task is involved
    std::optional<Rational> t1;
    std::optional<Rational> t2;
    std::optional<Rational> excess;
};

struct TighteningResult {
    std::string strategy;
    bool success = false;
    DeadlineAssignment assignment;  // every HI task, final values
    std::size_t iterations = 0;     // deadline changes (ecdf, greedy) or assignments tried (exhaustive)
    std::vector<int> removed_candidates;
    std::vector<TraceStep> trace;
    std::string note;
};

// Earliest carry-over deadline first: tightens one task by one time unit
// per failing (t1, t2) pair of the improved HC test.
TighteningResult ecdf(const TaskSet& ts, const Budget* budget = nullptr);

// The case2 candidate whose carry-over job is dropped from the window by the
// smallest tightening, among those whose C^H - C^L covers the excess. Ties go
// to the largest C^H - C^L, then the smallest id.
std::optional<int> find_candidate(const TaskSet& ts, const std::set<int>& candidates, const Rational& t1,
                                  const Rational& t2, const Rational& excess);

// Unit-step tightening against the single-instant HC test: each step picks the
// task whose decrement lowers the demand at the failing instant the most.
// A reconstruction from prose descriptions, not the original pseudocode.
TighteningResult greedy_reconstruction(const TaskSet& ts, const Budget* budget = nullptr);

class ZeroSlack : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ProportionateDeadlines {
    std::optional<Rational> x;  // empty when every HI task has u^H = u^L
    bool degenerate = false;
    std::map<int, Rational> shares;
    std::map<int, Rational> pd;
};

// Proportionate deadlines for implicit-deadline sets: x spreads the remaining
// LC utilization over HI tasks in proportion to (u^H - u^L) u^L.
ProportionateDeadlines edfpd_preprocess(const TaskSet& ts);
// Applies the proportionate deadlines and checks them with the LC and the
// improved HC tests.
TighteningResult edfpd(const TaskSet& ts, const Budget* budget = nullptr);

struct ExhaustiveOptions {
    std::uint64_t max_assignments = 50'000'000;
    const Budget* budget = nullptr;
};

// Lexicographically first integer assignment D^L in [C^L, D] per HI task
// (ascending ids) that passes the LC and the improved HC test.
TighteningResult exhaustive_test_search(const TaskSet& ts, const ExhaustiveOptions& opt = {});

}  // namespace mcs
