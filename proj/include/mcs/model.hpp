#pragma once

#include "mcs/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcs {

enum class Criticality { LO, HI };

std::string_view to_string(Criticality c);
Criticality parse_criticality(std::string_view text);

/// One sporadic dual-criticality task. Periods, deadlines and WCETs are
/// integers; the tightened (virtual) deadline is an exact rational so that
/// proportionate deadlines need no rounding.
struct Task {
    int id = 0;
    std::int64_t period = 0;
    std::int64_t deadline = 0;
    Rational tight_deadline;
    Criticality criticality = Criticality::LO;
    std::int64_t wcet_lo = 0;
    std::int64_t wcet_hi = 0;

    bool is_hi() const { return criticality == Criticality::HI; }
    Rational u_lo() const { return make_rational(wcet_lo, period); }
    Rational u_hi() const { return make_rational(wcet_hi, period); }

    bool operator==(const Task& other) const;
};

/// Unvalidated task record, e.g. straight out of a JSON document.
struct RawTask {
    std::int64_t id = 0;
    std::int64_t period = 0;
    std::int64_t deadline = 0;
    Criticality criticality = Criticality::LO;
    std::int64_t wcet_lo = 0;
    std::int64_t wcet_hi = 0;
    std::optional<Rational> tight_deadline;
};

class InvalidTask : public std::invalid_argument {
public:
    explicit InvalidTask(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

class InvalidTaskSet : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidAssignment : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Lists every violated invariant; empty when the task is valid.
std::vector<std::string> task_violations(const Task& task);

Task validate_task(const RawTask& raw);
Task validate_task(const Task& task);

class TaskSet {
public:
    // Throws InvalidTaskSet when empty or ids repeat, InvalidTask when a
    // member is malformed.
    explicit TaskSet(std::vector<Task> tasks);

    const std::vector<Task>& tasks() const { return tasks_; }
    std::size_t size() const { return tasks_.size(); }
    auto begin() const { return tasks_.begin(); }
    auto end() const { return tasks_.end(); }
    const Task& operator[](std::size_t i) const { return tasks_[i]; }

    const Task* find(int id) const;
    std::size_t hi_count() const;
    bool implicit_deadlines() const;
    std::int64_t max_deadline() const;

    bool operator==(const TaskSet& other) const { return tasks_ == other.tasks_; }

private:
    std::vector<Task> tasks_;
};

struct TaskUtilization {
    Rational u_lo;
    Rational u_hi;
};

struct UtilizationSummary {
    Rational u_lo_lo;  // LC utilization of LO tasks
    Rational u_hi_lo;  // LC utilization of HI tasks
    Rational u_hi_hi;  // HC utilization of HI tasks
    std::map<int, TaskUtilization> per_task;
};

UtilizationSummary utilizations(const TaskSet& ts);

using DeadlineAssignment = std::map<int, Rational>;

// Replaces tight deadlines of the listed HI tasks; everything else is copied.
TaskSet apply_tightening(const TaskSet& ts, const DeadlineAssignment& assignment);

// Copy with every tight deadline reset to the real deadline.
TaskSet untightened(const TaskSet& ts);

}  // namespace mcs
