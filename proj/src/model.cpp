#include "mcs/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mcs {

std::string_view to_string(Criticality c)
{
    return c == Criticality::HI ? "HI" : "LO";
}

Criticality parse_criticality(std::string_view text)
{
    if (text == "HI" || text == "HC")
        return Criticality::HI;
    if (text == "LO" || text == "LC")
        return Criticality::LO;
    throw std::invalid_argument("unknown criticality: " + std::string(text));
}

bool Task::operator==(const Task& other) const
{
    return id == other.id && period == other.period && deadline == other.deadline
        && tight_deadline == other.tight_deadline && criticality == other.criticality
        && wcet_lo == other.wcet_lo && wcet_hi == other.wcet_hi;
}

namespace {

std::string join(const std::vector<std::string>& parts)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out << (i ? "; " : "") << parts[i];
    return out.str();
}

}  // namespace

InvalidTask::InvalidTask(std::vector<std::string> violations)
    : std::invalid_argument("invalid task: " + join(violations)),
      violations_(std::move(violations))
{
}

std::vector<std::string> task_violations(const Task& t)
{
    std::vector<std::string> v;
    if (t.period <= 0)
        v.push_back("period must be positive");
    if (t.deadline <= 0)
        v.push_back("deadline must be positive");
    if (t.wcet_lo <= 0)
        v.push_back("wcet_lo must be positive");
    if (t.wcet_hi <= 0)
        v.push_back("wcet_hi must be positive");
    if (t.wcet_lo > t.wcet_hi)
        v.push_back("wcet_lo exceeds wcet_hi");
    if (t.deadline > t.period)
        v.push_back("deadline exceeds period (constrained deadlines only)");
    if (t.tight_deadline > t.deadline)
        v.push_back("tight_deadline exceeds deadline");
    if (t.tight_deadline < t.wcet_lo)
        v.push_back("tight_deadline below wcet_lo");
    if (t.criticality == Criticality::LO) {
        if (t.wcet_lo != t.wcet_hi)
            v.push_back("LO task must have wcet_lo == wcet_hi");
        if (t.tight_deadline != t.deadline)
            v.push_back("LO task cannot have a tightened deadline");
    }
    return v;
}

Task validate_task(const Task& task)
{
    auto violations = task_violations(task);
    if (!violations.empty())
        throw InvalidTask(std::move(violations));
    return task;
}

Task validate_task(const RawTask& raw)
{
    std::vector<std::string> violations;
    if (raw.id < 0 || raw.id > 1'000'000)
        violations.push_back("id must be a small non-negative integer");
    Task t;
    t.id = static_cast<int>(raw.id);
    t.period = raw.period;
    t.deadline = raw.deadline;
    t.criticality = raw.criticality;
    t.wcet_lo = raw.wcet_lo;
    t.wcet_hi = raw.wcet_hi;
    t.tight_deadline = raw.tight_deadline ? *raw.tight_deadline : make_rational(raw.deadline);
    auto rest = task_violations(t);
    violations.insert(violations.end(), rest.begin(), rest.end());
    if (!violations.empty())
        throw InvalidTask(std::move(violations));
    return t;
}

TaskSet::TaskSet(std::vector<Task> tasks) : tasks_(std::move(tasks))
{
    if (tasks_.empty())
        throw InvalidTaskSet("task set must contain at least one task");
    std::set<int> ids;
    for (const auto& t : tasks_) {
        validate_task(t);
        if (!ids.insert(t.id).second)
            throw InvalidTaskSet("duplicate task id " + std::to_string(t.id));
    }
}

const Task* TaskSet::find(int id) const
{
    auto it = std::find_if(tasks_.begin(), tasks_.end(), [id](const Task& t) { return t.id == id; });
    return it == tasks_.end() ? nullptr : &*it;
}

std::size_t TaskSet::hi_count() const
{
    return static_cast<std::size_t>(
        std::count_if(tasks_.begin(), tasks_.end(), [](const Task& t) { return t.is_hi(); }));
}

bool TaskSet::implicit_deadlines() const
{
    return std::all_of(tasks_.begin(), tasks_.end(), [](const Task& t) { return t.deadline == t.period; });
}

std::int64_t TaskSet::max_deadline() const
{
    std::int64_t m = 0;
    for (const auto& t : tasks_)
        m = std::max(m, t.deadline);
    return m;
}

UtilizationSummary utilizations(const TaskSet& ts)
{
    UtilizationSummary s;
    for (const auto& t : ts) {
        const Rational ul = t.u_lo();
        const Rational uh = t.u_hi();
        if (t.is_hi()) {
            s.u_hi_lo += ul;
            s.u_hi_hi += uh;
        } else {
            s.u_lo_lo += ul;
        }
        s.per_task.emplace(t.id, TaskUtilization{ul, uh});
    }
    return s;
}

TaskSet apply_tightening(const TaskSet& ts, const DeadlineAssignment& assignment)
{
    std::vector<Task> tasks = ts.tasks();
    for (const auto& [id, value] : assignment) {
        auto it = std::find_if(tasks.begin(), tasks.end(), [id = id](const Task& t) { return t.id == id; });
        if (it == tasks.end())
            throw InvalidAssignment("no task with id " + std::to_string(id));
        if (!it->is_hi())
            throw InvalidAssignment("task " + std::to_string(id) + " is LO; only HI deadlines can be tightened");
        if (value < it->wcet_lo || value > it->deadline)
            throw InvalidAssignment("tight deadline " + to_string(value) + " for task " + std::to_string(id)
                                    + " outside [wcet_lo, deadline]");
        it->tight_deadline = value;
    }
    return TaskSet(std::move(tasks));
}

TaskSet untightened(const TaskSet& ts)
{
    std::vector<Task> tasks = ts.tasks();
    for (auto& t : tasks)
        t.tight_deadline = make_rational(t.deadline);
    return TaskSet(std::move(tasks));
}

}  // namespace mcs
