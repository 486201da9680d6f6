#include "mcs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mcs {

namespace {

[[noreturn]] void bad(const std::string& what)
{
    throw InvalidDocument(what);
}

const Json& field(const Json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end())
        bad(std::string("missing field '") + key + "'");
    return *it;
}

std::int64_t integer_field(const Json& j, const char* key)
{
    const Json& v = field(j, key);
    if (!v.is_number_integer())
        bad(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::pair<Rational, Rational> rational_range(const Json& j)
{
    if (!j.is_array() || j.size() != 2)
        bad("a range must be a two-element array");
    return {rational_from_json(j[0]), rational_from_json(j[1])};
}

}  // namespace

Json rational_to_json(const Rational& r)
{
    if (r.get_den() == 1 && fits_int64(r.get_num()))
        return to_int64(r.get_num());
    return to_string(r);
}

Rational rational_from_json(const Json& j)
{
    try {
        if (j.is_number_integer())
            return make_rational(j.get<std::int64_t>());
        if (j.is_number_float()) {
            char buf[64];
            const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, j.get<double>(), std::chars_format::fixed);
            if (ec != std::errc())
                bad("number out of range");
            return parse_rational(std::string_view(buf, static_cast<std::size_t>(end - buf)));
        }
        if (j.is_string())
            return parse_rational(j.get<std::string>());
    } catch (const InvalidDocument&) {
        throw;
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }
    bad("expected a rational, got " + j.dump());
}

Json taskset_to_json(const TaskSet& ts)
{
    Json tasks = Json::array();
    for (const Task& t : ts) {
        tasks.push_back({{"id", t.id},
                         {"period", t.period},
                         {"deadline", t.deadline},
                         {"criticality", std::string(to_string(t.criticality))},
                         {"wcet_lo", t.wcet_lo},
                         {"wcet_hi", t.wcet_hi},
                         {"tight_deadline", rational_to_json(t.tight_deadline)}});
    }
    return {{"tasks", tasks}};
}

TaskSet taskset_from_json(const Json& j)
{
    if (!j.is_object())
        bad("task set document must be an object");
    const Json& arr = field(j, "tasks");
    if (!arr.is_array())
        bad("'tasks' must be an array");
    std::vector<Task> tasks;
    for (const Json& e : arr) {
        if (!e.is_object())
            bad("each task must be an object");
        RawTask r;
        r.id = integer_field(e, "id");
        r.period = integer_field(e, "period");
        r.deadline = integer_field(e, "deadline");
        const Json& c = field(e, "criticality");
        if (!c.is_string())
            bad("'criticality' must be \"LO\" or \"HI\"");
        try {
            r.criticality = parse_criticality(c.get<std::string>());
        } catch (const std::invalid_argument& ex) {
            bad(ex.what());
        }
        r.wcet_lo = integer_field(e, "wcet_lo");
        r.wcet_hi = integer_field(e, "wcet_hi");
        if (auto it = e.find("tight_deadline"); it != e.end() && !it->is_null())
            r.tight_deadline = rational_from_json(*it);
        tasks.push_back(validate_task(r));
    }
    return TaskSet(std::move(tasks));
}

Json verdict_to_json(const Verdict& v)
{
    Json j = {{"test", v.test_name}, {"schedulable", v.schedulable}, {"lhs", rational_to_json(v.lhs_at_witness)}};
    if (v.witness) {
        Json w = {{"t2", rational_to_json(v.witness->t2)}};
        if (v.witness->t1)
            w["t1"] = rational_to_json(*v.witness->t1);
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    if (!v.note.empty())
        j["note"] = v.note;
    return j;
}

Json result_to_json(const TighteningResult& r, bool with_trace)
{
    Json a = Json::object();
    for (const auto& [id, d] : r.assignment)
        a[std::to_string(id)] = rational_to_json(d);
    Json j = {{"strategy", r.strategy},
              {"success", r.success},
              {"assignment", a},
              {"iterations", r.iterations},
              {"removed_candidates", r.removed_candidates}};
    if (!r.note.empty())
        j["note"] = r.note;
    if (with_trace) {
        Json steps = Json::array();
        for (const TraceStep& s : r.trace) {
            Json e = {{"iteration", s.iteration}, {"action", s.action}};
            if (s.task)
                e["task"] = s.task;
            if (s.t1)
                e["t1"] = rational_to_json(*s.t1);
            if (s.t2)
                e["t2"] = rational_to_json(*s.t2);
            if (s.excess)
                e["excess"] = rational_to_json(*s.excess);
            steps.push_back(e);
        }
        j["trace"] = steps;
    }
    return j;
}

Json event_to_json(const SimEvent& e, const SimOutcome* outcome)
{
    Json j = {{"event", to_string(e.kind)}, {"time", rational_to_json(e.time)}};
    if (e.kind != SimEventKind::Switch) {
        j["task"] = e.task;
        j["job"] = e.job;
        if (outcome && e.job < outcome->jobs.size())
            j["release"] = rational_to_json(outcome->jobs[e.job].release);
    }
    return j;
}

Json outcome_to_json(const SimOutcome& o)
{
    Json jobs = Json::array();
    for (const JobRecord& r : o.jobs) {
        Json j = {{"task", r.task},
                  {"criticality", r.hi ? "HI" : "LO"},
                  {"release", rational_to_json(r.release)},
                  {"edf_deadline", rational_to_json(r.edf_deadline)},
                  {"tight_deadline", rational_to_json(r.tight_deadline)},
                  {"real_deadline", rational_to_json(r.real_deadline)},
                  {"dropped", r.dropped}};
        j["completion"] = r.completion ? rational_to_json(*r.completion) : Json(nullptr);
        jobs.push_back(j);
    }
    Json j = {{"jobs", jobs},
              {"real_deadline_misses", o.real_deadline_misses},
              {"tight_deadline_misses", o.tight_deadline_misses}};
    j["switch_effective"] = o.switch_effective ? rational_to_json(*o.switch_effective) : Json(nullptr);
    return j;
}

Json params_to_json(const GenParams& p)
{
    return {{"period_range", {p.period_lo, p.period_hi}},
            {"p_criticality", rational_to_json(p.p_criticality)},
            {"lc_util_range", {rational_to_json(p.util_lo), rational_to_json(p.util_hi)}},
            {"hc_wcet_multiplier_range", {rational_to_json(p.mult_lo), rational_to_json(p.mult_hi)}},
            {"deadline_mode", std::string(to_string(p.deadline_mode))},
            {"l_bound", rational_to_json(p.l_bound)},
            {"load_window", rational_to_json(p.load_window)},
            {"seed", p.seed},
            {"max_tasks", p.max_tasks},
            {"max_attempts", p.max_attempts}};
}

GenParams params_from_json(const Json& j, GenParams p)
{
    if (!j.is_object())
        bad("generator parameters must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const Json& v = it.value();
        if (k == "period_range") {
            const auto [lo, hi] = rational_range(v);
            if (lo.get_den() != 1 || hi.get_den() != 1)
                bad("period_range must hold integers");
            p.period_lo = to_int64(lo.get_num());
            p.period_hi = to_int64(hi.get_num());
        } else if (k == "p_criticality") {
            p.p_criticality = rational_from_json(v);
        } else if (k == "lc_util_range") {
            std::tie(p.util_lo, p.util_hi) = rational_range(v);
        } else if (k == "hc_wcet_multiplier_range") {
            std::tie(p.mult_lo, p.mult_hi) = rational_range(v);
        } else if (k == "deadline_mode") {
            if (!v.is_string())
                bad("deadline_mode must be a string");
            try {
                p.deadline_mode = parse_deadline_mode(v.get<std::string>());
            } catch (const std::invalid_argument& e) {
                bad(e.what());
            }
        } else if (k == "implicit_deadlines") {
            if (!v.is_boolean())
                bad("implicit_deadlines must be a boolean");
            if (v.get<bool>())
                p.deadline_mode = DeadlineMode::Implicit;
        } else if (k == "l_bound") {
            p.l_bound = rational_from_json(v);
        } else if (k == "load_window") {
            p.load_window = rational_from_json(v);
        } else if (k == "seed") {
            if (!v.is_number_unsigned() && !v.is_number_integer())
                bad("seed must be a non-negative integer");
            p.seed = v.get<std::uint64_t>();
        } else if (k == "max_tasks") {
            p.max_tasks = static_cast<int>(integer_field(j, "max_tasks"));
        } else if (k == "max_attempts") {
            p.max_attempts = static_cast<int>(integer_field(j, "max_attempts"));
        } else {
            bad("unknown generator parameter '" + k + "'");
        }
    }
    return p;
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        bad(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out.flush())
        throw std::runtime_error("write failed: " + path.string());
}

TaskSet read_taskset(const std::filesystem::path& path)
{
    return taskset_from_json(read_json(path));
}

void write_taskset(const std::filesystem::path& path, const TaskSet& ts)
{
    write_text(path, taskset_to_json(ts).dump(2) + "\n");
}

}  // namespace mcs
