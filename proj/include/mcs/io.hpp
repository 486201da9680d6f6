#pragma once

// JSON documents for task sets, verdicts, tightening results, simulation
// traces and generator parameters.
//
// Rationals are written as integers when integral and as "p/q" strings
// otherwise. On input a rational may be an integer, a "p/q" or decimal
// string, or a JSON number; numbers are read through their shortest decimal
// form, so 0.65 means 13/20 exactly.

#include "mcs/gen.hpp"
#include "mcs/model.hpp"
#include "mcs/schedulability.hpp"
#include "mcs/sim.hpp"
#include "mcs/tighten.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace mcs {

using Json = nlohmann::ordered_json;

class InvalidDocument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

Json rational_to_json(const Rational& r);
Rational rational_from_json(const Json& j);

Json taskset_to_json(const TaskSet& ts);
// Throws InvalidDocument on shape errors and InvalidTask / InvalidTaskSet on
// invariant violations.
TaskSet taskset_from_json(const Json& j);

Json verdict_to_json(const Verdict& v);
Json result_to_json(const TighteningResult& r, bool with_trace);
Json event_to_json(const SimEvent& e, const SimOutcome* outcome = nullptr);
Json outcome_to_json(const SimOutcome& o);

Json params_to_json(const GenParams& p);
// Missing keys keep the defaults of `base`.
GenParams params_from_json(const Json& j, GenParams base = {});

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

TaskSet read_taskset(const std::filesystem::path& path);
void write_taskset(const std::filesystem::path& path, const TaskSet& ts);

}  // namespace mcs
