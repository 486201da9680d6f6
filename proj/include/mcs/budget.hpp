#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>

namespace mcs {

class AnalysisTimeout : public std::runtime_error {
public:
    AnalysisTimeout() : std::runtime_error("analysis time budget exhausted") {}
};

// A search or sweep needs more work than its configured cap allows.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cooperative wall-clock deadline. Long sweeps poll it between chunks.
class Budget {
public:
    Budget() = default;
    explicit Budget(std::chrono::steady_clock::duration d) : until_(std::chrono::steady_clock::now() + d) {}

    bool expired() const { return until_ && std::chrono::steady_clock::now() >= *until_; }
    void check() const
    {
        if (expired())
            throw AnalysisTimeout();
    }

private:
    std::optional<std::chrono::steady_clock::time_point> until_;
};

inline void poll(const Budget* b)
{
    if (b)
        b->check();
}

}  // namespace mcs
