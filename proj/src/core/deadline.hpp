#pragma once

#include <chrono>
#include <cstdint>

#include "error.hpp"

namespace tpot {

// Cooperative wall-clock budget. Long-running fits poll check() between
// units of work (trees, boosting stages, solver iterations).
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;

    static Deadline after_millis(std::int64_t millis)
    {
        Deadline d;
        if (millis > 0) {
            d.end_ = Clock::now() + std::chrono::milliseconds(millis);
            d.bounded_ = true;
        }
        return d;
    }

    bool expired() const { return bounded_ && Clock::now() >= end_; }

    void check() const
    {
        if (expired()) {
            fail(ErrorKind::BudgetExceeded, "evaluation budget exceeded");
        }
    }

private:
    Clock::time_point end_ {};
    bool bounded_ = false;
};

} // namespace tpot
