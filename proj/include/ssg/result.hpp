#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "game.hpp"

namespace ssg {

using Choice = std::int32_t;
inline constexpr Choice kDelay = -1;
inline constexpr Choice kNoChoice = -2;

struct StrategySnapshot {
    std::vector<Choice> choice;  // per state; kNoChoice outside S?

    bool operator==(const StrategySnapshot&) const = default;
};

struct IterationRecord {
    std::size_t k = 0;
    double l = 0, u = 1, d_l = 1, d_u = 0;
    std::size_t delayed = 0;
    bool bounds_updated = false;
    double max_gap = 0;
    std::size_t exits = 0;
    std::size_t updates = 0;  // states swept in this iteration
};

using IterationTrace = std::vector<IterationRecord>;

enum class PrecisionMode { Absolute, Relative };

// One strongly connected block of S? as handled by the topological driver.
struct SccSummary {
    std::vector<StateId> states;
    std::size_t height = 0;
    std::size_t iterations = 0;
    std::uint64_t state_updates = 0;
    double l = 0.0, u = 1.0;
    bool converged = false;
};

struct SolveResult {
    std::string algorithm;
    std::size_t iterations = 0;
    bool converged = false;
    double global_lower = 0.0;
    double global_upper = 1.0;
    std::vector<double> lower, upper, value;
    StrategySnapshot strategy;
    double wall_ms = 0.0;
    std::uint64_t state_updates = 0;
    IterationTrace trace;
    std::vector<SccSummary> sccs;
    PrecisionMode mode = PrecisionMode::Absolute;
    double eps = 0.0;

    double max_gap() const {
        double m = 0;
        for (std::size_t s = 0; s < lower.size(); ++s) m = std::max(m, upper[s] - lower[s]);
        return m;
    }
};

}  // namespace ssg
