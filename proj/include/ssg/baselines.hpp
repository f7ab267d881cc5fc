#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "end_components.hpp"
#include "svi.hpp"

namespace ssg {

struct BoundsVector {
    std::vector<double> L;
    std::vector<double> U;
};

namespace detail {

inline double bellman_value(const StochasticGame& g, StateId s, const std::vector<double>& x, ActionId* arg = nullptr) {
    const bool maximize = g.owner(s) == Player::Max;
    double best = maximize ? -1.0 : 2.0;
    for (ActionId a = 0; a < g.actions(s).size(); ++a) {
        double v = action_value(g, s, a, x);
        if (maximize ? v > best + kTieTolerance : v < best - kTieTolerance) {
            best = v;
            if (arg) *arg = a;
        }
    }
    return best;
}

inline void deflate_rec(const StochasticGame& g, const StateSet& Y, std::vector<double>& U) {
    auto exits = best_exits(g, Y, U);
    if (exits.empty()) {
        for (StateId s : Y) U[s] = 0.0;
        return;
    }
    double cap = 0.0;
    for (auto [s, a] : exits) cap = std::max(cap, action_value(g, s, a, U));
    std::vector<bool> rest = to_mask(Y, g.num_states());
    for (StateId s : Y) U[s] = std::min(U[s], cap);
    for (auto& sa : exits) rest[sa.first] = false;
    for (auto& sub : mec_decompose(g, rest)) deflate_rec(g, sub.states, U);
}

}  // namespace detail

inline std::vector<double> deflate(const StochasticGame& g, const MecDecomposition& mecs, std::vector<double> U) {
    for (auto& mec : mecs) detail::deflate_rec(g, mec.states, U);
    return U;
}

inline std::vector<double> deflate(const StochasticGame& g, const StatePartition& p, std::vector<double> U) {
    return deflate(g, mec_decompose(g, p.unknown_mask()), std::move(U));
}

struct BaselineOptions {
    std::uint64_t max_iters = 10'000'000;
    std::function<void(std::size_t, const BoundsVector&)> observer;
};

inline StrategySnapshot greedy_strategy(const StochasticGame& g, const StatePartition& p, const BoundsVector& b) {
    StrategySnapshot st;
    st.choice.assign(g.num_states(), kNoChoice);
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s)) continue;
        ActionId a = 0;
        detail::bellman_value(g, s, g.owner(s) == Player::Max ? b.U : b.L, &a);
        st.choice[s] = static_cast<Choice>(a);
    }
    return st;
}

inline BoundsVector initial_bounds(const StatePartition& p) {
    BoundsVector b;
    b.L.assign(p.size(), 0.0);
    b.U.assign(p.size(), 1.0);
    for (StateId s = 0; s < p.size(); ++s) {
        if (p.is_target(s)) b.L[s] = 1.0;
        if (p.is_sink(s)) b.U[s] = 0.0;
    }
    return b;
}

// Plain value iteration from below. The stopping test says nothing about the
// distance to the true value, so `upper` is only the trivial bound.
inline SolveResult solve_vi(const StochasticGame& g, double eps, const BaselineOptions& opt = {}) {
    auto start = std::chrono::steady_clock::now();
    auto p = solver_partition(g);
    auto b = initial_bounds(p);
    auto unknown = p.unknown();
    SolveResult r;
    r.algorithm = "vi";
    r.eps = eps;
    bool done = unknown.empty();
    while (!done && r.iterations < opt.max_iters) {
        std::vector<double> next = b.L;
        double delta = 0.0;
        for (StateId s : unknown) {
            next[s] = detail::bellman_value(g, s, b.L);
            delta = std::max(delta, std::abs(next[s] - b.L[s]));
        }
        b.L = std::move(next);
        ++r.iterations;
        r.state_updates += unknown.size();
        if (opt.observer) opt.observer(r.iterations, b);
        done = delta < eps;
    }
    r.converged = done;
    r.lower = b.L;
    r.upper = b.U;
    r.value = b.L;
    r.global_lower = 0.0;
    r.global_upper = unknown.empty() ? 0.0 : 1.0;
    r.strategy = greedy_strategy(g, p, b);
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// One Jacobi sweep of both rows followed by deflation of the upper row.
inline void bvi_step(const StochasticGame& g, const std::vector<StateId>& unknown, const MecDecomposition& mecs,
                     BoundsVector& b) {
    BoundsVector next = b;
    for (StateId s : unknown) {
        next.L[s] = detail::bellman_value(g, s, b.L);
        next.U[s] = detail::bellman_value(g, s, b.U);
    }
    next.U = deflate(g, mecs, std::move(next.U));
    b = std::move(next);
}

inline double bounds_gap(const std::vector<StateId>& unknown, const BoundsVector& b) {
    double gap = 0.0;
    for (StateId s : unknown) gap = std::max(gap, b.U[s] - b.L[s]);
    return gap;
}

struct BviRun {
    BoundsVector bounds;
    std::size_t iterations = 0;
    bool converged = false;
    std::uint64_t state_updates = 0;
};

// BVI on the states marked unknown in p; rows of all other states are taken
// from `b` as given. `slack` is gap already present in those fixed rows that
// iterating cannot remove.
inline BviRun run_bvi(const StochasticGame& g, const StatePartition& p, BoundsVector b, double eps,
                      const BaselineOptions& opt, double slack = 0.0) {
    BviRun run;
    auto unknown = p.unknown();
    auto mecs = mec_decompose(g, p.unknown_mask());
    while (!(bounds_gap(unknown, b) < eps + slack)) {
        if (run.iterations >= opt.max_iters) break;
        bvi_step(g, unknown, mecs, b);
        ++run.iterations;
        run.state_updates += unknown.size();
        if (opt.observer) opt.observer(run.iterations, b);
    }
    run.converged = bounds_gap(unknown, b) < eps + slack;
    run.bounds = std::move(b);
    return run;
}

inline SolveResult solve_bvi(const StochasticGame& g, double eps, const BaselineOptions& opt = {}) {
    auto start = std::chrono::steady_clock::now();
    auto p = solver_partition(g);
    auto run = run_bvi(g, p, initial_bounds(p), eps, opt);
    SolveResult r;
    r.algorithm = "bvi";
    r.eps = eps;
    r.iterations = run.iterations;
    r.converged = run.converged;
    r.state_updates = run.state_updates;
    r.lower = run.bounds.L;
    r.upper = run.bounds.U;
    r.value.resize(g.num_states());
    r.global_lower = 1.0;
    r.global_upper = 0.0;
    for (StateId s = 0; s < g.num_states(); ++s) {
        r.value[s] = 0.5 * (r.lower[s] + r.upper[s]);
        if (p.is_unknown(s)) {
            r.global_lower = std::min(r.global_lower, r.lower[s]);
            r.global_upper = std::max(r.global_upper, r.upper[s]);
        }
    }
    if (r.global_lower > r.global_upper) r.global_lower = r.global_upper = 0.0;
    r.strategy = greedy_strategy(g, p, run.bounds);
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace ssg
