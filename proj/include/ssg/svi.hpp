#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "end_components.hpp"
#include "partition.hpp"
#include "result.hpp"

namespace ssg {

// reach is the lower row, reach_up the upper row. They only differ when some
// states outside S? carry an interval instead of an exact value (the
// topological driver does this); for an ordinary solve they are equal.
struct ReachStayVector {
    std::vector<double> reach;
    std::vector<double> reach_up;
    std::vector<double> stay;
    std::size_t k = 0;

    double lower(StateId s, double l) const { return reach[s] + stay[s] * l; }
    double upper(StateId s, double u) const { return reach_up[s] + stay[s] * u; }
};

struct GlobalBounds {
    double l = 0.0;
    double u = 1.0;
    double d_l = 1.0;
    double d_u = 0.0;
};

inline ReachStayVector initial_reach_stay(const StatePartition& p) {
    ReachStayVector rs;
    const auto n = p.size();
    rs.reach.assign(n, 0.0);
    rs.stay.assign(n, 0.0);
    for (StateId s = 0; s < n; ++s) {
        if (p.is_target(s)) rs.reach[s] = 1.0;
        if (p.is_unknown(s)) rs.stay[s] = 1.0;
    }
    rs.reach_up = rs.reach;
    return rs;
}

inline double lower_estimate(const StochasticGame& g, const ReachStayVector& rs, StateId s, ActionId a, double l) {
    double v = 0.0;
    for (auto& tr : g.action(s, a).transitions) v += tr.prob * rs.lower(tr.target, l);
    return v;
}

inline double upper_estimate(const StochasticGame& g, const ReachStayVector& rs, StateId s, ActionId a, double u) {
    double v = 0.0;
    for (auto& tr : g.action(s, a).transitions) v += tr.prob * rs.upper(tr.target, u);
    return v;
}

// Estimate the owner of s optimises: lower side for Min, upper side for Max.
inline double owner_estimate(const StochasticGame& g, const ReachStayVector& rs, StateId s, ActionId a,
                             const GlobalBounds& b) {
    return g.owner(s) == Player::Min ? lower_estimate(g, rs, s, a, b.l) : upper_estimate(g, rs, s, a, b.u);
}

// Per-state upper estimate reach_up + stay*u, the f used for best exits.
inline std::vector<double> upper_values(const ReachStayVector& rs, double u) {
    std::vector<double> f(rs.stay.size());
    for (std::size_t s = 0; s < f.size(); ++s) f[s] = rs.reach_up[s] + rs.stay[s] * u;
    return f;
}

// Best exits of all MECs in S?; trapped states go to Z with zero rows. Exits
// are recomputed after a trap is removed, since exits into the trap were
// valued with its stale upper estimate.
inline BestExitSet handle_ecs(const StochasticGame& g, ReachStayVector& rs, double u, StatePartition& p) {
    StateSet trapped;
    while (true) {
        auto b = best_exits_of_unknown(g, upper_values(rs, u), p);
        for (StateId s : b.removed_trap_states) rs.reach[s] = rs.reach_up[s] = rs.stay[s] = 0.0;
        trapped.insert(trapped.end(), b.removed_trap_states.begin(), b.removed_trap_states.end());
        if (b.removed_trap_states.empty()) {
            std::sort(trapped.begin(), trapped.end());
            b.removed_trap_states = std::move(trapped);
            return b;
        }
    }
}

inline std::vector<ActionId> argopt_actions(const StochasticGame& g, const ReachStayVector& rs, StateId s,
                                            const GlobalBounds& b) {
    const auto& acts = g.actions(s);
    std::vector<double> est(acts.size());
    for (ActionId a = 0; a < acts.size(); ++a) est[a] = owner_estimate(g, rs, s, a, b);
    bool maximize = g.owner(s) == Player::Max;
    double best = maximize ? *std::max_element(est.begin(), est.end()) : *std::min_element(est.begin(), est.end());
    std::vector<ActionId> out;
    for (ActionId a = 0; a < acts.size(); ++a)
        if (maximize ? est[a] >= best - kTieTolerance : est[a] <= best + kTieTolerance) out.push_back(a);
    return out;
}

inline StrategySnapshot choose_actions(const StochasticGame& g, const StatePartition& p, const ReachStayVector& rs,
                                       const GlobalBounds& b, const BestExitSet& exits, const StrategySnapshot& prev) {
    StrategySnapshot out;
    out.choice.assign(g.num_states(), kNoChoice);
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s)) continue;
        Choice before = s < prev.choice.size() ? prev.choice[s] : kNoChoice;
        if (g.owner(s) == Player::Max && exits.has_state(s)) {
            out.choice[s] = before >= 0 && exits.contains(s, before) ? before : static_cast<Choice>(exits.exit_of(s));
            continue;
        }
        auto opt = argopt_actions(g, rs, s, b);
        bool keep = before >= 0 && std::find(opt.begin(), opt.end(), static_cast<ActionId>(before)) != opt.end();
        out.choice[s] = keep ? before : static_cast<Choice>(opt.front());
    }
    return out;
}

namespace detail {

inline double exact_difference(const Fraction& a, const Fraction& b) {
    __int128 num = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
    __int128 den = static_cast<__int128>(a.den) * b.den;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

}  // namespace detail

// The bound level at which the owner of s would stop preferring `chosen`.
// Probability differences are taken successor by successor on the exact
// fractions, so mass both actions share cancels without rounding.
inline std::optional<double> decision_value(const StochasticGame& g, const ReachStayVector& rs, StateId s,
                                            ActionId chosen) {
    const bool maximize = g.owner(s) == Player::Max;
    const auto& reach = maximize ? rs.reach_up : rs.reach;
    const auto& ta = g.action(s, chosen).transitions;
    std::optional<double> best;
    for (ActionId beta = 0; beta < g.actions(s).size(); ++beta) {
        if (beta == chosen) continue;
        const auto& tb = g.action(s, beta).transitions;
        double d_stay = 0.0, d_reach = 0.0;  // chosen minus beta, beta minus chosen
        auto add = [&](StateId t, double diff) {
            d_stay += diff * rs.stay[t];
            d_reach -= diff * reach[t];
        };
        for (auto& x : ta) {
            Fraction other{0, 1};
            for (auto& y : tb)
                if (y.target == x.target) other = y.exact;
            add(x.target, detail::exact_difference(x.exact, other));
        }
        for (auto& y : tb) {
            bool shared = false;
            for (auto& x : ta) shared |= x.target == y.target;
            if (!shared) add(y.target, -y.exact.value());
        }
        if (!(d_stay > 0)) continue;
        double v = d_reach / d_stay;
        if (!best) best = v;
        else best = maximize ? std::max(*best, v) : std::min(*best, v);
    }
    return best;
}

struct BellmanOutcome {
    ReachStayVector rs;
    StrategySnapshot strategy;
    bool any_delay = false;
    std::size_t delayed = 0;
};

// Jacobi sweep over S?. With delays enabled, a Maximizer state inside an end
// component that is not a best exit and whose upper estimate would grow keeps
// its old row instead.
inline BellmanOutcome bellman_update(const StochasticGame& g, const StatePartition& p, const ReachStayVector& rs,
                                     const StrategySnapshot& strategy, const GlobalBounds& b,
                                     const BestExitSet& exits, bool allow_delay) {
    BellmanOutcome out{rs, strategy, false, 0};
    out.rs.k = rs.k + 1;
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s)) continue;
        Choice c = strategy.choice[s];
        double r = 0, ru = 0, st = 0;
        for (auto& tr : g.action(s, static_cast<ActionId>(c)).transitions) {
            r += tr.prob * rs.reach[tr.target];
            ru += tr.prob * rs.reach_up[tr.target];
            st += tr.prob * rs.stay[tr.target];
        }
        if (allow_delay && g.owner(s) == Player::Max && exits.in_ec(s) && !exits.has_state(s) &&
            ru + st * b.u > rs.upper(s, b.u) + kTieTolerance) {
            out.strategy.choice[s] = kDelay;
            out.any_delay = true;
            ++out.delayed;
            continue;
        }
        out.rs.reach[s] = r;
        out.rs.reach_up[s] = ru;
        out.rs.stay[s] = st;
    }
    return out;
}

struct BoundUpdate {
    GlobalBounds bounds;
    bool updated = false;
};

// The values are the least fixed point of the Bellman operator, so upper
// estimates that no Bellman step can raise are above them.
inline bool upper_is_post_fixpoint(const StochasticGame& g, const StatePartition& p, const ReachStayVector& rs,
                                   double u) {
    auto f = upper_values(rs, u);
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s)) continue;
        for (ActionId a = 0; a < g.actions(s).size(); ++a) {
            double v = action_value(g, s, a, f);
            if (g.owner(s) == Player::Max && v > f[s] + kTieTolerance) return false;
            if (g.owner(s) == Player::Min && v <= f[s] + kTieTolerance) goto next;
        }
        if (g.owner(s) == Player::Min) return false;
    next:;
    }
    return true;
}

inline BoundUpdate update_global_bounds(const StochasticGame& g, const StatePartition& p, const ReachStayVector& rs,
                                        GlobalBounds b, const std::vector<std::optional<double>>& decision_values,
                                        bool any_delay, bool cap_with_decision_values = true) {
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s) || !decision_values[s]) continue;
        if (g.owner(s) == Player::Max) b.d_u = std::max(b.d_u, *decision_values[s]);
        else b.d_l = std::min(b.d_l, *decision_values[s]);
    }
    if (any_delay) return {b, false};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!p.is_unknown(s)) continue;
        if (!(rs.stay[s] < 1.0)) return {b, false};
        lo = std::min(lo, rs.reach[s] / (1.0 - rs.stay[s]));
        hi = std::max(hi, rs.reach_up[s] / (1.0 - rs.stay[s]));
        any = true;
    }
    if (!any) return {b, false};
    if (cap_with_decision_values) {
        lo = std::min(b.d_l, lo);
        hi = std::max(b.d_u, hi);
    }
    b.l = std::max(b.l, lo);
    if (hi < b.u && upper_is_post_fixpoint(g, p, rs, hi)) b.u = hi;
    return {b, true};
}

// Only the part of the gap this iteration can still shrink; any width carried
// in from interval-valued states outside S? is not counted.
inline double state_gap(const ReachStayVector& rs, StateId s, const GlobalBounds& b, PrecisionMode mode) {
    double gap = rs.stay[s] * (b.u - b.l);
    if (mode == PrecisionMode::Absolute) return gap;
    double denom = rs.upper(s, b.u);
    return denom > 0 ? gap / denom : 0.0;
}

inline double max_gap(const StatePartition& p, const ReachStayVector& rs, const GlobalBounds& b, PrecisionMode mode) {
    double m = 0.0;
    for (StateId s = 0; s < p.size(); ++s)
        if (p.is_unknown(s)) m = std::max(m, state_gap(rs, s, b, mode));
    return m;
}

inline bool check_termination(const StatePartition& p, const ReachStayVector& rs, const GlobalBounds& b, double eps,
                              PrecisionMode mode) {
    return max_gap(p, rs, b, mode) < 2 * eps;
}

// Everything a test or the fuzzer may want to look at after one iteration.
struct SviStep {
    std::size_t k;
    const StatePartition& partition;
    const ReachStayVector& before;
    const ReachStayVector& after;
    const GlobalBounds& bounds_before;
    const GlobalBounds& bounds_after;
    const StrategySnapshot& chosen;
    const StrategySnapshot& strategy;
    const BestExitSet& exits;
    bool bounds_updated;
};

struct SviOptions {
    bool ec_handling = true;
    PrecisionMode mode = PrecisionMode::Absolute;
    std::uint64_t max_iters = 10'000'000;
    bool cap_with_decision_values = true;
    std::function<void(const SviStep&)> observer;
};

struct SviRun {
    StatePartition partition;
    ReachStayVector rs;
    GlobalBounds bounds;
    StrategySnapshot strategy;
    std::size_t iterations = 0;
    bool converged = false;
    std::uint64_t state_updates = 0;
    IterationTrace trace;
};

// Main loop on an explicit starting point. Rows outside S? are never touched,
// so callers can seed them with whatever values those states are known to have.
inline SviRun run_svi(const StochasticGame& g, StatePartition p, ReachStayVector rs, double eps,
                      const SviOptions& opt) {
    SviRun run;
    GlobalBounds b;
    StrategySnapshot strategy;
    strategy.choice.assign(g.num_states(), kNoChoice);
    std::vector<std::optional<double>> dvals(g.num_states());

    while (!check_termination(p, rs, b, eps, opt.mode)) {
        if (run.iterations >= opt.max_iters) break;
        BestExitSet exits;
        if (opt.ec_handling) exits = handle_ecs(g, rs, b.u, p);
        auto chosen = choose_actions(g, p, rs, b, exits, strategy);
        for (StateId s = 0; s < g.num_states(); ++s)
            dvals[s] = p.is_unknown(s) ? decision_value(g, rs, s, static_cast<ActionId>(chosen.choice[s]))
                                       : std::nullopt;
        auto bell = bellman_update(g, p, rs, chosen, b, exits, opt.ec_handling);
        auto upd = update_global_bounds(g, p, bell.rs, b, dvals, opt.ec_handling && bell.any_delay,
                                        opt.cap_with_decision_values);
        ++run.iterations;

        IterationRecord rec;
        rec.k = bell.rs.k;
        rec.l = upd.bounds.l;
        rec.u = upd.bounds.u;
        rec.d_l = upd.bounds.d_l;
        rec.d_u = upd.bounds.d_u;
        rec.delayed = bell.delayed;
        rec.bounds_updated = upd.updated;
        rec.max_gap = max_gap(p, bell.rs, upd.bounds, PrecisionMode::Absolute);
        rec.exits = exits.pairs.size();
        for (StateId s = 0; s < g.num_states(); ++s) rec.updates += p.is_unknown(s);
        run.state_updates += rec.updates;
        run.trace.push_back(rec);

        if (opt.observer) opt.observer(SviStep{run.iterations, p, rs, bell.rs, b, upd.bounds, chosen, bell.strategy,
                                               exits, upd.updated});
        rs = std::move(bell.rs);
        strategy = std::move(bell.strategy);
        b = upd.bounds;
    }
    run.converged = check_termination(p, rs, b, eps, opt.mode);
    run.partition = std::move(p);
    run.rs = std::move(rs);
    run.bounds = b;
    run.strategy = std::move(strategy);
    return run;
}

inline SolveResult result_from_run(const SviRun& run, std::string algorithm) {
    SolveResult r;
    r.algorithm = std::move(algorithm);
    r.iterations = run.iterations;
    r.converged = run.converged;
    r.global_lower = run.bounds.l;
    r.global_upper = run.bounds.u;
    const auto n = run.rs.stay.size();
    r.lower.resize(n);
    r.upper.resize(n);
    r.value.resize(n);
    for (StateId s = 0; s < n; ++s) {
        r.lower[s] = run.rs.lower(s, run.bounds.l);
        r.upper[s] = run.rs.upper(s, run.bounds.u);
        r.value[s] = 0.5 * (r.lower[s] + r.upper[s]);
    }
    r.strategy = run.strategy;
    r.state_updates = run.state_updates;
    r.trace = run.trace;
    return r;
}

inline SolveResult solve_svi(const StochasticGame& g, double eps, const SviOptions& opt = {}) {
    auto start = std::chrono::steady_clock::now();
    auto p = solver_partition(g);
    auto run = run_svi(g, p, initial_reach_stay(p), eps, opt);
    auto r = result_from_run(run, opt.ec_handling ? "svi" : "svi-noec");
    r.mode = opt.mode;
    r.eps = eps;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace ssg
