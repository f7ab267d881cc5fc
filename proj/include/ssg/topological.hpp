#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "graph.hpp"
#include "svi.hpp"

namespace ssg {

enum class InnerAlgorithm { Svi, Bvi };

struct SccPlan {
    std::vector<StateSet> order;        // successors first
    std::vector<std::size_t> height;    // longest chain of blocks below, 0 for bottom blocks
    std::vector<std::size_t> block_of;  // per state, only meaningful inside S?
    std::size_t depth = 0;              // max height
};

inline SccPlan plan_sccs(const StochasticGame& g, const StatePartition& p) {
    SccPlan plan;
    plan.order = scc_decompose(g, p.unknown_mask());
    plan.block_of.assign(g.num_states(), static_cast<std::size_t>(-1));
    for (std::size_t c = 0; c < plan.order.size(); ++c)
        for (StateId s : plan.order[c]) plan.block_of[s] = c;
    plan.height.assign(plan.order.size(), 0);
    for (std::size_t c = 0; c < plan.order.size(); ++c) {
        for (StateId s : plan.order[c])
            for (auto& a : g.actions(s))
                for (auto& tr : a.transitions) {
                    auto d = plan.block_of[tr.target];
                    if (p.is_unknown(tr.target) && d != c) plan.height[c] = std::max(plan.height[c], plan.height[d] + 1);
                }
        plan.depth = std::max(plan.depth, plan.height[c]);
    }
    return plan;
}

struct TopologicalOptions {
    InnerAlgorithm inner = InnerAlgorithm::Svi;
    SviOptions svi;
    std::uint64_t max_iters = 10'000'000;
};

// Solves one block at a time, successors first. Finished blocks are frozen and
// enter the blocks above them as intervals [lo, hi]. Every block is solved to
// eps / (1 + depth) so the widths added along the longest chain stay within eps.
inline SolveResult solve_topological(const StochasticGame& g, double eps, const TopologicalOptions& opt = {}) {
    auto start = std::chrono::steady_clock::now();
    const auto n = g.num_states();
    auto p = solver_partition(g);
    auto plan = plan_sccs(g, p);
    const double local_eps = eps / static_cast<double>(1 + plan.depth);

    std::vector<double> lo(n, 0.0), hi(n, 0.0);
    for (StateId s = 0; s < n; ++s)
        if (p.is_target(s)) lo[s] = hi[s] = 1.0;

    SolveResult r;
    r.algorithm = opt.inner == InnerAlgorithm::Svi ? "topo-svi" : "topo-bvi";
    r.eps = eps;
    r.mode = opt.svi.mode;
    r.converged = true;
    r.strategy.choice.assign(n, kNoChoice);

    for (std::size_t c = 0; c < plan.order.size(); ++c) {
        const auto& block = plan.order[c];
        std::vector<Region> region(n, Region::Sink);
        for (StateId s = 0; s < n; ++s)
            if (p.is_target(s) || (p.is_unknown(s) && plan.block_of[s] < c)) region[s] = Region::Target;
        for (StateId s : block) region[s] = Region::Unknown;
        StatePartition local(std::move(region));

        SccSummary sum;
        sum.states = block;
        sum.height = plan.height[c];

        if (opt.inner == InnerAlgorithm::Svi) {
            ReachStayVector rs;
            rs.reach = lo;
            rs.reach_up = hi;
            rs.stay.assign(n, 0.0);
            for (StateId s : block) {
                rs.reach[s] = rs.reach_up[s] = 0.0;
                rs.stay[s] = 1.0;
            }
            auto run = run_svi(g, local, std::move(rs), local_eps, opt.svi);
            for (StateId s : block) {
                lo[s] = run.rs.lower(s, run.bounds.l);
                hi[s] = run.rs.upper(s, run.bounds.u);
                r.strategy.choice[s] = run.strategy.choice[s];
            }
            for (auto rec : run.trace) r.trace.push_back(rec);
            sum.iterations = run.iterations;
            sum.state_updates = run.state_updates;
            sum.l = run.bounds.l;
            sum.u = run.bounds.u;
            sum.converged = run.converged;
        } else {
            BoundsVector b{lo, hi};
            double slack = 0.0;
            for (StateId s : block) {
                b.L[s] = 0.0;
                b.U[s] = 1.0;
                for (auto& a : g.actions(s))
                    for (auto& tr : a.transitions)
                        if (plan.block_of[tr.target] != c) slack = std::max(slack, hi[tr.target] - lo[tr.target]);
            }
            BaselineOptions bo;
            bo.max_iters = opt.max_iters;
            auto run = run_bvi(g, local, std::move(b), local_eps, bo, slack);
            sum.l = 1.0;
            sum.u = 0.0;
            for (StateId s : block) {
                lo[s] = run.bounds.L[s];
                hi[s] = run.bounds.U[s];
                sum.l = std::min(sum.l, lo[s]);
                sum.u = std::max(sum.u, hi[s]);
            }
            auto st = greedy_strategy(g, local, run.bounds);
            for (StateId s : block) r.strategy.choice[s] = st.choice[s];
            sum.iterations = run.iterations;
            sum.state_updates = run.state_updates;
            sum.converged = run.converged;
        }
        r.iterations += sum.iterations;
        r.state_updates += sum.state_updates;
        r.converged = r.converged && sum.converged;
        r.sccs.push_back(std::move(sum));
    }

    r.lower = lo;
    r.upper = hi;
    r.value.resize(n);
    r.global_lower = 1.0;
    r.global_upper = 0.0;
    for (StateId s = 0; s < n; ++s) {
        r.value[s] = 0.5 * (lo[s] + hi[s]);
        if (p.is_unknown(s)) {
            r.global_lower = std::min(r.global_lower, lo[s]);
            r.global_upper = std::max(r.global_upper, hi[s]);
        }
    }
    if (r.global_lower > r.global_upper) r.global_lower = r.global_upper = 0.0;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace ssg
