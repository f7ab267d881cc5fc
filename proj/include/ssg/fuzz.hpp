#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "generator.hpp"
#include "model_io.hpp"
#include "oracle.hpp"
#include "svi.hpp"
#include "topological.hpp"

namespace ssg {

struct FuzzConfig {
    std::size_t count = 100;
    std::uint64_t seed = 42;
    std::size_t max_states = 8;
    std::size_t max_actions = 3;
    double eps = 1e-6;
    std::size_t sandwich_samples = 10;
    double sandwich_slack = 1e-9;
    bool mutant_no_decision_cap = false;
    bool check_topological = true;
    std::string out_dir;  // empty: do not write failing models
};

struct FuzzFailure {
    std::size_t index = 0;
    std::string reason;
    StochasticGame model;
    StochasticGame shrunk;
    std::string model_path, shrunk_path;
};

struct FuzzReport {
    std::size_t models = 0;
    std::size_t skipped = 0;  // too large for the oracle
    std::vector<FuzzFailure> failures;
};

inline GenParams fuzz_params(const FuzzConfig& cfg, std::size_t i) {
    detail::Draw rng(cfg.seed * 1000003ULL + i);
    GenParams gp;
    gp.n_states = 2 + rng.below(std::max<std::size_t>(cfg.max_states, 2) - 1);
    gp.max_actions_per_state = cfg.max_actions;
    gp.max_branching = 3;
    gp.target_fraction = 0.1 + 0.3 * rng.unit();
    gp.min_player_fraction = rng.unit();
    static constexpr double biases[] = {0.0, 0.3, 0.6, 0.9};
    gp.ec_bias = biases[i % 4];
    gp.seed = cfg.seed * 7919ULL + i;
    return gp;
}

namespace detail {

// Sample positions 1..total, evenly spaced and always including the last one.
inline std::vector<std::size_t> sample_points(std::size_t total, std::size_t samples) {
    std::vector<std::size_t> out;
    if (total == 0 || samples == 0) return out;
    for (std::size_t j = 1; j <= samples; ++j) out.push_back(std::max<std::size_t>(1, total * j / samples));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::optional<std::string> check_sandwich(const std::vector<std::vector<double>>& lows,
                                                 const std::vector<std::vector<double>>& highs,
                                                 const std::vector<double>& truth, const FuzzConfig& cfg,
                                                 const char* who) {
    for (std::size_t k : sample_points(lows.size(), cfg.sandwich_samples)) {
        auto& lo = lows[k - 1];
        auto& hi = highs[k - 1];
        for (std::size_t s = 0; s < truth.size(); ++s)
            if (lo[s] > truth[s] + cfg.sandwich_slack || hi[s] < truth[s] - cfg.sandwich_slack) {
                std::ostringstream os;
                os << who << " bounds at iteration " << k << " miss the value of state " << s << ": [" << lo[s]
                   << ", " << hi[s] << "] vs " << truth[s];
                return os.str();
            }
    }
    return std::nullopt;
}

inline std::optional<std::string> check_values(const SolveResult& r, const std::vector<double>& truth, double eps) {
    if (!r.converged) return r.algorithm + " did not converge";
    for (std::size_t s = 0; s < truth.size(); ++s)
        if (std::abs(r.value[s] - truth[s]) > eps) {
            std::ostringstream os;
            os.precision(12);
            os << r.algorithm << " value of state " << s << " is " << r.value[s] << ", exact " << truth[s];
            return os.str();
        }
    return std::nullopt;
}

}  // namespace detail

// Runs every solver on g and compares with the exact oracle. Returns a
// description of the first disagreement, nothing if all agree. Throws
// TooLarge when the oracle cannot handle g.
inline std::optional<std::string> fuzz_check(const StochasticGame& g, const FuzzConfig& cfg) {
    auto truth = exact_value(g).as_double();

    std::vector<std::vector<double>> lows, highs;
    SviOptions so;
    so.max_iters = 1'000'000;
    so.cap_with_decision_values = !cfg.mutant_no_decision_cap;
    so.observer = [&](const SviStep& st) {
        std::vector<double> lo(g.num_states()), hi(g.num_states());
        for (StateId s = 0; s < g.num_states(); ++s) {
            lo[s] = st.after.lower(s, st.bounds_after.l);
            hi[s] = st.after.upper(s, st.bounds_after.u);
        }
        lows.push_back(std::move(lo));
        highs.push_back(std::move(hi));
    };
    auto svi = solve_svi(g, cfg.eps, so);
    if (auto e = detail::check_values(svi, truth, cfg.eps)) return e;
    if (auto e = detail::check_sandwich(lows, highs, truth, cfg, "svi")) return e;

    lows.clear();
    highs.clear();
    BaselineOptions bo;
    bo.max_iters = 1'000'000;
    bo.observer = [&](std::size_t, const BoundsVector& b) {
        lows.push_back(b.L);
        highs.push_back(b.U);
    };
    auto bvi = solve_bvi(g, cfg.eps, bo);
    if (auto e = detail::check_values(bvi, truth, cfg.eps)) return e;
    if (auto e = detail::check_sandwich(lows, highs, truth, cfg, "bvi")) return e;

    if (cfg.check_topological) {
        TopologicalOptions to;
        to.svi.max_iters = 1'000'000;
        to.svi.cap_with_decision_values = !cfg.mutant_no_decision_cap;
        auto topo = solve_topological(g, cfg.eps, to);
        if (auto e = detail::check_values(topo, truth, cfg.eps)) return e;
    }
    return std::nullopt;
}

namespace detail {

inline std::optional<StochasticGame> drop_state(const StochasticGame& g, StateId victim) {
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (s == victim) continue;
        for (auto& a : g.actions(s))
            for (auto& tr : a.transitions)
                if (tr.target == victim) return std::nullopt;
    }
    StochasticGame out(g.num_states() - 1);
    auto remap = [victim](StateId s) { return s > victim ? s - 1 : s; };
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (s == victim) continue;
        auto& st = out.state(remap(s));
        st = g.state(s);
        for (auto& a : st.actions)
            for (auto& tr : a.transitions) tr.target = remap(tr.target);
    }
    return out;
}

}  // namespace detail

// Greedy reduction: keep removing actions, replacing states by sinks and
// deleting unreferenced states while `still_fails` holds.
inline StochasticGame shrink(StochasticGame g, const std::function<bool(const StochasticGame&)>& still_fails) {
    for (bool progress = true; progress;) {
        progress = false;
        for (StateId s = 0; s < g.num_states(); ++s) {
            for (ActionId a = 0; g.actions(s).size() > 1 && a < g.actions(s).size();) {
                auto cand = g;
                cand.state(s).actions.erase(cand.state(s).actions.begin() + a);
                if (still_fails(cand)) {
                    g = std::move(cand);
                    progress = true;
                } else {
                    ++a;
                }
            }
        }
        for (StateId s = 0; s < g.num_states(); ++s) {
            if (g.actions(s).size() == 1 && is_self_loop(g.action(s, 0), s)) continue;
            auto cand = g;
            cand.state(s).actions.clear();
            cand.set_target(s, false);
            cand = normalize(std::move(cand));
            if (still_fails(cand)) {
                g = std::move(cand);
                progress = true;
            }
        }
        for (StateId s = g.num_states(); s-- > 0;) {
            if (g.num_states() <= 1) break;
            auto cand = detail::drop_state(g, s);
            if (cand && still_fails(*cand)) {
                g = std::move(*cand);
                progress = true;
            }
        }
    }
    return g;
}

inline FuzzReport run_fuzz(const FuzzConfig& cfg, std::ostream* log = nullptr) {
    FuzzReport report;
    auto fails = [&](const StochasticGame& m) {
        try {
            return fuzz_check(m, cfg).has_value();
        } catch (const TooLarge&) {
            return false;
        }
    };
    for (std::size_t i = 0; i < cfg.count; ++i) {
        auto g = generate_random(fuzz_params(cfg, i));
        std::optional<std::string> problem;
        try {
            problem = fuzz_check(g, cfg);
        } catch (const TooLarge&) {
            ++report.skipped;
            continue;
        }
        ++report.models;
        if (!problem) continue;
        FuzzFailure f;
        f.index = i;
        f.reason = *problem;
        f.model = g;
        f.shrunk = shrink(g, fails);
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            auto base = std::filesystem::path(cfg.out_dir) /
                        ("fuzz_" + std::to_string(cfg.seed) + "_" + std::to_string(i));
            f.model_path = base.string() + ".ssg";
            f.shrunk_path = base.string() + ".shrunk.ssg";
            std::ofstream(f.model_path) << "# " << f.reason << "\n" << serialize_model(f.model);
            std::ofstream(f.shrunk_path) << serialize_model(f.shrunk);
        }
        if (log) *log << "model " << i << ": " << f.reason << "\n";
        report.failures.push_back(std::move(f));
    }
    return report;
}

}  // namespace ssg
