#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "partition.hpp"

namespace ssg {

inline constexpr double kTieTolerance = 1e-12;

using StateAction = std::pair<StateId, ActionId>;

struct BestExitSet {
    std::vector<StateAction> pairs;  // sorted
    StateSet removed_trap_states;    // sorted
    StateSet ec_states;              // states of the MECs of S? that are not traps, sorted

    bool contains(StateId s, ActionId a) const {
        return std::binary_search(pairs.begin(), pairs.end(), StateAction{s, a});
    }
    bool in_ec(StateId s) const { return std::binary_search(ec_states.begin(), ec_states.end(), s); }
    bool has_state(StateId s) const {
        auto it = std::lower_bound(pairs.begin(), pairs.end(), StateAction{s, 0});
        return it != pairs.end() && it->first == s;
    }
    // Lowest-index exit action of s; only meaningful when has_state(s).
    ActionId exit_of(StateId s) const {
        return std::lower_bound(pairs.begin(), pairs.end(), StateAction{s, 0})->second;
    }
};

inline double action_value(const StochasticGame& g, StateId s, ActionId a, const std::vector<double>& f) {
    double v = 0.0;
    for (auto& tr : g.action(s, a).transitions) v += tr.prob * f[tr.target];
    return v;
}

inline bool leaves(const StochasticGame& g, StateId s, ActionId a, const std::vector<bool>& set) {
    for (auto& tr : g.action(s, a).transitions)
        if (!set[tr.target]) return true;
    return false;
}

// All Maximizer state-action pairs leaving T whose one-step value under f is
// maximal (up to the tie tolerance).
inline std::vector<StateAction> best_exits(const StochasticGame& g, const StateSet& T, const std::vector<double>& f) {
    auto in_t = to_mask(T, g.num_states());
    std::vector<std::pair<StateAction, double>> cand;
    double best = -1.0;
    for (StateId s : T) {
        if (g.owner(s) != Player::Max) continue;
        for (ActionId a = 0; a < g.actions(s).size(); ++a) {
            if (!leaves(g, s, a, in_t)) continue;
            double v = action_value(g, s, a, f);
            cand.push_back({{s, a}, v});
            best = std::max(best, v);
        }
    }
    std::vector<StateAction> out;
    for (auto& [sa, v] : cand)
        if (v >= best - kTieTolerance) out.push_back(sa);
    return out;
}

// Recursive best-exit computation for one end component Y. Exits found are
// added to `out`; an end component without any Maximizer exit is a trap and
// its states are moved to Z.
inline void best_exit_set(const StochasticGame& g, const std::vector<double>& f, const StateSet& Y,
                          StatePartition& partition, BestExitSet& out, std::size_t* calls = nullptr) {
    if (calls) ++*calls;
    auto exits = best_exits(g, Y, f);
    if (exits.empty()) {
        for (StateId s : Y) {
            partition.set(s, Region::Sink);
            out.removed_trap_states.push_back(s);
        }
        return;
    }
    std::vector<bool> rest = to_mask(Y, g.num_states());
    for (auto& sa : exits) {
        out.pairs.push_back(sa);
        rest[sa.first] = false;
    }
    for (auto& sub : mec_decompose(g, rest)) best_exit_set(g, f, sub.states, partition, out, calls);
}

inline void canonicalize(BestExitSet& b) {
    std::sort(b.pairs.begin(), b.pairs.end());
    b.pairs.erase(std::unique(b.pairs.begin(), b.pairs.end()), b.pairs.end());
    std::sort(b.removed_trap_states.begin(), b.removed_trap_states.end());
    std::sort(b.ec_states.begin(), b.ec_states.end());
}

// Union of best_exit_set over all MECs of S?.
inline BestExitSet best_exits_of_unknown(const StochasticGame& g, const std::vector<double>& f,
                                         StatePartition& partition) {
    BestExitSet out;
    for (auto& mec : mec_decompose(g, partition.unknown_mask())) {
        best_exit_set(g, f, mec.states, partition, out);
        for (StateId s : mec.states)
            if (partition.is_unknown(s)) out.ec_states.push_back(s);
    }
    canonicalize(out);
    return out;
}

}  // namespace ssg
