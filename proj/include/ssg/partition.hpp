#pragma once

#include <deque>
#include <vector>

#include "game.hpp"

namespace ssg {

enum class Region : std::uint8_t { Target, Sink, Unknown };

class StatePartition {
public:
    StatePartition() = default;
    explicit StatePartition(std::vector<Region> r) : region_(std::move(r)) {}

    std::size_t size() const { return region_.size(); }
    Region region(StateId s) const { return region_[s]; }
    bool is_target(StateId s) const { return region_[s] == Region::Target; }
    bool is_sink(StateId s) const { return region_[s] == Region::Sink; }
    bool is_unknown(StateId s) const { return region_[s] == Region::Unknown; }

    void set(StateId s, Region r) { region_[s] = r; }

    std::vector<StateId> states_in(Region r) const {
        std::vector<StateId> out;
        for (StateId s = 0; s < region_.size(); ++s)
            if (region_[s] == r) out.push_back(s);
        return out;
    }
    std::vector<StateId> targets() const { return states_in(Region::Target); }
    std::vector<StateId> sinks() const { return states_in(Region::Sink); }
    std::vector<StateId> unknown() const { return states_in(Region::Unknown); }

    std::vector<bool> unknown_mask() const {
        std::vector<bool> m(region_.size());
        for (std::size_t s = 0; s < region_.size(); ++s) m[s] = region_[s] == Region::Unknown;
        return m;
    }

    friend bool operator==(const StatePartition&, const StatePartition&) = default;

private:
    std::vector<Region> region_;
};

// Backward closure of `seed` over the graph where s -> t if some action of s can move to t.
inline std::vector<bool> backward_reachable(const StochasticGame& g, const std::vector<bool>& seed) {
    std::vector<std::vector<StateId>> pred(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s)
        for (auto& a : g.actions(s))
            for (auto& tr : a.transitions) pred[tr.target].push_back(s);
    std::vector<bool> seen = seed;
    std::deque<StateId> queue;
    for (StateId s = 0; s < g.num_states(); ++s)
        if (seen[s]) queue.push_back(s);
    while (!queue.empty()) {
        StateId t = queue.front();
        queue.pop_front();
        for (StateId s : pred[t])
            if (!seen[s]) {
                seen[s] = true;
                queue.push_back(s);
            }
    }
    return seen;
}

inline StatePartition partition_states(const StochasticGame& g) {
    std::vector<bool> is_f(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s) is_f[s] = g.is_target(s);
    auto reaches = backward_reachable(g, is_f);
    std::vector<Region> r(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s)
        r[s] = is_f[s] ? Region::Target : reaches[s] ? Region::Unknown : Region::Sink;
    return StatePartition(std::move(r));
}

// States from which F is reached with probability one no matter what either
// player does. A state fails this iff it can reach a set X outside F that some
// action of each member keeps inside X (play can then avoid F forever).
inline std::vector<bool> sure_reach_states(const StochasticGame& g, const StatePartition& p) {
    const auto n = g.num_states();
    std::vector<bool> avoid(n);
    for (StateId s = 0; s < n; ++s) avoid[s] = !p.is_target(s);
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < n; ++s) {
            if (!avoid[s]) continue;
            bool stays = false;
            for (auto& a : g.actions(s)) {
                bool inside = true;
                for (auto& tr : a.transitions) inside = inside && avoid[tr.target];
                if (inside) {
                    stays = true;
                    break;
                }
            }
            if (!stays) {
                avoid[s] = false;
                changed = true;
            }
        }
    }
    auto can_avoid = backward_reachable(g, avoid);
    std::vector<bool> sure(n);
    for (StateId s = 0; s < n; ++s) sure[s] = !can_avoid[s];
    return sure;
}

// Partition used by the solvers: states that are bound to hit F are moved
// from S? into F, so their trivial value 1 does not hold the global upper
// bound in place.
inline StatePartition solver_partition(const StochasticGame& g) {
    auto p = partition_states(g);
    auto sure = sure_reach_states(g, p);
    for (StateId s = 0; s < g.num_states(); ++s)
        if (sure[s] && p.is_unknown(s)) p.set(s, Region::Target);
    return p;
}

}  // namespace ssg
