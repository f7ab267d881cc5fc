#pragma once

#include <algorithm>
#include <vector>

#include "game.hpp"

namespace ssg {

using StateSet = std::vector<StateId>;  // sorted ascending

struct EndComponent {
    StateSet states;
    std::vector<std::vector<ActionId>> actions;  // parallel to states

    bool contains(StateId s) const { return std::binary_search(states.begin(), states.end(), s); }
};

using MecDecomposition = std::vector<EndComponent>;

inline std::vector<bool> to_mask(const StateSet& set, std::size_t n) {
    std::vector<bool> m(n);
    for (StateId s : set) m[s] = true;
    return m;
}

inline StateSet from_mask(const std::vector<bool>& m) {
    StateSet out;
    for (StateId s = 0; s < m.size(); ++s)
        if (m[s]) out.push_back(s);
    return out;
}

namespace detail {

// Tarjan's algorithm on an explicit successor list, iterative so deep chains
// do not blow the stack. Components come out in reverse topological order:
// a component is emitted only after everything it can reach.
inline std::vector<std::vector<StateId>> tarjan(const std::vector<std::vector<StateId>>& succ,
                                                const std::vector<bool>& active) {
    const std::size_t n = succ.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::size_t>> call;
    std::vector<std::vector<StateId>> comps;
    std::size_t counter = 0;

    for (StateId root = 0; root < n; ++root) {
        if (!active[root] || index[root] != unvisited) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < succ[v].size()) {
                StateId w = succ[v][i++];
                if (!active[w]) continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<StateId> comp;
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
            StateId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comps;
}

}  // namespace detail

// SCCs of the graph induced by `within` (all actions, edges leaving `within`
// ignored), successors first.
inline std::vector<StateSet> scc_decompose(const StochasticGame& g, const std::vector<bool>& within) {
    std::vector<std::vector<StateId>> succ(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (!within[s]) continue;
        for (auto& a : g.actions(s))
            for (auto& tr : a.transitions)
                if (within[tr.target]) succ[s].push_back(tr.target);
    }
    return detail::tarjan(succ, within);
}

inline std::vector<StateSet> scc_decompose(const StochasticGame& g) {
    return scc_decompose(g, std::vector<bool>(g.num_states(), true));
}

// Maximal end components of the sub-game restricted to `within`. Actions that
// may leave `within` are never part of an end component.
inline MecDecomposition mec_decompose(const StochasticGame& g, const std::vector<bool>& within) {
    const std::size_t n = g.num_states();
    std::vector<std::vector<ActionId>> allowed(n);
    std::vector<bool> alive(n, false);
    for (StateId s = 0; s < n; ++s) {
        if (!within[s]) continue;
        for (ActionId a = 0; a < g.actions(s).size(); ++a) {
            bool inside = true;
            for (auto& tr : g.action(s, a).transitions) inside = inside && within[tr.target];
            if (inside) allowed[s].push_back(a);
        }
        alive[s] = !allowed[s].empty();
    }

    std::vector<std::size_t> comp_of(n);
    std::vector<std::vector<StateId>> comps;
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::vector<StateId>> succ(n);
        for (StateId s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            for (ActionId a : allowed[s])
                for (auto& tr : g.action(s, a).transitions)
                    if (alive[tr.target]) succ[s].push_back(tr.target);
        }
        comps = detail::tarjan(succ, alive);
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (StateId s : comps[c]) comp_of[s] = c;
        for (StateId s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            auto& acts = allowed[s];
            auto keep = std::remove_if(acts.begin(), acts.end(), [&](ActionId a) {
                for (auto& tr : g.action(s, a).transitions)
                    if (!alive[tr.target] || comp_of[tr.target] != comp_of[s]) return true;
                return false;
            });
            if (keep != acts.end()) {
                acts.erase(keep, acts.end());
                changed = true;
            }
            if (acts.empty()) {
                alive[s] = false;
                changed = true;
            }
        }
    }

    MecDecomposition out;
    for (auto& comp : comps) {
        EndComponent ec;
        ec.states = comp;
        for (StateId s : comp) ec.actions.push_back(allowed[s]);
        out.push_back(std::move(ec));
    }
    std::sort(out.begin(), out.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states.front() < b.states.front(); });
    return out;
}

inline MecDecomposition mec_decompose(const StochasticGame& g, const StateSet& within) {
    return mec_decompose(g, to_mask(within, g.num_states()));
}

}  // namespace ssg
