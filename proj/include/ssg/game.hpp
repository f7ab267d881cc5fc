#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

namespace ssg {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

enum class Player : std::uint8_t { Max, Min };

// Exact probability as written in the model file. Decimals are kept as
// n / 10^k so the oracle can work with the exact input.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    Fraction reduced() const {
        auto g = std::gcd(num, den);
        if (g == 0) return {0, 1};
        return {num / g, den / g};
    }

    friend bool operator==(const Fraction& a, const Fraction& b) {
        auto x = a.reduced(), y = b.reduced();
        return x.num == y.num && x.den == y.den;
    }
};

struct Transition {
    StateId target = 0;
    double prob = 0.0;
    Fraction exact;
};

struct Action {
    std::string label;
    std::vector<Transition> transitions;
};

struct State {
    Player owner = Player::Max;
    bool target = false;
    std::vector<Action> actions;
};

class StochasticGame {
public:
    StochasticGame() = default;
    explicit StochasticGame(std::size_t n) : states_(n) {}

    std::size_t num_states() const { return states_.size(); }

    const State& state(StateId s) const { return states_[s]; }
    State& state(StateId s) { return states_[s]; }

    Player owner(StateId s) const { return states_[s].owner; }
    bool is_target(StateId s) const { return states_[s].target; }
    const std::vector<Action>& actions(StateId s) const { return states_[s].actions; }
    const Action& action(StateId s, ActionId a) const { return states_[s].actions[a]; }

    void set_owner(StateId s, Player p) { states_[s].owner = p; }
    void set_target(StateId s, bool t = true) { states_[s].target = t; }

    Action& add_action(StateId s, std::string label) {
        states_[s].actions.push_back(Action{std::move(label), {}});
        return states_[s].actions.back();
    }

    // Convenience for building models in code; probabilities given as n/d.
    Action& add_action(StateId s, std::string label,
                       std::initializer_list<std::tuple<StateId, std::int64_t, std::int64_t>> succ) {
        auto& act = add_action(s, std::move(label));
        for (auto [t, n, d] : succ) {
            Fraction f = Fraction{n, d}.reduced();
            act.transitions.push_back(Transition{t, f.value(), f});
        }
        return act;
    }

    std::vector<StateId> target_states() const {
        std::vector<StateId> out;
        for (StateId s = 0; s < states_.size(); ++s)
            if (states_[s].target) out.push_back(s);
        return out;
    }

    std::size_t num_actions() const {
        std::size_t n = 0;
        for (auto& st : states_) n += st.actions.size();
        return n;
    }

    friend bool operator==(const StochasticGame& a, const StochasticGame& b) {
        if (a.states_.size() != b.states_.size()) return false;
        for (std::size_t s = 0; s < a.states_.size(); ++s) {
            auto& x = a.states_[s];
            auto& y = b.states_[s];
            if (x.owner != y.owner || x.target != y.target || x.actions.size() != y.actions.size())
                return false;
            for (std::size_t i = 0; i < x.actions.size(); ++i) {
                auto& p = x.actions[i];
                auto& q = y.actions[i];
                if (p.label != q.label || p.transitions.size() != q.transitions.size()) return false;
                for (std::size_t j = 0; j < p.transitions.size(); ++j)
                    if (p.transitions[j].target != q.transitions[j].target ||
                        !(p.transitions[j].exact == q.transitions[j].exact))
                        return false;
            }
        }
        return true;
    }

private:
    std::vector<State> states_;
};

inline bool is_self_loop(const Action& a, StateId s) {
    return a.transitions.size() == 1 && a.transitions[0].target == s;
}

// Targets get a single self-loop, actionless states get one too.
// Applying it twice gives the same game.
inline StochasticGame normalize(StochasticGame g) {
    for (StateId s = 0; s < g.num_states(); ++s) {
        auto& st = g.state(s);
        bool needs_loop = st.actions.empty() ||
                          (st.target && !(st.actions.size() == 1 && is_self_loop(st.actions[0], s)));
        if (!needs_loop) continue;
        st.actions.clear();
        g.add_action(s, "loop", {{s, 1, 1}});
    }
    return g;
}

}  // namespace ssg
