#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "game.hpp"

namespace ssg {

struct GenParams {
    std::size_t n_states = 5;
    std::size_t max_actions_per_state = 2;
    std::size_t max_branching = 3;
    double target_fraction = 0.2;
    double min_player_fraction = 0.5;
    double ec_bias = 0.3;
    std::uint64_t seed = 1;
};

namespace detail {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// the few draws we need are done by hand to keep models identical everywhere.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : eng_() % n; }
    double unit() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 eng_;
};

}  // namespace detail

// Random game, a deterministic function of the parameters. With probability
// ec_bias an action only moves to states with index <= its own, which closes
// cycles and produces end components.
inline StochasticGame generate_random(const GenParams& gp) {
    if (gp.n_states == 0 || gp.max_actions_per_state == 0 || gp.max_branching == 0)
        throw std::invalid_argument("GenParams counts must be at least 1");
    detail::Draw rng(gp.seed);
    const std::size_t n = gp.n_states;
    StochasticGame g(n);

    std::size_t n_targets = 0;
    if (gp.target_fraction > 0)
        n_targets = std::clamp<std::size_t>(static_cast<std::size_t>(gp.target_fraction * n + 0.5), 1, n);
    std::vector<StateId> order(n);
    for (StateId s = 0; s < n; ++s) order[s] = s;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t i = 0; i < n_targets; ++i) g.set_target(order[i]);

    for (StateId s = 0; s < n; ++s) {
        if (rng.chance(gp.min_player_fraction)) g.set_owner(s, Player::Min);
        if (g.is_target(s)) continue;
        std::size_t n_act = 1 + rng.below(gp.max_actions_per_state);
        for (std::size_t a = 0; a < n_act; ++a) {
            bool backward = rng.chance(gp.ec_bias);
            std::size_t pool = backward ? s + 1 : n;
            std::size_t branch = 1 + rng.below(std::min(gp.max_branching, pool));
            std::vector<StateId> succ;
            while (succ.size() < branch) {
                auto t = static_cast<StateId>(rng.below(pool));
                if (std::find(succ.begin(), succ.end(), t) == succ.end()) succ.push_back(t);
            }
            std::sort(succ.begin(), succ.end());
            std::vector<std::int64_t> w(succ.size());
            std::int64_t total = 0;
            for (auto& x : w) total += x = 1 + static_cast<std::int64_t>(rng.below(9));
            auto& act = g.add_action(s, "a" + std::to_string(a));
            for (std::size_t i = 0; i < succ.size(); ++i) {
                Fraction f = Fraction{w[i], total}.reduced();
                act.transitions.push_back(Transition{succ[i], f.value(), f});
            }
        }
    }
    return normalize(std::move(g));
}

}  // namespace ssg
