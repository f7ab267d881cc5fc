#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "game.hpp"
#include "partition.hpp"

namespace ssg {

using Rational = mpq_class;

inline Rational to_rational(const Fraction& f) {
    Rational q(static_cast<long>(f.num), static_cast<unsigned long>(f.den));
    q.canonicalize();
    return q;
}

class TooLarge : public std::runtime_error {
public:
    TooLarge(std::size_t states, double pairs)
        : std::runtime_error("model too large for the exact oracle: " + std::to_string(states) + " states, " +
                             std::to_string(pairs) + " strategy pairs"),
          states_(states),
          pairs_(pairs) {}
    std::size_t states() const { return states_; }
    double pairs() const { return pairs_; }

private:
    std::size_t states_;
    double pairs_;
};

struct OracleLimits {
    std::size_t max_states = 12;
    double max_pairs = 1e7;
};

struct ExactResult {
    std::vector<Rational> value;
    std::vector<ActionId> max_strategy;  // per state, 0 where the owner is Min
    std::vector<ActionId> min_strategy;

    std::vector<double> as_double() const {
        std::vector<double> out;
        for (auto& v : value) out.push_back(v.get_d());
        return out;
    }
};

namespace detail {

// Solves A x = b in place by Gauss-Jordan elimination; A is m x (m+1) with
// b in the last column. The systems built here are always non-singular.
inline std::vector<Rational> solve_linear(std::vector<std::vector<Rational>>& A) {
    const std::size_t m = A.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        while (piv < m && A[piv][col] == 0) ++piv;
        if (piv == m) throw std::logic_error("singular system in chain solve");
        std::swap(A[piv], A[col]);
        Rational inv = 1 / A[col][col];
        for (std::size_t j = col; j <= m; ++j) A[col][j] *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == col || A[i][col] == 0) continue;
            Rational f = A[i][col];
            for (std::size_t j = col; j <= m; ++j) A[i][j] -= f * A[col][j];
        }
    }
    std::vector<Rational> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = A[i][m];
    return x;
}

}  // namespace detail

// Exact reachability probabilities of the Markov chain obtained by fixing
// action choice[s] in every state.
inline std::vector<Rational> chain_values(const StochasticGame& g, const std::vector<ActionId>& choice) {
    const auto n = g.num_states();
    std::vector<std::vector<StateId>> pred(n);
    for (StateId s = 0; s < n; ++s)
        for (auto& tr : g.action(s, choice[s]).transitions) pred[tr.target].push_back(s);
    std::vector<bool> reaches(n);
    std::vector<StateId> stack;
    for (StateId s = 0; s < n; ++s)
        if (g.is_target(s)) {
            reaches[s] = true;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        StateId t = stack.back();
        stack.pop_back();
        for (StateId s : pred[t])
            if (!reaches[s]) {
                reaches[s] = true;
                stack.push_back(s);
            }
    }
    std::vector<std::size_t> idx(n, static_cast<std::size_t>(-1));
    std::vector<StateId> unknown;
    for (StateId s = 0; s < n; ++s)
        if (reaches[s] && !g.is_target(s)) {
            idx[s] = unknown.size();
            unknown.push_back(s);
        }
    const std::size_t m = unknown.size();
    std::vector<std::vector<Rational>> A(m, std::vector<Rational>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        StateId s = unknown[i];
        A[i][i] = 1;
        for (auto& tr : g.action(s, choice[s]).transitions) {
            Rational p = to_rational(tr.exact);
            if (g.is_target(tr.target)) A[i][m] += p;
            else if (idx[tr.target] != static_cast<std::size_t>(-1)) A[i][idx[tr.target]] -= p;
        }
    }
    auto x = detail::solve_linear(A);
    std::vector<Rational> out(n);
    for (StateId s = 0; s < n; ++s)
        if (g.is_target(s)) out[s] = 1;
    for (std::size_t i = 0; i < m; ++i) out[unknown[i]] = x[i];
    return out;
}

inline std::vector<Rational> mc_reachability(const StochasticGame& chain) {
    for (StateId s = 0; s < chain.num_states(); ++s)
        if (chain.actions(s).size() != 1) throw std::invalid_argument("mc_reachability needs one action per state");
    return chain_values(chain, std::vector<ActionId>(chain.num_states(), 0));
}

namespace detail {

// Odometer over the choices of the listed states.
class StrategyCounter {
public:
    StrategyCounter(const StochasticGame& g, std::vector<StateId> states) : g_(g), states_(std::move(states)) {}

    template <class F>
    void for_each(std::vector<ActionId>& choice, F&& f) const {
        for (StateId s : states_) choice[s] = 0;
        while (true) {
            f();
            std::size_t i = 0;
            for (; i < states_.size(); ++i) {
                StateId s = states_[i];
                if (++choice[s] < g_.actions(s).size()) break;
                choice[s] = 0;
            }
            if (i == states_.size()) return;
        }
    }

    double count() const {
        double c = 1;
        for (StateId s : states_) c *= static_cast<double>(g_.actions(s).size());
        return c;
    }

private:
    const StochasticGame& g_;
    std::vector<StateId> states_;
};

inline Rational sum_of(const std::vector<Rational>& v) {
    Rational s = 0;
    for (auto& x : v) s += x;
    return s;
}

// outer player optimises over its strategies the inner player's best reply.
inline ExactResult enumerate_value(const StochasticGame& g, Player outer, const OracleLimits& lim) {
    const auto n = g.num_states();
    auto p = partition_states(g);
    std::vector<StateId> outer_states, inner_states;
    for (StateId s = 0; s < n; ++s) {
        if (!p.is_unknown(s) || g.actions(s).size() < 2) continue;
        (g.owner(s) == outer ? outer_states : inner_states).push_back(s);
    }
    StrategyCounter outer_c(g, outer_states), inner_c(g, inner_states);
    double pairs = outer_c.count() * inner_c.count();
    if (n > lim.max_states || pairs > lim.max_pairs) throw TooLarge(n, pairs);

    const bool outer_max = outer == Player::Max;
    auto better = [](bool maximize, const Rational& a, const Rational& b) { return maximize ? a > b : a < b; };

    std::vector<ActionId> choice(n, 0);
    ExactResult best;
    Rational best_sum;
    bool have_best = false;
    std::vector<ActionId> best_inner;
    outer_c.for_each(choice, [&] {
        std::vector<Rational> reply;
        Rational reply_sum;
        std::vector<ActionId> reply_choice;
        bool have_reply = false;
        inner_c.for_each(choice, [&] {
            auto v = chain_values(g, choice);
            if (!have_reply) {
                reply = v;
            } else {
                for (StateId s = 0; s < n; ++s)
                    if (better(!outer_max, v[s], reply[s])) reply[s] = v[s];
            }
            Rational sum = sum_of(v);
            if (!have_reply || better(!outer_max, sum, reply_sum)) {
                reply_sum = sum;
                reply_choice = choice;
            }
            have_reply = true;
        });
        if (!have_best) {
            best.value = reply;
        } else {
            for (StateId s = 0; s < n; ++s)
                if (better(outer_max, reply[s], best.value[s])) best.value[s] = reply[s];
        }
        Rational sum = sum_of(reply);
        if (!have_best || better(outer_max, sum, best_sum)) {
            best_sum = sum;
            best_inner = reply_choice;
            (outer_max ? best.max_strategy : best.min_strategy) = choice;
        }
        have_best = true;
    });
    (outer_max ? best.min_strategy : best.max_strategy) = best_inner;
    for (StateId s = 0; s < n; ++s) {
        if (g.owner(s) != Player::Max) best.max_strategy[s] = 0;
        if (g.owner(s) != Player::Min) best.min_strategy[s] = 0;
    }
    return best;
}

}  // namespace detail

// max over Maximizer memoryless strategies of min over Minimizer replies.
inline ExactResult exact_value(const StochasticGame& g, const OracleLimits& lim = {}) {
    return detail::enumerate_value(g, Player::Max, lim);
}

// Same enumeration with the quantifiers swapped.
inline ExactResult exact_value_inf_sup(const StochasticGame& g, const OracleLimits& lim = {}) {
    return detail::enumerate_value(g, Player::Min, lim);
}

struct ExactReachStay {
    std::vector<Rational> reach;
    std::vector<Rational> stay;
};

inline ExactReachStay k_step_oracle(const StochasticGame& chain, const StatePartition& p, std::size_t k) {
    const auto n = chain.num_states();
    ExactReachStay rs{std::vector<Rational>(n), std::vector<Rational>(n)};
    for (StateId s = 0; s < n; ++s) {
        if (p.is_target(s)) rs.reach[s] = 1;
        if (p.is_unknown(s)) rs.stay[s] = 1;
    }
    for (std::size_t i = 0; i < k; ++i) {
        ExactReachStay next = rs;
        for (StateId s = 0; s < n; ++s) {
            if (!p.is_unknown(s)) continue;
            next.reach[s] = 0;
            next.stay[s] = 0;
            for (auto& tr : chain.action(s, 0).transitions) {
                Rational q = to_rational(tr.exact);
                next.reach[s] += q * rs.reach[tr.target];
                next.stay[s] += q * rs.stay[tr.target];
            }
        }
        rs = std::move(next);
    }
    return rs;
}

inline std::string rational_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace ssg
