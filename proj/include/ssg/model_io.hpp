#pragma once

#include <gmpxx.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "game.hpp"

namespace ssg {

enum class ModelErrorKind {
    MalformedLine,
    UnknownState,
    ProbabilitySum,
    DuplicateActionLabel,
    MissingHeader,
};

class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, std::string msg, std::size_t line = 0)
        : std::runtime_error(std::move(msg)), kind_(kind), line_(line) {}

    ModelErrorKind kind() const { return kind_; }
    std::size_t line() const { return line_; }

    // Errors in the text itself, as opposed to a well-formed but invalid game.
    bool is_syntax_error() const {
        return kind_ == ModelErrorKind::MalformedLine || kind_ == ModelErrorKind::MissingHeader;
    }

private:
    ModelErrorKind kind_;
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class Int>
inline bool parse_int(std::string_view tok, Int& out) {
    if (tok.empty()) return false;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && p == tok.data() + tok.size();
}

// "n/d" or a plain decimal such as 0.98 or 1
inline bool parse_probability(std::string_view tok, Fraction& out) {
    auto slash = tok.find('/');
    if (slash != std::string_view::npos) {
        std::int64_t n, d;
        if (!parse_int(tok.substr(0, slash), n) || !parse_int(tok.substr(slash + 1), d)) return false;
        if (d <= 0 || n < 0) return false;
        out = Fraction{n, d}.reduced();
        return true;
    }
    auto dot = tok.find('.');
    std::string_view ip = tok.substr(0, dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : tok.substr(dot + 1);
    if (ip.empty() && fp.empty()) return false;
    if (ip.size() + fp.size() > 17) return false;
    std::int64_t num = 0, den = 1;
    for (char c : ip) {
        if (c < '0' || c > '9') return false;
        num = num * 10 + (c - '0');
    }
    for (char c : fp) {
        if (c < '0' || c > '9') return false;
        num = num * 10 + (c - '0');
        den *= 10;
    }
    out = Fraction{num, den}.reduced();
    return true;
}

}  // namespace detail

inline StochasticGame parse_model(std::string_view text) {
    using detail::split_ws;
    std::size_t lineno = 0;
    bool have_header = false;
    bool have_states = false;
    StochasticGame g;
    Action* current = nullptr;
    StateId current_state = 0;

    auto malformed = [&](const std::string& why) {
        return ModelError(ModelErrorKind::MalformedLine,
                          "line " + std::to_string(lineno) + ": " + why, lineno);
    };
    auto state_id = [&](std::string_view tok) -> StateId {
        long long id;
        if (!detail::parse_int(tok, id)) throw malformed("expected a state id, got '" + std::string(tok) + "'");
        if (id < 0 || static_cast<std::size_t>(id) >= g.num_states())
            throw ModelError(ModelErrorKind::UnknownState, "unknown state " + std::string(tok), lineno);
        return static_cast<StateId>(id);
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = split_ws(line);
        if (tok.empty()) continue;

        if (!have_header) {
            if (tok.size() != 2 || tok[0] != "ssg") throw ModelError(ModelErrorKind::MissingHeader, "missing 'ssg 1' header", lineno);
            if (tok[1] != "1") throw malformed("unsupported format version " + std::string(tok[1]));
            have_header = true;
            continue;
        }
        if (tok[0] == "states") {
            std::size_t n;
            if (have_states || tok.size() != 2 || !detail::parse_int(tok[1], n)) throw malformed("bad states line");
            g = StochasticGame(n);
            have_states = true;
            continue;
        }
        if (!have_states) throw malformed("'states' must come before anything else");
        if (tok[0] == "minplayer" || tok[0] == "target") {
            if (tok.size() < 2) throw malformed("expected at least one state id");
            for (std::size_t i = 1; i < tok.size(); ++i) {
                StateId s = state_id(tok[i]);
                if (tok[0] == "target") g.set_target(s);
                else g.set_owner(s, Player::Min);
            }
            current = nullptr;
            continue;
        }
        if (tok[0] == "action") {
            if (tok.size() != 3) throw malformed("expected 'action <state> <label>'");
            current_state = state_id(tok[1]);
            for (auto& a : g.actions(current_state))
                if (a.label == tok[2])
                    throw ModelError(ModelErrorKind::DuplicateActionLabel,
                                     "state " + std::to_string(current_state) + " has two actions labelled '" +
                                         std::string(tok[2]) + "'",
                                     lineno);
            current = &g.add_action(current_state, std::string(tok[2]));
            continue;
        }
        if (tok.size() != 2) throw malformed("unrecognised line");
        if (!current) throw malformed("transition outside of an action");
        StateId t = state_id(tok[0]);
        Fraction f;
        if (!detail::parse_probability(tok[1], f) || f.num > f.den) throw malformed("bad probability '" + std::string(tok[1]) + "'");
        if (f.num == 0) continue;
        bool merged = false;
        for (auto& tr : current->transitions) {
            if (tr.target != t) continue;
            Fraction sum{tr.exact.num * f.den + f.num * tr.exact.den, tr.exact.den * f.den};
            tr.exact = sum.reduced();
            tr.prob = tr.exact.value();
            merged = true;
        }
        if (!merged) current->transitions.push_back(Transition{t, f.value(), f});
    }
    if (!have_header) throw ModelError(ModelErrorKind::MissingHeader, "missing 'ssg 1' header", 0);
    if (!have_states) throw ModelError(ModelErrorKind::MalformedLine, "missing 'states' line", lineno);

    for (StateId s = 0; s < g.num_states(); ++s) {
        for (auto& a : g.actions(s)) {
            mpq_class sum = 0;
            for (auto& tr : a.transitions) {
                mpq_class q(static_cast<long>(tr.exact.num), static_cast<unsigned long>(tr.exact.den));
                q.canonicalize();
                sum += q;
            }
            double dsum = sum.get_d();
            if (sum != 1 && std::abs(dsum - 1.0) > 1e-9) {
                std::ostringstream os;
                os << "probabilities of state " << s << " action '" << a.label << "' sum to " << dsum;
                throw ModelError(ModelErrorKind::ProbabilitySum, os.str());
            }
        }
    }
    return g;
}

inline StochasticGame load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

inline std::string format_fraction(const Fraction& f) {
    auto r = f.reduced();
    if (r.den == 1) return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline std::string serialize_model(const StochasticGame& g) {
    std::ostringstream os;
    os << "ssg 1\nstates " << g.num_states() << "\n";
    std::string mins, targets;
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (g.owner(s) == Player::Min) mins += " " + std::to_string(s);
        if (g.is_target(s)) targets += " " + std::to_string(s);
    }
    if (!mins.empty()) os << "minplayer" << mins << "\n";
    if (!targets.empty()) os << "target" << targets << "\n";
    for (StateId s = 0; s < g.num_states(); ++s)
        for (auto& a : g.actions(s)) {
            os << "action " << s << " " << a.label << "\n";
            for (auto& tr : a.transitions) os << tr.target << " " << format_fraction(tr.exact) << "\n";
        }
    return os.str();
}

}  // namespace ssg
