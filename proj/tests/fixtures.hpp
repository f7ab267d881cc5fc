#pragma once

#include <string>

#include "ssg/game.hpp"
#include "ssg/model_io.hpp"

namespace fixtures {

inline ssg::StochasticGame load(const std::string& name) {
    return ssg::normalize(ssg::load_model(std::string(SSG_MODELS_DIR) + "/" + name + ".ssg"));
}

inline std::string path(const std::string& name) { return std::string(SSG_MODELS_DIR) + "/" + name + ".ssg"; }

// The single leaky loop: s stays with p, reaches f with r, falls to z otherwise.
// p and r are given as n/d with a common denominator.
inline ssg::StochasticGame leaky_loop(std::int64_t p, std::int64_t r, std::int64_t den) {
    ssg::StochasticGame g(3);
    g.set_target(1);
    g.add_action(0, "a", {{0, p, den}, {1, r, den}, {2, den - p - r, den}});
    return ssg::normalize(g);
}

inline const char* const kAll[] = {"leaky_loop", "cycle_to_sink", "cycle_to_target", "self_loop_exit", "two_exits",
                                   "min_between_ecs", "two_state_ec", "guarded_loop", "min_decision", "chain3"};

}  // namespace fixtures
