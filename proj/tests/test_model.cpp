#include <gtest/gtest.h>

#include <deque>

#include "fixtures.hpp"
#include "ssg/generator.hpp"
#include "ssg/graph.hpp"
#include "ssg/model_io.hpp"
#include "ssg/partition.hpp"
#include "ssg/svi.hpp"

using namespace ssg;

namespace {

ModelErrorKind parse_error_kind(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ModelError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return ModelErrorKind::MalformedLine;
}

std::vector<bool> forward_reach(const StochasticGame& g, StateId from) {
    std::vector<bool> seen(g.num_states());
    std::deque<StateId> q{from};
    seen[from] = true;
    while (!q.empty()) {
        StateId s = q.front();
        q.pop_front();
        for (auto& a : g.actions(s))
            for (auto& tr : a.transitions)
                if (!seen[tr.target]) {
                    seen[tr.target] = true;
                    q.push_back(tr.target);
                }
    }
    return seen;
}

}  // namespace

TEST(Parse, LeakyLoop) {
    auto g = load_model(fixtures::path("leaky_loop"));
    ASSERT_EQ(g.num_states(), 3u);
    ASSERT_EQ(g.actions(0).size(), 1u);
    auto& tr = g.action(0, 0).transitions;
    ASSERT_EQ(tr.size(), 3u);
    EXPECT_EQ(tr[0].target, 0u);
    EXPECT_DOUBLE_EQ(tr[0].prob, 0.98);
    EXPECT_EQ(tr[0].exact, (Fraction{49, 50}));
    EXPECT_EQ(tr[1].exact, (Fraction{1, 100}));
    EXPECT_TRUE(g.is_target(1));
    EXPECT_FALSE(g.is_target(0));
}

TEST(Parse, LabelsOwnersAndFractions) {
    auto g = load_model(fixtures::path("min_between_ecs"));
    EXPECT_EQ(g.owner(0), Player::Min);
    EXPECT_EQ(g.owner(1), Player::Max);
    EXPECT_EQ(g.action(0, 1).label, "a2");
    EXPECT_EQ(g.action(2, 1).transitions[0].exact, (Fraction{3, 5}));
}

TEST(Parse, SingleTargetGetsSelfLoop) {
    auto g = normalize(parse_model("ssg 1\nstates 1\ntarget 0\n"));
    ASSERT_EQ(g.actions(0).size(), 1u);
    EXPECT_TRUE(is_self_loop(g.action(0, 0), 0));
    auto r = solve_svi(g, 1e-6);
    EXPECT_EQ(r.iterations, 0u);
    EXPECT_EQ(r.value[0], 1.0);
}

TEST(Parse, CommentsBlankLinesAndMergedSuccessors) {
    auto g = parse_model("# leading\n\nssg 1   # header\nstates 2\naction 0 a\n1 1/4\n1 1/4 # again\n0 1/2\n0 0\n");
    ASSERT_EQ(g.action(0, 0).transitions.size(), 2u);
    EXPECT_EQ(g.action(0, 0).transitions[0].exact, (Fraction{1, 2}));
}

TEST(Parse, ProbabilitySumError) {
    try {
        parse_model("ssg 1\nstates 3\naction 0 a\n1 0.5\n2 0.4\n");
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelErrorKind::ProbabilitySum);
        EXPECT_NE(std::string(e.what()).find("0.9"), std::string::npos);
    }
}

TEST(Parse, DecimalSumWithinTolerance) {
    EXPECT_NO_THROW(parse_model("ssg 1\nstates 2\naction 0 a\n0 0.3333333333\n1 0.6666666667\n"));
}

TEST(Parse, ErrorKinds) {
    EXPECT_EQ(parse_error_kind(""), ModelErrorKind::MissingHeader);
    EXPECT_EQ(parse_error_kind("states 2\n"), ModelErrorKind::MissingHeader);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\naction 0 a\n5 1\n"), ModelErrorKind::UnknownState);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\ntarget 7\n"), ModelErrorKind::UnknownState);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\naction 0 a\n1 1\naction 0 a\n1 1\n"),
              ModelErrorKind::DuplicateActionLabel);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\nbogus line here\n"), ModelErrorKind::MalformedLine);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\n1 1\n"), ModelErrorKind::MalformedLine);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\naction 0 a\n1 x\n"), ModelErrorKind::MalformedLine);
    EXPECT_EQ(parse_error_kind("ssg 1\nstates 2\naction 0 a\n1 3/2\n"), ModelErrorKind::MalformedLine);
}

TEST(Parse, MalformedLineNumber) {
    try {
        parse_model("ssg 1\nstates 2\n\nwhat\n");
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_TRUE(e.is_syntax_error());
    }
}

TEST(Serialize, RoundTripAllFixtures) {
    for (auto name : fixtures::kAll) {
        auto g = load_model(fixtures::path(name));
        auto text = serialize_model(g);
        EXPECT_EQ(parse_model(text), g) << name;
        EXPECT_EQ(serialize_model(parse_model(text)), text) << name;
    }
}

TEST(Serialize, RoundTripGenerated) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        GenParams gp;
        gp.n_states = 3 + seed % 6;
        gp.max_actions_per_state = 3;
        gp.seed = seed;
        auto g = generate_random(gp);
        EXPECT_EQ(parse_model(serialize_model(g)), g) << seed;
    }
}

TEST(Normalize, TargetBecomesAbsorbing) {
    auto g = parse_model("ssg 1\nstates 2\ntarget 0\naction 0 go\n1 1\naction 1 back\n0 1\n");
    auto n = normalize(g);
    ASSERT_EQ(n.actions(0).size(), 1u);
    EXPECT_TRUE(is_self_loop(n.action(0, 0), 0));
    EXPECT_EQ(n.action(1, 0).label, "back");
}

TEST(Normalize, ActionlessStateBecomesSink) {
    auto g = normalize(parse_model("ssg 1\nstates 3\ntarget 2\naction 0 a\n1 1/2\n2 1/2\n"));
    ASSERT_EQ(g.actions(1).size(), 1u);
    EXPECT_TRUE(is_self_loop(g.action(1, 0), 1));
    auto p = partition_states(g);
    EXPECT_TRUE(p.is_sink(1));
    EXPECT_TRUE(p.is_unknown(0));
}

TEST(Normalize, Idempotent) {
    for (auto name : fixtures::kAll) {
        auto once = normalize(load_model(fixtures::path(name)));
        EXPECT_EQ(normalize(once), once) << name;
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        GenParams gp;
        gp.seed = seed;
        auto g = generate_random(gp);
        EXPECT_EQ(normalize(g), g);
    }
}

TEST(Partition, LeakyLoop) {
    auto p = partition_states(fixtures::load("leaky_loop"));
    EXPECT_EQ(p.targets(), (std::vector<StateId>{1}));
    EXPECT_EQ(p.sinks(), (std::vector<StateId>{2}));
    EXPECT_EQ(p.unknown(), (std::vector<StateId>{0}));
}

TEST(Partition, CycleWithoutTargetIsAllSink) {
    auto p = partition_states(fixtures::load("cycle_to_sink"));
    EXPECT_EQ(p.sinks(), (std::vector<StateId>{0, 1, 2}));
}

TEST(Partition, CycleWithTarget) {
    auto p = partition_states(fixtures::load("cycle_to_target"));
    EXPECT_EQ(p.targets(), (std::vector<StateId>{3}));
    EXPECT_EQ(p.sinks(), (std::vector<StateId>{2}));
    EXPECT_EQ(p.unknown(), (std::vector<StateId>{0, 1}));
}

TEST(Partition, AllTargets) {
    auto p = partition_states(normalize(parse_model("ssg 1\nstates 3\ntarget 0 1 2\n")));
    EXPECT_EQ(p.targets().size(), 3u);
    EXPECT_TRUE(p.sinks().empty());
    EXPECT_TRUE(p.unknown().empty());
}

TEST(Partition, SureReachStatesArePromotedForTheSolver) {
    auto g = fixtures::load("guarded_loop");
    auto p = partition_states(g);
    EXPECT_TRUE(p.is_unknown(2));
    auto sp = solver_partition(g);
    EXPECT_TRUE(sp.is_target(2));
    EXPECT_TRUE(sp.is_unknown(0));
    EXPECT_TRUE(sp.is_unknown(1));
}

TEST(Partition, InvariantsOnGeneratedModels) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        GenParams gp;
        gp.n_states = 2 + seed % 9;
        gp.max_actions_per_state = 3;
        gp.ec_bias = (seed % 4) * 0.3;
        gp.seed = seed;
        auto g = generate_random(gp);
        auto p = partition_states(g);
        for (StateId s = 0; s < g.num_states(); ++s) {
            int regions = p.is_target(s) + p.is_sink(s) + p.is_unknown(s);
            ASSERT_EQ(regions, 1);
            if (p.is_target(s)) {
                ASSERT_TRUE(g.is_target(s));
                ASSERT_EQ(g.actions(s).size(), 1u);
                ASSERT_TRUE(is_self_loop(g.action(s, 0), s));
            }
            auto fw = forward_reach(g, s);
            bool hits_target = false;
            for (StateId t = 0; t < g.num_states(); ++t) hits_target |= fw[t] && g.is_target(t);
            if (p.is_sink(s)) {
                ASSERT_FALSE(hits_target) << seed << " " << s;
            }
            if (p.is_unknown(s)) {
                ASSERT_TRUE(hits_target) << seed << " " << s;
            }
        }
    }
}

TEST(Generator, Deterministic) {
    GenParams gp;
    gp.n_states = 5;
    gp.seed = 1;
    EXPECT_EQ(serialize_model(generate_random(gp)), serialize_model(generate_random(gp)));
    auto other = gp;
    other.seed = 2;
    EXPECT_NE(serialize_model(generate_random(gp)), serialize_model(generate_random(other)));
}

TEST(Generator, FrozenOutput) {
    GenParams gp;
    gp.n_states = 3;
    gp.seed = 7;
    EXPECT_EQ(serialize_model(generate_random(gp)),
              "ssg 1\nstates 3\nminplayer 0\ntarget 1\naction 0 a0\n0 1\naction 1 loop\n1 1\n"
              "action 2 a0\n0 9/16\n2 7/16\naction 2 a1\n0 3/5\n1 1/10\n2 3/10\n");
}

TEST(Generator, OutputIsValid) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        GenParams gp;
        gp.n_states = 1 + seed % 10;
        gp.max_actions_per_state = 1 + seed % 4;
        gp.max_branching = 1 + seed % 3;
        gp.target_fraction = (seed % 5) * 0.25;
        gp.seed = seed;
        auto g = generate_random(gp);
        EXPECT_NO_THROW(parse_model(serialize_model(g)));
        EXPECT_EQ(g.target_states().empty(), gp.target_fraction == 0.0);
        for (StateId s = 0; s < g.num_states(); ++s) EXPECT_GE(g.actions(s).size(), 1u);
    }
}

TEST(Generator, FullEcBiasWithoutTargetsAlwaysHasEndComponent) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        GenParams gp;
        gp.n_states = 6;
        gp.ec_bias = 1.0;
        gp.target_fraction = 0.0;
        gp.seed = seed;
        auto g = generate_random(gp);
        StateSet all;
        for (StateId s = 0; s < g.num_states(); ++s) all.push_back(s);
        EXPECT_FALSE(mec_decompose(g, all).empty()) << seed;
    }
}

TEST(Generator, EcBiasIncreasesEndComponents) {
    auto count = [](double bias) {
        int n = 0;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            GenParams gp;
            gp.n_states = 6;
            gp.ec_bias = bias;
            gp.seed = seed;
            auto g = generate_random(gp);
            StateSet non_target;
            for (StateId s = 0; s < g.num_states(); ++s)
                if (!g.is_target(s)) non_target.push_back(s);
            n += !mec_decompose(g, non_target).empty();
        }
        return n;
    };
    EXPECT_GT(count(0.9), count(0.0));
}

TEST(Generator, SomeEndComponentsLandInUnknownStates) {
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        GenParams gp;
        gp.n_states = 6;
        gp.ec_bias = 1.0;
        gp.seed = seed;
        auto g = generate_random(gp);
        n += !mec_decompose(g, partition_states(g).unknown_mask()).empty();
    }
    EXPECT_GT(n, 0);
}

TEST(Generator, AllTargetsSolveInZeroIterations) {
    GenParams gp;
    gp.n_states = 6;
    gp.target_fraction = 1.0;
    auto g = generate_random(gp);
    auto r = solve_svi(g, 1e-6);
    EXPECT_EQ(r.iterations, 0u);
    for (double v : r.value) EXPECT_EQ(v, 1.0);
}

TEST(Generator, RejectsZeroCounts) {
    GenParams gp;
    gp.n_states = 0;
    EXPECT_THROW(generate_random(gp), std::invalid_argument);
}
