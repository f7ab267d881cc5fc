#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "fuzz.hpp"
#include "generator.hpp"
#include "model_io.hpp"
#include "oracle.hpp"
#include "svi.hpp"
#include "topological.hpp"

namespace ssg::cli {

enum ExitCode : int {
    kOk = 0,
    kParseError = 2,
    kValidationError = 3,
    kIterationCap = 4,
    kTooLarge = 5,
};

struct SolveFlags {
    std::string algo = "svi";
    bool topo = false;
    bool no_ec = false;
    double eps = 1e-6;
    bool relative = false;
    double max_iters = 1e7;
    bool no_decision_cap = false;
};

inline SolveResult run_algorithm(const StochasticGame& g, const SolveFlags& f) {
    auto iters = static_cast<std::uint64_t>(f.max_iters);
    SviOptions so;
    so.ec_handling = !f.no_ec;
    so.mode = f.relative ? PrecisionMode::Relative : PrecisionMode::Absolute;
    so.max_iters = iters;
    so.cap_with_decision_values = !f.no_decision_cap;
    if (f.topo) {
        if (f.algo == "vi") throw CLI::ValidationError("--topo", "needs --algo svi or bvi");
        TopologicalOptions to;
        to.inner = f.algo == "bvi" ? InnerAlgorithm::Bvi : InnerAlgorithm::Svi;
        to.svi = so;
        to.max_iters = iters;
        return solve_topological(g, f.eps, to);
    }
    BaselineOptions bo;
    bo.max_iters = iters;
    if (f.algo == "vi") return solve_vi(g, f.eps, bo);
    if (f.algo == "bvi") return solve_bvi(g, f.eps, bo);
    return solve_svi(g, f.eps, so);
}

inline std::string choice_label(const StochasticGame& g, StateId s, Choice c) {
    return c == kDelay ? "DELAY" : g.action(s, static_cast<ActionId>(c)).label;
}

inline nlohmann::json result_json(const std::string& model, const StochasticGame& g, const SolveResult& r,
                                  bool with_trace) {
    nlohmann::json j;
    j["model"] = model;
    j["algorithm"] = r.algorithm;
    j["eps"] = r.eps;
    j["mode"] = r.mode == PrecisionMode::Relative ? "relative" : "absolute";
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["global_lower"] = r.global_lower;
    j["global_upper"] = r.global_upper;
    j["states"] = nlohmann::json::array();
    for (StateId s = 0; s < g.num_states(); ++s)
        j["states"].push_back({{"id", s}, {"lower", r.lower[s]}, {"upper", r.upper[s]}, {"value", r.value[s]}});
    j["strategy"] = nlohmann::json::object();
    for (StateId s = 0; s < r.strategy.choice.size(); ++s)
        if (r.strategy.choice[s] != kNoChoice) j["strategy"][std::to_string(s)] = choice_label(g, s, r.strategy.choice[s]);
    j["wall_ms"] = r.wall_ms;
    if (with_trace) {
        j["trace"] = nlohmann::json::array();
        for (auto& t : r.trace)
            j["trace"].push_back({{"k", t.k},
                                  {"l", t.l},
                                  {"u", t.u},
                                  {"d_l", t.d_l},
                                  {"d_u", t.d_u},
                                  {"delayed", t.delayed},
                                  {"bounds_updated", t.bounds_updated},
                                  {"max_gap", t.max_gap}});
        if (!r.sccs.empty()) {
            j["sccs"] = nlohmann::json::array();
            for (auto& c : r.sccs)
                j["sccs"].push_back({{"states", c.states},
                                     {"height", c.height},
                                     {"iterations", c.iterations},
                                     {"state_updates", c.state_updates},
                                     {"l", c.l},
                                     {"u", c.u},
                                     {"converged", c.converged}});
        }
    }
    return j;
}

// Loads a model, mapping failures to the exit code they should produce.
inline int load(const std::string& path, StochasticGame& g, std::ostream& err) {
    try {
        g = normalize(load_model(path));
        return kOk;
    } catch (const ModelError& e) {
        err << path << ": " << e.what() << "\n";
        return e.is_syntax_error() ? kParseError : kValidationError;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kParseError;
    }
}

inline int cmd_solve(const std::string& path, const SolveFlags& f, const std::string& json_path, bool trace,
                     bool strategy, std::ostream& out, std::ostream& err) {
    StochasticGame g;
    if (int rc = load(path, g, err)) return rc;
    auto r = run_algorithm(g, f);
    auto j = result_json(path, g, r, trace);
    if (json_path.empty()) {
        out << j.dump(2) << "\n";
    } else {
        std::ofstream(json_path) << j.dump(2) << "\n";
        out << r.algorithm << ": " << r.iterations << " iterations, " << (r.converged ? "converged" : "NOT converged")
            << ", bounds [" << r.global_lower << ", " << r.global_upper << "]\n";
        if (trace)
            for (auto& t : r.trace)
                out << "  k=" << t.k << " l=" << t.l << " u=" << t.u << " delayed=" << t.delayed
                    << (t.bounds_updated ? "" : " (bounds held)") << "\n";
        for (StateId s = 0; s < g.num_states(); ++s) {
            out << "  " << s << ": " << std::setprecision(10) << r.value[s] << " in [" << r.lower[s] << ", "
                << r.upper[s] << "]";
            if (strategy && r.strategy.choice[s] != kNoChoice) out << "  " << choice_label(g, s, r.strategy.choice[s]);
            out << "\n";
        }
    }
    if (!r.converged) {
        err << "iteration cap reached after " << r.iterations << " iterations\n";
        return kIterationCap;
    }
    return kOk;
}

inline int cmd_oracle(const std::string& path, const std::string& json_path, std::ostream& out, std::ostream& err) {
    StochasticGame g;
    if (int rc = load(path, g, err)) return rc;
    ExactResult ex;
    try {
        ex = exact_value(g);
    } catch (const TooLarge& e) {
        err << e.what() << "\n";
        return kTooLarge;
    }
    nlohmann::json j;
    j["model"] = path;
    j["values"] = nlohmann::json::object();
    j["float"] = nlohmann::json::object();
    j["max_strategy"] = nlohmann::json::object();
    j["min_strategy"] = nlohmann::json::object();
    for (StateId s = 0; s < g.num_states(); ++s) {
        auto key = std::to_string(s);
        j["values"][key] = rational_string(ex.value[s]);
        j["float"][key] = ex.value[s].get_d();
        if (g.owner(s) == Player::Max) j["max_strategy"][key] = g.action(s, ex.max_strategy[s]).label;
        else j["min_strategy"][key] = g.action(s, ex.min_strategy[s]).label;
    }
    if (json_path.empty()) out << j.dump(2) << "\n";
    else std::ofstream(json_path) << j.dump(2) << "\n";
    return kOk;
}

inline int cmd_compare(const std::vector<std::string>& paths, const std::vector<std::string>& algos, double eps,
                       double max_iters, const std::string& csv_path, std::ostream& out, std::ostream& err) {
    std::ostringstream csv;
    csv << "model,algorithm,iterations,converged,wall_ms,max_gap\n";
    for (auto& path : paths) {
        StochasticGame g;
        int rc = load(path, g, err);
        for (auto& algo : algos) {
            if (rc != kOk) {
                csv << path << "," << algo << ",0,false,0,nan\n";
                continue;
            }
            SolveFlags f;
            f.eps = eps;
            f.max_iters = max_iters;
            f.algo = algo;
            if (algo == "svi-noec") {
                f.algo = "svi";
                f.no_ec = true;
            } else if (algo == "topo-svi" || algo == "topo-bvi") {
                f.algo = algo.substr(5);
                f.topo = true;
            }
            auto r = run_algorithm(g, f);
            csv << path << "," << algo << "," << r.iterations << "," << (r.converged ? "true" : "false") << ","
                << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << std::setprecision(6)
                << "," << r.max_gap() << "\n";
        }
    }
    if (csv_path.empty()) out << csv.str();
    else std::ofstream(csv_path) << csv.str();
    return kOk;
}

inline int cmd_fuzz(const FuzzConfig& cfg, std::ostream& out) {
    auto report = run_fuzz(cfg, &out);
    out << "fuzz: " << report.models << " models checked, " << report.skipped << " skipped, "
        << report.failures.size() << " counterexamples\n";
    for (auto& f : report.failures) {
        out << "  model " << f.index << " (" << f.model.num_states() << " states, shrunk to " << f.shrunk.num_states()
            << "): " << f.reason << "\n";
        if (!f.model_path.empty()) out << "    written to " << f.model_path << " and " << f.shrunk_path << "\n";
    }
    return report.failures.empty() ? kOk : 1;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solver for reachability in simple stochastic games", "ssg"};
    app.require_subcommand(1);

    std::string model, json_path, csv_path, out_path;
    SolveFlags flags;
    bool trace = false, strategy = false;
    auto* solve = app.add_subcommand("solve", "Solve a model");
    solve->add_option("model", model, "Model file")->required();
    solve->add_option("--algo", flags.algo, "vi, bvi or svi")->check(CLI::IsMember({"vi", "bvi", "svi"}));
    solve->add_flag("--topo", flags.topo, "Solve strongly connected blocks one by one");
    solve->add_flag("--no-ec-handling", flags.no_ec, "Run SVI without end-component handling");
    solve->add_option("--eps", flags.eps, "Precision")->check(CLI::PositiveNumber);
    solve->add_flag("--relative", flags.relative, "Relative instead of absolute precision");
    solve->add_option("--max-iters", flags.max_iters, "Iteration cap");
    solve->add_option("--json", json_path, "Write the JSON result here instead of stdout");
    solve->add_flag("--trace", trace, "Include the per-iteration trace");
    solve->add_flag("--strategy", strategy, "Print the final strategy");
    solve->add_flag("--no-decision-cap", flags.no_decision_cap, "Drop the decision-value cap (unsound, for testing)");

    auto* oracle = app.add_subcommand("oracle", "Exact values by strategy enumeration");
    oracle->add_option("model", model, "Model file")->required();
    oracle->add_option("--json", json_path, "Write the JSON result here instead of stdout");

    std::vector<std::string> models;
    std::string algos = "svi,bvi";
    double eps = 1e-6, max_iters = 1e7;
    auto* compare = app.add_subcommand("compare", "Compare algorithms on several models");
    compare->add_option("models", models, "Model files")->required();
    compare->add_option("--algos", algos, "Comma separated: vi,bvi,svi,svi-noec,topo-svi,topo-bvi");
    compare->add_option("--eps", eps, "Precision")->check(CLI::PositiveNumber);
    compare->add_option("--max-iters", max_iters, "Iteration cap");
    compare->add_option("--csv", csv_path, "Write the table here instead of stdout");

    FuzzConfig fc;
    auto* fuzz = app.add_subcommand("fuzz", "Differential testing against the exact oracle");
    fuzz->add_option("--count", fc.count, "Number of random models");
    fuzz->add_option("--seed", fc.seed, "Seed");
    fuzz->add_option("--states", fc.max_states, "Maximum number of states")->check(CLI::Range(2, 12));
    fuzz->add_option("--actions", fc.max_actions, "Maximum actions per state")->check(CLI::Range(1, 6));
    fuzz->add_option("--eps", fc.eps, "Precision")->check(CLI::PositiveNumber);
    fuzz->add_option("--out", fc.out_dir, "Directory for failing models");
    fuzz->add_flag("--mutant-no-decision-cap", fc.mutant_no_decision_cap, "Fuzz the solver without the cap");

    GenParams gp;
    auto* gen = app.add_subcommand("generate", "Write a random model");
    gen->add_option("--states", gp.n_states, "Number of states")->check(CLI::PositiveNumber);
    gen->add_option("--actions", gp.max_actions_per_state, "Maximum actions per state")->check(CLI::PositiveNumber);
    gen->add_option("--branching", gp.max_branching, "Maximum successors per action")->check(CLI::PositiveNumber);
    gen->add_option("--targets", gp.target_fraction, "Fraction of target states")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--min-fraction", gp.min_player_fraction, "Fraction of Minimizer states")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--ec-bias", gp.ec_bias, "Bias towards backward edges")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gp.seed, "Seed");
    gen->add_option("-o,--output", out_path, "Output file (default stdout)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*solve) return cmd_solve(model, flags, json_path, trace, strategy, out, err);
        if (*oracle) return cmd_oracle(model, json_path, out, err);
        if (*compare) {
            std::vector<std::string> list;
            std::stringstream ss(algos);
            for (std::string a; std::getline(ss, a, ',');)
                if (!a.empty()) list.push_back(a);
            for (auto& a : list)
                if (a != "vi" && a != "bvi" && a != "svi" && a != "svi-noec" && a != "topo-svi" && a != "topo-bvi") {
                    err << "unknown algorithm " << a << "\n";
                    return 1;
                }
            return cmd_compare(models, list, eps, max_iters, csv_path, out, err);
        }
        if (*fuzz) return cmd_fuzz(fc, out);
        if (*gen) {
            auto text = serialize_model(generate_random(gp));
            if (out_path.empty()) out << text;
            else std::ofstream(out_path) << text;
            return kOk;
        }
    } catch (const CLI::Error& e) {
        err << e.what() << "\n";
        return 1;
    }
    return 1;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace ssg::cli
