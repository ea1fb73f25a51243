// kpgot: solve keypoint-guided transport problems from files and run the
// toy comparisons.
//
// Exit codes: 0 success, 1 bad input, 2 infeasible, 3 not converged (the
// plan is still written).

#include "kpgot/core.hpp"
#include "kpgot/dual.hpp"
#include "kpgot/exact.hpp"
#include "kpgot/gw.hpp"
#include "kpgot/harness.hpp"
#include "kpgot/io.hpp"
#include "kpgot/masking.hpp"
#include "kpgot/partial.hpp"
#include "kpgot/projection.hpp"
#include "kpgot/relation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace kpgot;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 1, kInfeasible = 2, kNotConverged = 3 };

struct Options {
    std::string method;
    std::string source;
    std::string target;
    std::string keypoints;
    double epsilon = 0.005;
    double rho = 0.1;
    double alpha = 0.5;
    std::optional<double> mass_budget;
    std::string divergence = "js";
    std::string backend = "lp";
    std::string out;
    std::string report;
    std::uint64_t seed = 0;
    int max_iterations = 10000;
    double tolerance = 1e-9;
    bool timing = false;

    std::string scenario = "fig4";
    int classes = 3;
    int points_per_class = 20;
    int keypoints_per_class = 1;
    std::string methods;
    std::string out_dir;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

SolverConfig make_config(const Options &o) {
    SolverConfig cfg;
    cfg.set_epsilon(o.epsilon)
        .set_rho(o.rho)
        .set_alpha(o.alpha)
        .set_divergence(divergence_from_string(o.divergence))
        .set_seed(o.seed)
        .set_max_iterations(o.max_iterations)
        .set_tolerance(o.tolerance);
    return cfg;
}

Backend parse_backend(const std::string &name) {
    if (name == "lp")
        return Backend::LP;
    if (name == "sinkhorn")
        return Backend::Sinkhorn;
    fail(ErrorCode::InvalidConfig, "unknown backend '" + name + "'; valid: lp, sinkhorn");
}

json config_echo(const Options &o, const SolverConfig &cfg) {
    json c;
    c["epsilon"] = cfg.epsilon();
    c["rho"] = cfg.rho();
    c["alpha"] = cfg.alpha();
    c["divergence"] = to_string(cfg.divergence());
    c["backend"] = o.backend;
    c["mass_budget"] = o.mass_budget ? json(*o.mass_budget) : json(nullptr);
    c["seed"] = cfg.seed();
    c["max_iterations"] = cfg.max_iterations();
    c["tolerance"] = cfg.tolerance();
    return c;
}

json plan_entry(const std::string &method, const TransportPlan &plan, std::optional<double> accuracy,
                std::optional<double> unshared, double wall_ms, bool timing,
                const std::string &plan_file) {
    json e;
    e["method"] = method;
    e["solver"] = to_string(plan.solver_tag());
    e["objective"] = number_or_null(plan.objective());
    e["row_marginal_error"] = number_or_null(plan.row_marginal_error());
    e["col_marginal_error"] = number_or_null(plan.col_marginal_error());
    e["iterations"] = plan.iterations();
    e["converged"] = plan.converged();
    e["accuracy"] = accuracy ? number_or_null(*accuracy) : json(nullptr);
    e["unshared_mass"] = unshared ? number_or_null(*unshared) : json(nullptr);
    e["wall_ms"] = timing ? json(wall_ms) : json(nullptr);
    e["plan_file"] = plan_file;
    return e;
}

void write_json(const std::string &path, const json &doc) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Io, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

int exit_for(const Error &e) {
    switch (e.code()) {
    case ErrorCode::Infeasible:
    case ErrorCode::InfeasibleMask:
        return kInfeasible;
    default:
        return kInput;
    }
}

TransportPlan solve_method(const Options &o, const SolverConfig &cfg) {
    static const std::vector<std::string> kSolveMethods = {
        "kp", "gw", "kpg-rl", "kpg-rl-kp", "kpg-rl-gw", "partial-kpg-rl", "dual-kpg-rl"};
    require(std::find(kSolveMethods.begin(), kSolveMethods.end(), o.method) != kSolveMethods.end(),
            ErrorCode::InvalidConfig,
            "unknown method '" + o.method +
                "'; valid: kp, gw, kpg-rl, kpg-rl-kp, kpg-rl-gw, partial-kpg-rl, dual-kpg-rl");
    const DiscreteDistribution p = read_points_csv(o.source);
    const DiscreteDistribution q = read_points_csv(o.target);
    KeypointPairing kp;
    if (!o.keypoints.empty()) {
        kp = read_keypoints_json(o.keypoints);
        kp.check_bounds(p.count(), q.count());
        kp.check_masses(p.weights(), q.weights());
    }
    const Backend backend = parse_backend(o.backend);
    const bool partial = o.method == "partial-kpg-rl";
    if (!partial)
        require(std::abs(p.total_mass() - q.total_mass()) <= kMassTolerance,
                ErrorCode::InvalidMassBudget,
                "source and target masses differ; only partial-kpg-rl accepts that");
    const bool needs_keypoints = o.method != "kp" && o.method != "gw";
    if (needs_keypoints)
        require(!kp.empty(), ErrorCode::EmptyKeypoints, "method " + o.method + " needs --keypoints");

    auto cs = [&] { return intra_cost(p, cfg.intra_metric()); };
    auto ct = [&] { return intra_cost(q, cfg.intra_metric()); };

    if (o.method == "kp")
        return solve_masked(p.weights(), q.weights(), pairwise_cost(p, q),
                            MaskMatrix::ones(p.count(), q.count()), cfg, backend);
    if (o.method == "gw")
        return solve_kpg_rl_gw(p, q, cs(), ct(), KeypointPairing{}, 1.0, cfg, backend).plan;
    if (o.method == "kpg-rl")
        return solve_kpg_rl(p, q, cs(), ct(), kp, cfg, backend);
    if (o.method == "kpg-rl-kp")
        return solve_kpg_rl_kp(p, q, pairwise_cost(p, q), cs(), ct(), kp, cfg.alpha(), cfg, backend);
    if (o.method == "kpg-rl-gw")
        return solve_kpg_rl_gw(p, q, cs(), ct(), kp, cfg.alpha(), cfg, backend).plan;
    if (partial) {
        require(o.mass_budget.has_value(), ErrorCode::InvalidMassBudget,
                "partial-kpg-rl needs --mass-budget");
        return solve_partial_kpg_rl(p, q, cs(), ct(), kp, *o.mass_budget, cfg, backend);
    }
    if (o.method == "dual-kpg-rl") {
        const MaskMatrix mask = build_mask(p.count(), q.count(), kp);
        check_masked_feasibility(p, q, mask, kp);
        const GuidingMatrix g =
            guiding_from_intra(cs(), ct(), kp, cfg.rho(), cfg.divergence());
        const PotentialPair pot = solve_dual(p.weights(), q.weights(), g, mask, cfg.epsilon(), cfg);
        return recover_plan(pot, p.weights(), q.weights(), g, mask, cfg.epsilon());
    }
    fail(ErrorCode::InvalidConfig, "unreachable method " + o.method);
}

int cmd_solve(const Options &o) {
    const SolverConfig cfg = make_config(o);
    const auto start = std::chrono::steady_clock::now();
    const TransportPlan plan = solve_method(o, cfg);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (!o.out.empty())
        write_plan_csv(o.out, plan.values());
    if (!o.report.empty()) {
        json doc;
        doc["tool"] = "kpgot";
        doc["command"] = "solve";
        doc["config"] = config_echo(o, cfg);
        doc["results"] = json::array(
            {plan_entry(o.method, plan, std::nullopt, std::nullopt, ms, o.timing, o.out)});
        write_json(o.report, doc);
    }
    if (!plan.converged()) {
        std::cerr << "kpgot: " << o.method << " did not converge within "
                  << cfg.max_iterations() << " iterations\n";
        return kNotConverged;
    }
    return kOk;
}

ToyScenario make_scenario(const Options &o) {
    if (o.scenario == "fig1")
        return scenario_fig1(o.seed);
    if (o.scenario == "fig4")
        return scenario_fig4(o.seed);
    if (o.scenario == "fig5")
        return scenario_fig5(o.seed);
    if (o.scenario == "custom")
        return gen_mixture_scenario(o.classes, o.points_per_class, o.keypoints_per_class, 2, 6.0,
                                    o.seed);
    fail(ErrorCode::InvalidConfig,
         "unknown scenario '" + o.scenario + "'; valid: fig1, fig4, fig5, custom");
}

std::string default_methods(const std::string &scenario) {
    if (scenario == "fig1")
        return "kp,gw,kpg-rl";
    if (scenario == "fig5")
        return "partial-kp,partial-kpg-rl";
    if (scenario == "custom")
        return "kp,kpg-rl";
    return "kp,kpg-rl-kp@2,kpg-rl-kp";
}

std::string file_stem(std::string name) {
    for (char &c : name)
        if (c == '@')
            c = '_';
    return name;
}

int cmd_toy(const Options &o) {
    require(!o.out_dir.empty(), ErrorCode::InvalidConfig, "--out-dir is required");
    const SolverConfig cfg = make_config(o);
    const std::vector<MethodSpec> methods =
        parse_method_list(o.methods.empty() ? default_methods(o.scenario) : o.methods);
    const ToyScenario scenario = make_scenario(o);
    const Comparison cmp = run_comparison(scenario, methods, cfg);

    std::filesystem::create_directories(o.out_dir);
    const std::filesystem::path dir(o.out_dir);

    std::ofstream matching(dir / "matching.csv", std::ios::binary);
    require(matching.good(), ErrorCode::Io, "cannot write matching.csv");
    matching << "method,source_index,target_index";
    for (Index x = 0; x < scenario.source.dim(); ++x)
        matching << ",source_x" << x;
    for (Index x = 0; x < scenario.target.dim(); ++x)
        matching << ",target_x" << x;
    matching << ",source_label,target_label,mass,correct\n";

    json results = json::array();
    bool all_converged = true;
    for (const MethodResult &r : cmp.results) {
        const std::string file = "plan_" + file_stem(r.name) + ".csv";
        write_plan_csv((dir / file).string(), r.plan.values());
        results.push_back(plan_entry(r.name, r.plan, r.accuracy, r.unshared_mass, r.wall_ms,
                                     o.timing, file));
        all_converged = all_converged && r.plan.converged();

        const Matrix &plan = r.plan.values();
        for (Index i = 0; i < plan.rows(); ++i) {
            Index j = 0;
            const double mass = plan.row(i).maxCoeff(&j);
            if (!(mass > 0.0))
                continue;
            const int ls = scenario.source_labels[static_cast<std::size_t>(i)];
            const int lt = scenario.target_labels[static_cast<std::size_t>(j)];
            matching << r.name << ',' << i << ',' << j;
            for (Index x = 0; x < scenario.source.dim(); ++x)
                matching << ',' << format_double(scenario.source.points()(i, x));
            for (Index x = 0; x < scenario.target.dim(); ++x)
                matching << ',' << format_double(scenario.target.points()(j, x));
            matching << ',' << ls << ',' << lt << ',' << format_double(mass) << ','
                     << (ls == lt ? 1 : 0) << '\n';
        }
    }

    json doc;
    doc["tool"] = "kpgot";
    doc["command"] = "toy";
    doc["config"] = config_echo(o, cfg);
    doc["scenario"] = {{"name", o.scenario},
                       {"description", scenario.description},
                       {"seed", scenario.seed},
                       {"source_points", scenario.source.count()},
                       {"target_points", scenario.target.count()},
                       {"keypoint_pairs", scenario.keypoints.size()},
                       {"mass_budget", scenario.mass_budget}};
    doc["results"] = results;

    if (o.scenario == "fig5") {
        // The target of the swapped problem holds a class the source lacks;
        // those points should receive the least mass.
        const ToyScenario swapped = swap_domains(scenario);
        const Comparison rev =
            run_comparison(swapped, {MethodSpec{Method::PARTIAL_KPG_RL, -1}}, cfg);
        std::vector<Index> labeled;
        for (const auto &pr : swapped.keypoints.pairs())
            labeled.push_back(pr.second);
        std::size_t planted = 0;
        for (int l : swapped.target_labels)
            planted += std::find(swapped.source_labels.begin(), swapped.source_labels.end(), l) ==
                       swapped.source_labels.end();
        const double eta = static_cast<double>(planted) /
                           static_cast<double>(swapped.target.count() - labeled.size());
        const auto flagged = received_mass_outliers(rev.results.front().plan, eta, labeled);
        std::size_t hits = 0;
        for (Index j : flagged) {
            const int l = swapped.target_labels[static_cast<std::size_t>(j)];
            hits += std::find(swapped.source_labels.begin(), swapped.source_labels.end(), l) ==
                    swapped.source_labels.end();
        }
        doc["outlier_detection"] = {
            {"eta", eta},
            {"planted", planted},
            {"flagged", flagged.size()},
            {"recall", planted == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(planted)}};
    }
    write_json((dir / "report.json").string(), doc);
    return all_converged ? kOk : kNotConverged;
}

} // namespace

int main(int argc, char **argv) {
    Options o;
    CLI::App app{"Keypoint-guided optimal transport"};
    app.require_subcommand(1);

    CLI::App *solve = app.add_subcommand("solve", "Solve a transport problem given as files");
    solve->add_option("--method", o.method,
                      "kp|gw|kpg-rl|kpg-rl-kp|kpg-rl-gw|partial-kpg-rl|dual-kpg-rl")
        ->required();
    solve->add_option("--source", o.source, "Source points CSV")->required();
    solve->add_option("--target", o.target, "Target points CSV")->required();
    solve->add_option("--keypoints", o.keypoints, "Keypoint pairs JSON");
    solve->add_option("--mass-budget", o.mass_budget, "Transported mass s (partial method)");
    solve->add_option("--backend", o.backend, "lp|sinkhorn")->capture_default_str();
    solve->add_option("--out", o.out, "Plan CSV to write");
    solve->add_option("--report", o.report, "Report JSON to write");

    CLI::App *toy = app.add_subcommand("toy", "Run a toy mixture comparison");
    toy->add_option("--scenario", o.scenario, "fig1|fig4|fig5|custom")->capture_default_str();
    toy->add_option("--classes", o.classes, "Classes (custom)")->capture_default_str();
    toy->add_option("--points-per-class", o.points_per_class, "Points per class (custom)")
        ->capture_default_str();
    toy->add_option("--keypoints-per-class", o.keypoints_per_class, "Keypoints per class (custom)")
        ->capture_default_str();
    toy->add_option("--methods", o.methods, "Comma-separated methods, e.g. kp,kpg-rl-kp@2");
    toy->add_option("--out-dir", o.out_dir, "Output directory")->required();

    for (CLI::App *cmd : {solve, toy}) {
        cmd->add_option("--epsilon", o.epsilon, "Entropic/quadratic regularization")
            ->capture_default_str();
        cmd->add_option("--rho", o.rho, "Relation temperature factor")->capture_default_str();
        cmd->add_option("--alpha", o.alpha, "Blend weight")->capture_default_str();
        cmd->add_option("--divergence", o.divergence, "js|kl-st|kl-ts|l1|l2|raw")
            ->capture_default_str();
        cmd->add_option("--seed", o.seed, "Seed")->capture_default_str();
        cmd->add_option("--max-iterations", o.max_iterations, "Iteration budget")
            ->capture_default_str();
        cmd->add_option("--tolerance", o.tolerance, "Convergence tolerance")->capture_default_str();
        cmd->add_flag("--timing", o.timing, "Record wall_ms in reports");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (solve->parsed())
            return cmd_solve(o);
        return cmd_toy(o);
    } catch (const Error &e) {
        std::cerr << "kpgot: " << e.what() << '\n';
        return exit_for(e);
    } catch (const std::exception &e) {
        std::cerr << "kpgot: " << e.what() << '\n';
        return kInput;
    }
}
