// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// pnlab: solve, diagnose, reproduce, envelope-table.
//
// Exit codes: 0 ok, 1 usage or input error, 2 solver did not converge,
// 3 a diagnostic or acceptance threshold failed.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnlab/checkpoint.hpp"
#include "pnlab/config.hpp"
#include "pnlab/diagnostics.hpp"
#include "pnlab/errors.hpp"
#include "pnlab/experiments.hpp"
#include "pnlab/parallel.hpp"
#include "pnlab/report.hpp"

namespace fs = std::filesystem;
using namespace pnlab;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNotConverged = 2;
constexpr int kThreshold = 3;

struct Common {
    std::string out;
    int threads = 1;
    std::uint64_t seed = 2026;  // reserved; deterministic paths only use it for sampled tables
};

int cmd_solve(const std::string& config_path, const Common& common) {
    const auto cfg = config::load(config_path);
    const fs::path out = common.out.empty() ? fs::path(cfg.output_dir) : fs::path(common.out);
    const auto problem = cfg.problem();
    const auto grid = solver::solver_grid(cfg.domain, cfg.h, cfg.solver);
    const auto sol = solver::run(problem, cfg.domain, grid, cfg.solver);

    checkpoint::Checkpoint ck;
    ck.field = sol.field;
    ck.domain = cfg.domain;
    ck.params = problem.params;
    ck.rhs = cfg.f;
    ck.dirichlet = cfg.g;
    ck.epsilon = cfg.solver.epsilon(cfg.h);
    ck.report = sol.report;
    checkpoint::write(out / "solution.json", ck);

    report::json j;
    j["config"] = report::json::parse(config::serialize(cfg));
    j["convergence"] = report::to_json(sol.report);
    j["checkpoint"] = (out / "solution.json").string();
    report::write_json(out / "solve_report.json", j);
    std::vector<std::uint8_t> inside(sol.field.values.size());
    for (std::size_t k = 0; k < inside.size(); ++k) inside[k] = sol.field.inside(k);
    report::write_text(out / "u.svg", report::svg_heatmap(sol.field, inside, {.title = "u"}));

    std::printf("%s: %d sweeps, final update %.3g, residual %.3g, %.2f s\n",
                sol.report.converged ? "converged" : "NOT CONVERGED", sol.report.iterations, sol.report.final_update,
                sol.report.residual, sol.report.wall_seconds);
    std::printf("wrote %s\n", (out / "solution.json").string().c_str());
    return sol.report.converged ? kOk : kNotConverged;
}

struct Verdict {
    report::json thresholds = report::json::object();
    bool passed = true;

    void add(const std::string& name, double value, const std::string& rel, double limit) {
        bool ok = false;
        if (rel == "<") ok = value < limit;
        else if (rel == ">=") ok = value >= limit;
        else if (rel == "==") ok = value == limit;
        thresholds[name] = {{"value", std::isfinite(value) ? report::json(value) : report::json(nullptr)},
                            {"relation", rel},
                            {"threshold", limit},
                            {"pass", ok}};
        std::printf("  %-34s %12.5g  %-2s %-10.4g %s\n", name.c_str(), value, rel.c_str(), limit, ok ? "PASS" : "FAIL");
        passed = passed && ok;
    }
};

int cmd_diagnose(const std::string& ck_path, const std::string& config_path, const std::vector<std::string>& select,
                 int assert_ball, const Common& common) {
    const auto ck = checkpoint::read(ck_path);
    config::RunConfig cfg;
    if (!config_path.empty()) cfg = config::load(config_path);
    auto toggles = cfg.diagnostics;
    if (!select.empty()) {
        toggles.symmetry = toggles.viscosity = toggles.pucci = toggles.boundary_identity = toggles.moving_plane =
            toggles.p_function = false;
        for (const auto& s : select) {
            if (s == "symmetry") toggles.symmetry = true;
            else if (s == "viscosity") toggles.viscosity = true;
            else if (s == "pucci") toggles.pucci = true;
            else if (s == "boundary-identity") toggles.boundary_identity = true;
            else if (s == "moving-plane") toggles.moving_plane = true;
            else if (s == "p-function") toggles.p_function = true;
            else throw ConfigError("unknown diagnostic \"" + s +
                                   "\" (symmetry, viscosity, pucci, boundary-identity, moving-plane, p-function)");
        }
    }
    if (assert_ball >= 0) toggles.assert_ball = assert_ball == 1;
    const fs::path out = common.out.empty() ? fs::path(cfg.output_dir) : fs::path(common.out);

    solver::ProblemSpec problem;
    problem.params = ck.params;
    problem.rhs = ck.rhs;
    problem.dirichlet_constant = ck.dirichlet;
    const diagnostics::FieldSampler sampler(ck.field, ck.domain, problem);
    const double h = ck.field.grid.h;

    report::json results;
    Verdict verdict;
    std::printf("diagnostics for %s (%s, p=%g, h=%g)\n", ck_path.c_str(), geometry::to_string(ck.domain.kind).c_str(),
                ck.params.p, h);

    if (toggles.symmetry) {
        const auto tr = diagnostics::neumann_trace(sampler, toggles.samples, toggles.probe_spacing_h * h);
        const auto sc = diagnostics::constancy_score(tr.values);
        report::json j = {{"samples", tr.values.size()}, {"dropped", tr.dropped}, {"score", report::to_json(sc)}};
        std::vector<double> means;
        for (int c = 0; c < ck.domain.component_count(); ++c) {
            double s = 0.0;
            int n = 0;
            for (std::size_t k = 0; k < tr.values.size(); ++k)
                if (tr.samples[k].component == c) s += tr.values[k], ++n;
            means.push_back(n ? s / n : 0.0);
        }
        j["component_means"] = means;
        results["symmetry"] = j;
        report::write_text(out / "neumann_trace.csv", report::trace_csv(tr));
        if (toggles.assert_ball) verdict.add("constancy score (ball)", sc.spread, "<", toggles.ball_threshold);
        else std::printf("  constancy score %.5g (not asserted)\n", sc.spread);
    }
    if (toggles.boundary_identity) {
        const auto bi = diagnostics::boundary_identity(sampler, ck.params, ck.rhs, toggles.samples, toggles.probe_spacing_h * h);
        results["boundary_identity"] = report::to_json(bi);
        report::write_text(out / "boundary_identity.csv", report::identity_csv(bi));
        verdict.add("boundary identity max |residual|", bi.max_abs(), "<", toggles.identity_threshold);
    }
    if (toggles.viscosity) {
        const auto vr = diagnostics::viscosity_check(ck.field, ck.params);
        results["viscosity"] = report::to_json(vr);
        verdict.add("viscosity violating nodes", static_cast<double>(vr.violating_nodes), "==", 0.0);
    }
    if (toggles.pucci) {
        const auto pr = diagnostics::pucci_check(ck.field, ck.params, std::abs(ck.rhs));
        results["pucci"] = report::to_json(pr);
        verdict.add("pucci flagged fraction", pr.fraction(), "<", toggles.pucci_fraction);
    }
    if (toggles.moving_plane) {
        const double R = ck.domain.inradius();
        std::vector<diagnostics::MovingPlaneResult> rows;
        for (int d = 0; d < 8; ++d) {
            const double a = d * 0.25 * std::numbers::pi;
            for (const auto& m : diagnostics::moving_plane(sampler, {std::cos(a), std::sin(a)},
                                                           {0.0, 0.15 * R, 0.3 * R, 0.45 * R, 0.6 * R}))
                rows.push_back(m);
        }
        double worst = 0.0;
        report::json arr = report::json::array();
        for (const auto& m : rows) {
            if (!m.empty) worst = std::min(worst, m.min_w);
            arr.push_back(report::to_json(m));
        }
        results["moving_plane"] = {{"min_w", worst}, {"planes", arr}};
        report::write_text(out / "moving_plane.csv", report::moving_plane_csv(rows));
        if (toggles.assert_ball) verdict.add("moving plane min w (ball)", worst, ">=", -1e-6);
        else std::printf("  moving plane min w %.5g (not asserted)\n", worst);
    }
    if (toggles.p_function) {
        if (ck.params.p == 2.0) {
            const auto pf = diagnostics::p_function(ck.field, ck.params);
            results["p_function"] = report::to_json(pf);
            report::write_text(out / "p_function.svg", report::svg_heatmap(pf.values, pf.mask, {.title = "P"}));
            std::printf("  P-function spread %.5g (reported)\n", pf.score.spread);
        } else {
            results["p_function"] = {{"skipped", "available for p = 2 only on solved fields"}};
            std::printf("  P-function skipped (p != 2)\n");
        }
    }

    std::vector<std::uint8_t> inside(ck.field.values.size());
    for (std::size_t k = 0; k < inside.size(); ++k) inside[k] = ck.field.inside(k);
    report::write_text(out / "u.svg", report::svg_heatmap(ck.field, inside, {.title = "u"}));
    const auto ev = operators::classical_field_eval(ck.field, ck.params, operators::default_grad_floor(h));
    GridField res = ev.values;
    for (std::size_t k = 0; k < res.values.size(); ++k)
        if (ev.mask[k]) res.values[k] = std::abs(-res.values[k] - ck.rhs);
    report::write_text(out / "residual.svg", report::svg_heatmap(res, ev.mask, {.title = "|residual|"}));

    report::json j;
    j["checkpoint"] = ck_path;
    j["results"] = results;
    j["thresholds"] = verdict.thresholds;
    j["passed"] = verdict.passed;
    report::write_json(out / "diagnostics.json", j);
    std::printf("%s; wrote %s\n", verdict.passed ? "all thresholds pass" : "THRESHOLD FAILED",
                (out / "diagnostics.json").string().c_str());
    return verdict.passed ? kOk : kThreshold;
}

std::string experiment_names() {
    std::string s;
    for (const auto& e : experiments::registry()) s += (s.empty() ? "" : ", ") + e.name;
    return s + ", all";
}

int cmd_reproduce(const std::string& name, const Common& common) {
    std::vector<const experiments::Experiment*> todo;
    if (name == "all") {
        for (const auto& e : experiments::registry()) todo.push_back(&e);
    } else if (const auto* e = experiments::find(name)) {
        todo.push_back(e);
    } else {
        std::fprintf(stderr, "unknown experiment \"%s\"; valid names: %s\n", name.c_str(), experiment_names().c_str());
        return kUsage;
    }
    experiments::Settings settings;
    settings.seed = common.seed;
    settings.log = &std::cout;
    experiments::Context ctx(settings);
    bool ok = true;
    report::json all = report::json::array();
    for (const auto* e : todo) {
        std::printf("== %s (criterion %d): %s\n", e->name.c_str(), e->criterion, e->summary.c_str());
        std::fflush(stdout);
        const auto r = e->run(ctx);
        std::printf("%s\n", r.table().c_str());
        ok = ok && r.passed();
        all.push_back(r.to_json());
    }
    if (!common.out.empty()) report::write_json(fs::path(common.out) / ("reproduce_" + name + ".json"), all);
    return ok ? kOk : kThreshold;
}

int cmd_envelope_table(int count, const Common& common) {
    const auto rows = experiments::envelope_rows(count, common.seed);
    std::string csv = "p,xx,xy,yy,lower,upper,bruteforce_lower,bruteforce_upper,sampled_lower,sampled_upper\n";
    std::printf("%8s %8s %8s %8s | %12s %12s | %10s %10s\n", "p", "xx", "xy", "yy", "F_*(0,X)", "F^*(0,X)", "diff_lo",
                "diff_hi");
    double worst = 0.0;
    for (const auto& r : rows) {
        const double dl = std::abs(r.lower - r.refined_lower), du = std::abs(r.upper - r.refined_upper);
        worst = std::max({worst, dl, du});
        std::printf("%8.4f %8.4f %8.4f %8.4f | %12.8f %12.8f | %10.2e %10.2e\n", r.p, r.xx, r.xy, r.yy, r.lower, r.upper,
                    dl, du);
        char buf[512];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.p, r.xx, r.xy,
                      r.yy, r.lower, r.upper, r.refined_lower, r.refined_upper, r.sampled_lower, r.sampled_upper);
        csv += buf;
    }
    std::printf("max |closed form - brute force| = %.3e over %d pairs (threshold 1e-6)\n", worst, count);
    if (!common.out.empty()) report::write_text(fs::path(common.out) / "envelope_table.csv", csv);
    return worst < 1e-6 ? kOk : kThreshold;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pnlab: normalized p-Laplacian solver and overdetermined-problem diagnostics"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--threads", common.threads, "worker threads")->check(CLI::Range(1, 256));
        sub->add_option("--seed", common.seed, "random seed for sampled tables");
    };

    std::string config_path;
    auto* solve = app.add_subcommand("solve", "solve the problem described by a run config");
    solve->add_option("--config", config_path, "run config (flat JSON)")->required();
    add_common(solve);

    std::string ck_path, diag_config;
    std::vector<std::string> select;
    bool ball = false, no_ball = false;
    auto* diagnose = app.add_subcommand("diagnose", "run diagnostics on a checkpoint");
    diagnose->add_option("checkpoint", ck_path, "checkpoint header (.json)")->required();
    diagnose->add_option("--config", diag_config, "run config supplying diagnostics.* settings");
    diagnose->add_option("--select", select, "symmetry, viscosity, pucci, boundary-identity, moving-plane, p-function")
        ->delimiter(',');
    diagnose->add_flag("--assert-ball", ball, "assert the ball thresholds");
    diagnose->add_flag("--no-assert-ball", no_ball, "report the constancy score without asserting it");
    add_common(diagnose);

    std::string experiment;
    auto* reproduce = app.add_subcommand("reproduce", "run one acceptance experiment (or all)");
    reproduce->add_option("experiment", experiment, experiment_names())->required();
    add_common(reproduce);

    int count = 200;
    auto* envelope = app.add_subcommand("envelope-table", "closed-form envelopes vs brute force");
    envelope->add_option("--count", count, "number of random (p, X) pairs")->check(CLI::Range(1, 100000));
    envelope->add_option("--config", config_path, "ignored; accepted for uniformity");
    add_common(envelope);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    set_thread_count(common.threads);
    try {
        if (solve->parsed()) return cmd_solve(config_path, common);
        if (diagnose->parsed()) {
            if (ball && no_ball) throw ConfigError("--assert-ball and --no-assert-ball are exclusive");
            return cmd_diagnose(ck_path, diag_config, select, ball ? 1 : (no_ball ? 0 : -1), common);
        }
        if (reproduce->parsed()) return cmd_reproduce(experiment, common);
        if (envelope->parsed()) return cmd_envelope_table(count, common);
    } catch (const pnlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}
