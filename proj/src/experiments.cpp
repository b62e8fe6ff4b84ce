// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pnlab/diagnostics.hpp"
#include "pnlab/errors.hpp"
#include "pnlab/operators.hpp"
#include "pnlab/oracles.hpp"
#include "pnlab/parallel.hpp"

namespace pnlab::experiments {

using geometry::DomainSpec;
using geometry::Vec2;
namespace dg = diagnostics;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool compare(double v, const std::string& rel, double t) {
    if (!std::isfinite(v)) return false;
    if (rel == "<") return v < t;
    if (rel == "<=") return v <= t;
    if (rel == ">") return v > t;
    if (rel == ">=") return v >= t;
    if (rel == "==") return v == t;
    throw ParameterError("unknown relation " + rel);
}

// Disk, ellipse and stadium of the symmetry family.
DomainSpec unit_disk() { return DomainSpec::disk(1.0); }
DomainSpec family_ellipse() { return DomainSpec::ellipse(1.5, 1.0); }
DomainSpec family_stadium() { return DomainSpec::stadium(0.5, 1.0); }

const std::vector<double> kRadialP = {1.5, 2.0, 3.0, 4.0};
const std::vector<int> kRadialN = {32, 64, 128};

double radial_error(const solver::Solution& s, double p) {
    const oracles::RadialSolution rs(p, 2, 1.0);
    double err = 0.0;
    const auto& f = s.field;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!f.inside(k)) continue;
        const double r = std::min(geometry::norm(f.grid.node(k)), 1.0);
        err = std::max(err, std::abs(f.values[k] - rs.value(r)));
    }
    return err;
}

double center_of(const GridField& f) {
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (geometry::norm(f.grid.node(k)) < 1e-12) return f.values[k];
    throw CoverageError("the grid has no node at the origin");
}

std::string pname(double p) { return "p=" + num(p); }

template <class F>
Result timed(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    r.name = name;
    body(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

// ---------------------------------------------------------------- Result

bool Result::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Check& Result::check(std::string name, double value, std::string relation, double threshold, std::string note) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.pass = compare(value, relation, threshold);
    c.relation = std::move(relation);
    c.threshold = threshold;
    c.note = std::move(note);
    checks.push_back(std::move(c));
    return checks.back();
}

void Result::info(std::string name, double value, std::string note) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.pass = true;
    c.note = std::move(note);
    checks.push_back(std::move(c));
}

std::string Result::table() const {
    std::size_t w = 5;
    for (const auto& c : checks) w = std::max(w, c.name.size());
    std::ostringstream s;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %12s  %-14s  %s\n", static_cast<int>(w), "check", "value", "threshold", "result");
    s << buf;
    for (const auto& c : checks) {
        const std::string thr = c.relation.empty() ? "" : c.relation + " " + num(c.threshold);
        const std::string res = c.relation.empty() ? "info" : (c.pass ? "PASS" : "FAIL");
        std::snprintf(buf, sizeof buf, "%-*s  %12.5g  %-14s  %s%s%s\n", static_cast<int>(w), c.name.c_str(), c.value,
                      thr.c_str(), res.c_str(), c.note.empty() ? "" : "  ", c.note.c_str());
        s << buf;
    }
    std::snprintf(buf, sizeof buf, "%s: %s (%.1f s)\n", name.c_str(), passed() ? "PASS" : "FAIL", seconds);
    s << buf;
    return s.str();
}

nlohmann::json Result::to_json() const {
    nlohmann::json j;
    j["experiment"] = name;
    j["passed"] = passed();
    j["seconds"] = seconds;
    auto& arr = j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json row = {{"name", c.name}, {"pass", c.pass}};
        row["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
        if (!c.relation.empty()) {
            row["relation"] = c.relation;
            row["threshold"] = c.threshold;
        }
        if (!c.note.empty()) row["note"] = c.note;
        arr.push_back(row);
    }
    return j;
}

// ---------------------------------------------------------------- Context

Context::Context(Settings settings) : settings_(settings) {}

void Context::log(const std::string& line) const {
    if (settings_.log) *settings_.log << line << std::endl;
}

const solver::Solution& Context::solve(const DomainSpec& domain, double p, double h, double tolerance) {
    char key[256];
    std::snprintf(key, sizeof key, "%s/%.17g/%.17g/%.17g/%.17g/%.17g", geometry::to_string(domain.kind).c_str(), domain.a,
                  domain.b, p, h, tolerance);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    solver::ProblemSpec pr;
    pr.params = {p, 2};
    solver::SolverConfig cfg;
    cfg.tolerance = tolerance;
    cfg.nested_levels = settings_.nested_levels;
    const auto grid = solver::solver_grid(domain, h, cfg);
    auto sol = std::make_unique<solver::Solution>(solver::run(pr, domain, grid, cfg));
    char line[256];
    std::snprintf(line, sizeof line, "  solved %s p=%g h=1/%g: %d sweeps (+%d coarse), %.1f s%s",
                  geometry::to_string(domain.kind).c_str(), p, 1.0 / h, sol->report.iterations,
                  sol->report.coarse_iterations, sol->report.wall_seconds, sol->report.converged ? "" : " NOT CONVERGED");
    log(line);
    return *cache_.emplace(key, std::move(sol)).first->second;
}

// ---------------------------------------------------------------- experiments

Result radial_convergence(Context& ctx) {
    return timed("radial-convergence", [&](Result& r) {
        for (double p : kRadialP) {
            std::vector<double> errs;
            for (int N : kRadialN) {
                const auto& s = ctx.solve(unit_disk(), p, 1.0 / N, ctx.settings().accurate_tolerance);
                const double e = radial_error(s, p);
                errs.push_back(e);
                const std::string tag = pname(p) + " h=1/" + std::to_string(N);
                if (!s.report.converged) r.check(tag + " converged", 0.0, "==", 1.0);
                r.check(tag + " runtime [s]", s.report.wall_seconds, "<=", 60.0);
                if (N == kRadialN.back()) r.check(tag + " sup error", e, "<=", 0.02);
                else r.info(tag + " sup error", e);
            }
            for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
                const double order = std::log2(errs[k] / errs[k + 1]);
                r.check(pname(p) + " order 1/" + std::to_string(kRadialN[k]) + "->1/" + std::to_string(kRadialN[k + 1]),
                        order, ">=", 0.8);
            }
        }
    });
}

Result center_value(Context& ctx) {
    return timed("center-value", [&](Result& r) {
        for (double p : kRadialP) {
            const auto& s = ctx.solve(unit_disk(), p, 1.0 / 128, ctx.settings().accurate_tolerance);
            const double exact = oracles::radial_ball(p, 2, 1.0, 0.0);
            r.check(pname(p) + " |u(0) - p/(2(p+n-2))|", std::abs(center_of(s.field) - exact), "<=", 0.01,
                    "u(0)=" + num(center_of(s.field)));
        }
    });
}

Result hopf(Context& ctx) {
    return timed("hopf", [&](Result& r) {
        for (double p : kRadialP) {
            const auto& s = ctx.solve(unit_disk(), p, 1.0 / 128, ctx.settings().accurate_tolerance);
            solver::ProblemSpec pr;
            pr.params = {p, 2};
            const dg::FieldSampler sampler(s.field, unit_disk(), pr);
            const auto tr = dg::neumann_trace(sampler, 128);
            const auto sc = dg::constancy_score(tr.values);
            const double target = -oracles::hopf_constant(p, 2, 1.0);
            r.check(pname(p) + " |mean u_nu + Rp/(p+n-2)|", std::abs(sc.mean - target), "<=", 0.02,
                    "mean=" + num(sc.mean));
        }
    });
}

std::vector<EnvelopeRow> envelope_rows(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> low(1.05, 2.0), high(2.0, 8.0), entry(-2.0, 2.0);
    std::vector<EnvelopeRow> rows;
    for (int k = 0; k < count; ++k) {
        EnvelopeRow row;
        row.p = k % 2 == 0 ? low(rng) : high(rng);
        row.xx = entry(rng);
        row.xy = entry(rng);
        row.yy = entry(rng);
        rows.push_back(row);
    }
    parallel_for(0, count, [&](int k) {
        auto& row = rows[static_cast<std::size_t>(k)];
        const operators::PParams params{row.p, 2};
        const auto X = linalg::SymMatrix::from_2x2(row.xx, row.xy, row.yy);
        const auto env = operators::envelopes(params, X);
        row.lower = env.lower;
        row.upper = env.upper;
        const auto s = oracles::envelope_bruteforce(params, X, 720);
        row.sampled_lower = s.inf;
        row.sampled_upper = s.sup;
        const auto f = oracles::envelope_bruteforce_refined(params, X, 720);
        row.refined_lower = f.inf;
        row.refined_upper = f.sup;
    });
    return rows;
}

Result envelope_table(Context& ctx) {
    return timed("envelope-table", [&](Result& r) {
        const auto rows = envelope_rows(200, ctx.settings().seed);
        double refined = 0.0, sampled = 0.0, refined_low = 0.0, refined_high = 0.0;
        for (const auto& row : rows) {
            const double d = std::max(std::abs(row.lower - row.refined_lower), std::abs(row.upper - row.refined_upper));
            refined = std::max(refined, d);
            (row.p < 2.0 ? refined_low : refined_high) = std::max(row.p < 2.0 ? refined_low : refined_high, d);
            sampled = std::max(sampled, std::max(std::abs(row.lower - row.sampled_lower), std::abs(row.upper - row.sampled_upper)));
        }
        r.check("max |closed form - brute force|, p < 2", refined_low, "<", 1e-6, "720 directions + polish");
        r.check("max |closed form - brute force|, p >= 2", refined_high, "<", 1e-6, "720 directions + polish");
        r.info("max |closed form - raw 720-direction sample|", sampled, "angular sampling error");
        r.check("pairs", static_cast<double>(rows.size()), "==", 200.0);
    });
}

Result pucci_sandwich(Context& ctx) {
    return timed("pucci-sandwich", [&](Result& r) {
        std::mt19937_64 rng(ctx.settings().seed + 1);
        std::uniform_real_distribution<double> pd(1.05, 8.0), entry(-3.0, 3.0), angle(0.0, 2.0 * std::numbers::pi);
        std::uniform_real_distribution<double> mag(1e-3, 10.0);
        int violations = 0;
        double worst = 0.0;
        const int trials = 10000;
        for (int k = 0; k < trials; ++k) {
            const double p = pd(rng);
            const auto X = linalg::SymMatrix::from_2x2(entry(rng), entry(rng), entry(rng));
            const double th = angle(rng), m = mag(rng);
            operators::Jet jet;
            jet.q.n = 2;
            jet.q[0] = m * std::cos(th);
            jet.q[1] = m * std::sin(th);
            jet.X = X;
            const double F = operators::F_value({p, 2}, jet);
            const auto b = operators::pucci_bounds(p);
            const auto pv = operators::pucci(X, b.lambda, b.Lambda);
            const double lo = -pv.plus - 1.0, hi = -pv.minus - 1.0;
            const double slack = 1e-12 * (1.0 + std::abs(F));
            const double v = std::max(lo - F, F - hi);
            worst = std::max(worst, v);
            if (v > slack) ++violations;
        }
        r.check("violations of -M+(X)-1 <= F <= -M-(X)-1", violations, "==", 0.0, std::to_string(trials) + " samples");
        r.info("largest signed excess", worst, "negative means strictly inside");
    });
}

Result symmetry_family(Context& ctx) {
    return timed("symmetry-family", [&](Result& r) {
        const double h = 1.0 / 128, p = 3.0, tol = ctx.settings().symmetry_tolerance;
        solver::ProblemSpec pr;
        pr.params = {p, 2};
        auto score = [&](const DomainSpec& d) {
            const auto& s = ctx.solve(d, p, h, tol);
            const dg::FieldSampler sampler(s.field, d, pr);
            return dg::constancy_score(dg::neumann_trace(sampler, 128).values).spread;
        };
        const double disk = score(unit_disk());
        const double ellipse = score(family_ellipse());
        const double stadium = score(family_stadium());
        r.check("disk score", disk, "<", 0.02);
        r.check("ellipse 1.5:1 score / disk score", ellipse / disk, ">", 2.5, "score=" + num(ellipse));
        r.check("stadium (0.5, 1) score / disk score", stadium / disk, ">", 2.5, "score=" + num(stadium));
    });
}

Result annulus_infinity(Context&) {
    return timed("annulus-infinity", [&](Result& r) {
        const double a = 1.0, b = 2.0, h = 1.0 / 64;
        const auto dom = DomainSpec::annulus(a, b);
        const auto grid = geometry::Grid::covering(dom, h, 8.0 * h);
        const auto cls = geometry::classify_grid(dom, grid, 3.0 * h);
        auto value = [&](const Vec2& x) { return oracles::infty_annulus(a, b, std::clamp(geometry::norm(x), a, b)); };
        auto gradient = [&](const Vec2& x) {
            const double rr = geometry::norm(x);
            const double d = oracles::infty_annulus_derivative(a, b, std::clamp(rr, a, b));
            return Vec2{d * x.x / rr, d * x.y / rr};
        };
        const auto field = GridField::sample(grid, cls, value, [](const Vec2&) { return 0.0; });
        const operators::PParams inf{operators::kInfinity, 2};
        const auto vinf = dg::viscosity_check(field, inf);
        r.check("p=inf viscosity violating nodes", static_cast<double>(vinf.violating_nodes), "==", 0.0,
                std::to_string(vinf.evaluated) + " nodes checked");
        const auto pf = dg::p_function(field, inf, value, gradient);
        r.check("P = |grad u|^2 + 2u spread (max - min)", pf.max - pf.min, "<", 1e-12, "P=" + num(pf.min));
        const double inner = std::abs(oracles::infty_annulus_derivative(a, b, a));
        const double outer = std::abs(oracles::infty_annulus_derivative(a, b, b));
        r.check("|u_nu| inner - (b-a)/2", std::abs(inner - 0.5 * (b - a)), "==", 0.0);
        r.check("|u_nu| outer - (b-a)/2", std::abs(outer - 0.5 * (b - a)), "==", 0.0);
        const dg::FieldSampler sampler(field, dom, [](const Vec2&) { return 0.0; });
        const auto rep = dg::symmetry_report(sampler, inf, 1.0, 128);
        r.check("sampled inner |u_nu| - 0.5", std::abs(std::abs(rep.component_means[1]) - 0.5), "<=", 5e-3);
        r.check("sampled outer |u_nu| - 0.5", std::abs(std::abs(rep.component_means[0]) - 0.5), "<=", 5e-3);
        const auto v2 = dg::viscosity_check(field, {2.0, 2});
        r.check("p=2 worst viscosity violation", std::max(v2.worst_sub, v2.worst_super), ">=", 0.2);
    });
}

Result comparison(Context& ctx) {
    return timed("comparison", [&](Result& r) {
        const double h = 1.0 / 32, p = 3.0;
        const auto dom = unit_disk();
        std::mt19937_64 rng(ctx.settings().seed + 2);
        std::uniform_real_distribution<double> coef(-0.5, 0.5), lift(0.0, 0.5), phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_int_distribution<int> freq(1, 4);
        solver::SolverConfig cfg;
        cfg.tolerance = 1e-11;
        cfg.nested_levels = 1;
        const auto grid = solver::solver_grid(dom, h, cfg);
        int failures = 0, unconverged = 0;
        double worst = std::numeric_limits<double>::infinity();
        const int pairs = 50;
        for (int k = 0; k < pairs; ++k) {
            std::array<double, 7> c{};
            for (auto& v : c) v = coef(rng);
            const double amp = lift(rng), ph = phase(rng);
            const int m = freq(rng);
            auto g1 = [c](const Vec2& y) {
                const double t = std::atan2(y.y, y.x);
                return c[0] + c[1] * std::cos(t) + c[2] * std::sin(t) + c[3] * std::cos(2 * t) + c[4] * std::sin(2 * t) +
                       c[5] * std::cos(3 * t) + c[6] * std::sin(3 * t);
            };
            auto g2 = [g1, amp, ph, m](const Vec2& y) {
                const double t = std::atan2(y.y, y.x);
                return g1(y) + amp * 0.5 * (1.0 + std::cos(m * (t - ph)));
            };
            solver::ProblemSpec lo, hi;
            lo.params = hi.params = {p, 2};
            lo.dirichlet = g1;
            hi.dirichlet = g2;
            const auto s1 = solver::run(lo, dom, grid, cfg);
            const auto s2 = solver::run(hi, dom, grid, cfg);
            if (!s1.report.converged || !s2.report.converged) ++unconverged;
            double gap = std::numeric_limits<double>::infinity();
            for (std::size_t n = 0; n < grid.size(); ++n) gap = std::min(gap, s2.field.values[n] - s1.field.values[n]);
            worst = std::min(worst, gap);
            if (gap < -1e-8) ++failures;
        }
        r.check("pairs with min(u_hi - u_lo) < -1e-8", failures, "==", 0.0, std::to_string(pairs) + " pairs, p=3, h=1/32");
        r.check("unconverged solves", unconverged, "==", 0.0);
        r.info("smallest min(u_hi - u_lo)", worst);
    });
}

Result moving_plane(Context& ctx) {
    return timed("moving-plane", [&](Result& r) {
        const double h = 1.0 / 128, p = 3.0, tol = ctx.settings().symmetry_tolerance;
        solver::ProblemSpec pr;
        pr.params = {p, 2};
        const std::vector<double> offsets = {0.0, 0.15, 0.3, 0.45, 0.6};
        {
            const auto& s = ctx.solve(unit_disk(), p, h, tol);
            const dg::FieldSampler sampler(s.field, unit_disk(), pr);
            double worst = std::numeric_limits<double>::infinity();
            double worst_off = std::numeric_limits<double>::infinity();
            for (int d = 0; d < 16; ++d) {
                const double a = d * std::numbers::pi / 8.0;
                for (const auto& m : dg::moving_plane(sampler, {std::cos(a), std::sin(a)}, offsets)) {
                    if (m.empty) continue;
                    (d % 2 == 0 ? worst : worst_off) = std::min(d % 2 == 0 ? worst : worst_off, m.min_w);
                }
            }
            r.check("disk min w, 8 directions x 5 offsets", worst, ">=", -1e-6, "directions k pi/4");
            r.info("disk min w, directions (2k+1) pi/8", worst_off, "reflections off the grid lattice");
        }
        {
            const auto& s = ctx.solve(family_ellipse(), p, h, tol);
            const dg::FieldSampler sampler(s.field, family_ellipse(), pr);
            r.check("ellipse min w, e1, offset 0", dg::moving_plane(sampler, {1.0, 0.0}, {0.0})[0].min_w, ">=", -1e-6);
            r.check("ellipse min w, 45 deg, offset 0", dg::moving_plane(sampler, {1.0, 1.0}, {0.0})[0].min_w, "<", -0.01);
        }
    });
}

Result boundary_identity(Context& ctx) {
    return timed("boundary-identity", [&](Result& r) {
        const double h = 1.0 / 128;
        auto run = [&](const DomainSpec& d, double p, double tol, const std::string& label) {
            const auto& s = ctx.solve(d, p, h, tol);
            solver::ProblemSpec pr;
            pr.params = {p, 2};
            const dg::FieldSampler sampler(s.field, d, pr);
            r.check(label + " max |residual|", dg::boundary_identity(sampler, pr.params, 1.0, 128).max_abs(), "<", 0.05);
        };
        run(unit_disk(), 3.0, ctx.settings().symmetry_tolerance, "disk p=3");
        run(unit_disk(), 4.0, ctx.settings().accurate_tolerance, "disk p=4");
        run(family_ellipse(), 3.0, ctx.settings().symmetry_tolerance, "ellipse p=3");
    });
}

const std::vector<Experiment>& registry() {
    static const std::vector<Experiment> list = {
        {"radial-convergence", 1, "disk error vs the radial solution, p in {1.5,2,3,4}, h in {1/32,1/64,1/128}", radial_convergence},
        {"center-value", 2, "u(0) = p/(2(p+n-2)) at h=1/128", center_value},
        {"hopf", 3, "mean boundary u_nu on the disk = -Rp/(p+n-2)", hopf},
        {"envelope-table", 4, "closed-form envelopes vs 720-direction brute force", envelope_table},
        {"pucci-sandwich", 5, "-M+(X)-1 <= F(q,X) <= -M-(X)-1 on random jets", pucci_sandwich},
        {"symmetry-family", 6, "Neumann constancy: disk vs ellipse and stadium", symmetry_family},
        {"annulus-infinity", 7, "p=inf annulus: viscosity, P-function, Neumann values", annulus_infinity},
        {"comparison", 8, "ordered boundary data give ordered solutions", comparison},
        {"moving-plane", 9, "reflection comparison on disk and ellipse", moving_plane},
        {"boundary-identity", 10, "(p-1)/p u_nunu + (n-1)/p k u_nu + 1 = 0 on the boundary", boundary_identity},
    };
    return list;
}

const Experiment* find(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace pnlab::experiments
