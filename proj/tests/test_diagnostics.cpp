// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pnlab/diagnostics.hpp"
#include "pnlab/errors.hpp"
#include "pnlab/oracles.hpp"
#include "pnlab/solver.hpp"

using namespace pnlab;
using namespace pnlab::diagnostics;
using geometry::NodeTag;
using Catch::Matchers::WithinAbs;

namespace {

const auto zero = [](const Vec2&) { return 0.0; };

GridField radial_field(double p, double h) {
    const auto d = DomainSpec::disk(1.0);
    const auto g = geometry::Grid::covering(d, h, 8 * h);
    const auto cls = geometry::classify_grid(d, g, 3 * h);
    const oracles::RadialSolution v(p, 2, 1.0);
    return GridField::sample(g, cls, [v](const Vec2& x) { return v.value(std::min(1.0, norm(x))); }, zero);
}

GridField annulus_field(double h) {
    const auto d = DomainSpec::annulus(1.0, 2.0);
    const auto g = geometry::Grid::covering(d, h, 8 * h);
    const auto cls = geometry::classify_grid(d, g, 3 * h);
    return GridField::sample(g, cls, [](const Vec2& x) { return oracles::infty_annulus(1, 2, std::clamp(norm(x), 1.0, 2.0)); },
                             zero);
}

struct Solved {
    DomainSpec domain;
    solver::ProblemSpec problem;
    solver::Solution sol;
};

Solved solved(const DomainSpec& d, double p, int n) {
    solver::SolverConfig c;
    c.tolerance = 1e-9;
    c.nested_levels = 2;
    solver::ProblemSpec pr;
    pr.params = {p, 2};
    auto s = solver::solve(pr, d, solver::solver_grid(d, 1.0 / n, c), c);
    REQUIRE(s.report.converged);
    return {d, pr, std::move(s)};
}

const Solved& disk2() {
    static const Solved s = solved(DomainSpec::disk(1.0), 2.0, 64);
    return s;
}
const Solved& ellipse2() {
    static const Solved s = solved(DomainSpec::ellipse(1.5, 1.0), 2.0, 64);
    return s;
}

}  // namespace

TEST_CASE("sampler reproduces cubic fields up to the boundary", "[diagnostics]") {
    const auto d = DomainSpec::disk(1.0);
    const double h = 1.0 / 32;
    const auto g = geometry::Grid::covering(d, h, 8 * h);
    const auto cls = geometry::classify_grid(d, g, 3 * h);
    auto f = [](const Vec2& x) { return 0.3 + x.x - 2 * x.y + x.x * x.y + 0.5 * x.y * x.y; };
    const auto field = GridField::sample(g, cls, f, f);
    const FieldSampler s(field, d, f);
    for (int k = 0; k < 200; ++k) {
        const double t = 0.1 * k, r = 0.999 * std::sqrt((k % 17) / 16.0);
        const Vec2 x{r * std::cos(t), r * std::sin(t)};
        CHECK_THAT(s(x), WithinAbs(f(x), 1e-10));
    }
    CHECK_FALSE(s.covers({5, 5}));
    CHECK_THROWS_AS(s({5, 5}), CoverageError);
}

TEST_CASE("viscosity check on the exact radial solution", "[diagnostics]") {
    const auto f = radial_field(3.0, 1.0 / 64);
    const auto rep = viscosity_check(f, {3.0, 2});
    CHECK(rep.evaluated > 5000);
    CHECK(rep.violating_nodes == 0);
    CHECK(rep.passed());
    CHECK(rep.tau == 10.0 / 64);
    CHECK(rep.skipped > 0);
    for (double v : rep.sub_violation) CHECK(v >= 0.0);
}

TEST_CASE("viscosity check on the infinity annulus profile", "[diagnostics]") {
    const auto f = annulus_field(1.0 / 64);
    const auto inf = viscosity_check(f, {operators::kInfinity, 2});
    CHECK(inf.violating_nodes == 0);
    // Nodes on the critical circle r = 3/2 are among the evaluated ones.
    std::size_t critical = 0;
    for (std::size_t k = 0; k < f.grid.size(); ++k)
        if (inf.evaluated_mask[k] && std::abs(norm(f.grid.node(k)) - 1.5) < 0.5 / 64) ++critical;
    CHECK(critical > 20);
    const auto two = viscosity_check(f, {2.0, 2});
    CHECK(std::max(two.worst_sub, two.worst_super) >= 0.2);
    CHECK(two.violating_nodes > 0);
}

TEST_CASE("jet fit is exact on quadratics", "[diagnostics]") {
    const geometry::Grid g{{-1, -1}, 0.05, 41, 41};
    const auto f = GridField::sample_everywhere(g, [](const Vec2& x) { return 1 + 2 * x.x - x.y + 0.5 * x.x * x.x + 3 * x.x * x.y - x.y * x.y; });
    operators::Jet j;
    const auto k = g.index(24, 18);
    REQUIRE(fit_jet(f, k, 3.0, j));
    const Vec2 x = g.node(k);
    CHECK_THAT(j.q[0], WithinAbs(2 + x.x + 3 * x.y, 1e-10));
    CHECK_THAT(j.q[1], WithinAbs(-1 + 3 * x.x - 2 * x.y, 1e-10));
    CHECK_THAT(j.X(0, 0), WithinAbs(1.0, 1e-9));
    CHECK_THAT(j.X(0, 1), WithinAbs(3.0, 1e-9));
    CHECK_THAT(j.X(1, 1), WithinAbs(-2.0, 1e-9));
    CHECK_FALSE(fit_jet(f, g.index(1, 1), 3.0, j));
}

TEST_CASE("Pucci inequalities", "[diagnostics]") {
    const auto f = radial_field(4.0, 1.0 / 64);
    const auto ok = pucci_check(f, {4.0, 2}, 1.0);
    CHECK(ok.evaluated > 5000);
    CHECK(ok.violations == 0);
    const auto bad = pucci_check(f, {4.0, 2}, 0.0);
    CHECK(bad.violations > 0);
    const auto& s = disk2();
    const auto solved_rep = pucci_check(s.sol.field, {2.0, 2}, 1.0);
    CHECK(solved_rep.fraction() < 0.01);
}

TEST_CASE("Pucci flags only nodes that the viscosity check also doubts", "[diagnostics][property]") {
    // With the same fitted jets and tau, a node passing the viscosity test
    // cannot fail the Pucci test: F sits between -M+ - 1 and -M- - 1.
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const auto s = solved(DomainSpec::disk(1.0), p, 32);
        const auto v = viscosity_check(s.sol.field, s.problem.params);
        const auto pc = pucci_check(s.sol.field, s.problem.params, 1.0, v.tau);
        std::size_t bad = 0;
        for (std::size_t k = 0; k < v.evaluated_mask.size(); ++k)
            if (v.evaluated_mask[k] && v.sub_violation[k] == 0.0 && v.super_violation[k] == 0.0 && pc.flagged[k]) ++bad;
        CHECK(bad == 0);
    }
}

TEST_CASE("Neumann traces of exact fields", "[diagnostics]") {
    const auto d = DomainSpec::disk(1.0);
    const auto f = radial_field(2.0, 1.0 / 64);
    const FieldSampler s(f, d, zero);
    const auto tr = neumann_trace(s, 128);
    CHECK(tr.values.size() == 128);
    CHECK(tr.spacing == 2.0 / 64);
    for (double v : tr.values) CHECK_THAT(v, WithinAbs(-1.0, 5e-3));

    const auto ann = annulus_field(1.0 / 64);
    const FieldSampler sa(ann, DomainSpec::annulus(1.0, 2.0), zero);
    const auto ta = neumann_trace(sa, 192);
    for (double v : ta.values) CHECK_THAT(std::abs(v), WithinAbs(0.5, 5e-3));

    const auto g = geometry::Grid::covering(d, 1.0 / 32, 0.25);
    const auto cls = geometry::classify_grid(d, g, 3.0 / 32);
    auto lin = [](const Vec2& x) { return x.x; };
    const auto fl = GridField::sample(g, cls, lin, lin);
    const FieldSampler sl(fl, d, lin);
    const auto tl = neumann_trace(sl, 64);
    for (std::size_t k = 0; k < tl.values.size(); ++k) CHECK_THAT(tl.values[k], WithinAbs(tl.samples[k].normal.x, 1e-10));
}

TEST_CASE("constancy score", "[diagnostics]") {
    const auto sc = constancy_score(std::vector<double>(10, -0.7));
    CHECK(sc.defined);
    CHECK(sc.spread == 0.0);
    CHECK_THAT(sc.mean, WithinAbs(-0.7, 1e-15));
    const auto sp = constancy_score({-1, -1, -1, -1, -1, -1, -1.2, -0.8});
    CHECK_THAT(sp.spread, WithinAbs(0.4, 1e-15));
    CHECK_FALSE(constancy_score({-1, 1, -1, 1, -1, 1, -1, 1}).defined);
    CHECK_THROWS_AS(constancy_score({1, 2, 3}), ParameterError);
}

TEST_CASE("boundary identity on exact radial solutions", "[diagnostics]") {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const oracles::RadialSolution v(p, 2, 1.0);
        // Closed-form cancellation at r = R.
        const double closed = (p - 1) / p * v.second_derivative() + 1.0 / p * v.derivative(1.0) + 1.0;
        CHECK_THAT(closed, WithinAbs(0.0, 1e-14));
        const auto f = radial_field(p, 1.0 / 32);
        const FieldSampler s(f, DomainSpec::disk(1.0), zero);
        const auto bi = boundary_identity(s, {p, 2}, 1.0, 64);
        CHECK(bi.max_abs() < 1e-9);
    }
}

TEST_CASE("boundary identity on solved fields", "[diagnostics]") {
    const auto& e = ellipse2();
    const FieldSampler s(e.sol.field, e.domain, e.problem);
    CHECK(boundary_identity(s, e.problem.params, 1.0, 128).max_abs() < 0.05);
    const auto& dk = disk2();
    const FieldSampler sd(dk.sol.field, dk.domain, dk.problem);
    CHECK(boundary_identity(sd, dk.problem.params, 1.0, 128).max_abs() < 0.05);
}

TEST_CASE("corner quantities on the radial solution", "[diagnostics]") {
    for (double p : {2.0, 3.0}) {
        const auto f = radial_field(p, 1.0 / 64);
        const auto d = DomainSpec::disk(1.0);
        const FieldSampler s(f, d, zero);
        for (const auto& b : geometry::boundary_probe(d, 16)) {
            const auto cq = corner_quantities(s, b);
            CHECK_THAT(cq.u_nutau, WithinAbs(0.0, 1e-8));
            CHECK_THAT(cq.u_tautau, WithinAbs(-p / p, 1e-8));
            CHECK_THAT(cq.u_tautau, WithinAbs(b.curvature * cq.u_nu, 1e-6));
            CHECK_THAT(cq.u_ss, WithinAbs(0.0, 1e-12));
            CHECK_THAT(cq.tangential_defect, WithinAbs(0.0, 1e-6));
            CHECK(cq.u_etaeta(1, 0) == cq.u_nunu);
            CHECK(cq.u_etaeta(0, 1) == cq.u_tautau);
        }
    }
}

TEST_CASE("moving plane on the disk and the ellipse", "[diagnostics]") {
    const auto f = radial_field(3.0, 1.0 / 32);
    const FieldSampler s(f, DomainSpec::disk(1.0), zero);
    for (double a : {0.0, 0.5, 1.1}) {
        const auto mp = moving_plane(s, {std::cos(a), std::sin(a)}, {0.0});
        REQUIRE(mp.size() == 1);
        CHECK_FALSE(mp[0].empty);
        CHECK(std::abs(mp[0].min_w) < 1e-12);
    }
    const auto& dk = disk2();
    const FieldSampler sd(dk.sol.field, dk.domain, dk.problem);
    for (const auto& r : moving_plane(sd, {1, 0}, {0.0, 0.3}))
        CHECK(r.min_w >= -1e-6);
    const auto& e = ellipse2();
    const FieldSampler se(e.sol.field, e.domain, e.problem);
    CHECK(moving_plane(se, {1, 0}, {0.0})[0].min_w >= -1e-6);
    const double c = std::numbers::sqrt2 / 2;
    CHECK(moving_plane(se, {c, c}, {0.0})[0].min_w < -0.01);
    // A plane beyond the domain leaves an empty cap.
    CHECK(moving_plane(se, {1, 0}, {-5.0})[0].empty);
}

TEST_CASE("P-functions", "[diagnostics]") {
    const auto f = radial_field(2.0, 1.0 / 32);
    const auto pf = p_function(f, {2.0, 2});
    CHECK(pf.variant == PVariant::laplacian);
    CHECK_THAT(pf.min, WithinAbs(1.0, 1e-10));
    CHECK_THAT(pf.max, WithinAbs(1.0, 1e-10));
    const auto ann = annulus_field(1.0 / 64);
    const operators::PParams inf{operators::kInfinity, 2};
    auto value = [](const Vec2& x) { return oracles::infty_annulus(1, 2, std::clamp(norm(x), 1.0, 2.0)); };
    auto gradient = [](const Vec2& x) {
        const double d = oracles::infty_annulus_derivative(1, 2, std::clamp(norm(x), 1.0, 2.0)) / norm(x);
        return Vec2{d * x.x, d * x.y};
    };
    const auto pa = p_function(ann, inf, value, gradient);
    CHECK(pa.variant == PVariant::infinity);
    CHECK(pa.max - pa.min < 1e-12);
    CHECK_THAT(pa.min, WithinAbs(0.25, 1e-14));
    // Central differences: O(h^2) away from 0.25.
    const auto pg = p_function(ann, inf);
    CHECK_THAT(pg.min, WithinAbs(0.25, 5e-4));
    CHECK_THAT(pg.max, WithinAbs(0.25, 5e-4));
    const auto& e = ellipse2();
    const auto pe = p_function(e.sol.field, {2.0, 2});
    CHECK(pe.score.spread > 0.01);
    CHECK_THROWS_AS(p_function(f, {3.0, 2}), ParameterError);
}

TEST_CASE("symmetry report separates the disk from the ellipse", "[diagnostics]") {
    const auto& dk = disk2();
    const auto& e = ellipse2();
    const auto rd = symmetry_report(FieldSampler(dk.sol.field, dk.domain, dk.problem), dk.problem.params, 1.0, 128);
    const auto re = symmetry_report(FieldSampler(e.sol.field, e.domain, e.problem), e.problem.params, 1.0, 128);
    CHECK(rd.score.spread < 0.02);
    CHECK(re.score.spread > 0.05);
    CHECK(re.score.spread / rd.score.spread > 2.5);
    REQUIRE(rd.component_means.size() == 1);
    CHECK_THAT(rd.component_means[0], WithinAbs(-1.0, 5e-3));
}

TEST_CASE("diagnostics are deterministic", "[diagnostics][property]") {
    const auto& e = ellipse2();
    const FieldSampler s(e.sol.field, e.domain, e.problem);
    const auto a = symmetry_report(s, e.problem.params, 1.0, 64);
    const auto b = symmetry_report(s, e.problem.params, 1.0, 64);
    CHECK(a.trace.values == b.trace.values);
    CHECK(a.identity.residuals == b.identity.residuals);
    const auto va = viscosity_check(e.sol.field, e.problem.params);
    const auto vb = viscosity_check(e.sol.field, e.problem.params);
    CHECK(va.sub_violation == vb.sub_violation);
    CHECK(va.super_violation == vb.super_violation);
}
