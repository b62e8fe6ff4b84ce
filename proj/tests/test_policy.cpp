// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>

#include "pnlab/oracles.hpp"
#include "pnlab/solver.hpp"

using namespace pnlab;
using namespace pnlab::solver;
using geometry::NodeTag;

namespace {

ProblemSpec problem(double p) {
    ProblemSpec pr;
    pr.params = {p, 2};
    return pr;
}

double sup_diff(const GridField& a, const GridField& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.grid.size(); ++k)
        if (a.tags[k] != NodeTag::exterior) e = std::max(e, std::abs(a.values[k] - b.values[k]));
    return e;
}

Solution run_both(double p, const geometry::DomainSpec& d, Solution& dpp) {
    SolverConfig c;
    c.tolerance = 1e-9;
    c.nested_levels = 2;
    const auto g = solver_grid(d, 1.0 / 64, c);
    dpp = solve(problem(p), d, g, c);
    c.scheme = Scheme::policy_iteration;
    c.tolerance = 1e-8;
    return run(problem(p), d, g, c);
}

}  // namespace

TEST_CASE("policy iteration on p = 2 matches the radial solution", "[policy]") {
    const auto d = geometry::DomainSpec::disk(1.0);
    Solution dpp;
    const auto s = run_both(2.0, d, dpp);
    CHECK(s.report.converged);
    CHECK(s.report.scheme == "policy-iteration");
    const oracles::RadialSolution v(2.0, 2, 1.0);
    double e = 0.0;
    for (std::size_t k = 0; k < s.field.grid.size(); ++k)
        if (s.field.tags[k] != NodeTag::exterior) e = std::max(e, std::abs(s.field.values[k] - v.value(std::min(1.0, norm(s.field.grid.node(k))))));
    CHECK(e <= 1e-2);
}

TEST_CASE("policy iteration and the mean-value scheme agree on the disk", "[policy]") {
    Solution dpp;
    const auto s = run_both(3.0, geometry::DomainSpec::disk(1.0), dpp);
    CHECK(s.report.converged);
    CHECK(sup_diff(s.field, dpp.field) <= 2e-2);
}

TEST_CASE("policy iteration and the mean-value scheme agree on an ellipse", "[policy]") {
    Solution dpp;
    const auto s = run_both(4.0, geometry::DomainSpec::ellipse(1.5, 1.0), dpp);
    CHECK(s.report.converged);
    CHECK(sup_diff(s.field, dpp.field) <= 3e-2);
}

TEST_CASE("policy iteration handles p below 2", "[policy]") {
    Solution dpp;
    const auto s = run_both(1.5, geometry::DomainSpec::disk(1.0), dpp);
    CHECK(s.report.converged);
    CHECK(sup_diff(s.field, dpp.field) <= 2e-2);
}
