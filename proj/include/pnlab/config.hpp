// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a flat JSON object with dotted keys, e.g.
//
//   {
//     "domain.kind": "ellipse", "domain.a": 1.5, "domain.b": 1.0,
//     "problem.p": 3, "grid.h": 0.015625, "solver.tolerance": 1e-8
//   }
//
// Unknown keys and nested objects are rejected; errors name the offending line.
#pragma once

#include <optional>
#include <string>

#include "pnlab/geometry.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::config {

struct DiagnosticsToggles {
    bool symmetry = true;
    bool viscosity = false;
    bool pucci = false;
    bool boundary_identity = true;
    bool moving_plane = false;
    bool p_function = false;
    int samples = 128;              // boundary samples
    double probe_spacing_h = 2.0;   // normal-derivative probe spacing t / h
    bool assert_ball = true;        // assert the ball threshold on the constancy score
    double ball_threshold = 0.02;   // constancy score threshold
    double identity_threshold = 0.05;
    double pucci_fraction = 0.01;   // tolerated fraction of flagged nodes

    friend bool operator==(const DiagnosticsToggles&, const DiagnosticsToggles&) = default;
};

struct RunConfig {
    geometry::DomainSpec domain = geometry::DomainSpec::disk(1.0);
    double p = 2.0;
    int n = 2;
    double f = 1.0;                  // constant right-hand side
    double g = 0.0;                  // constant Dirichlet value
    std::optional<double> expected_c;  // expected Neumann constant, if any
    double h = 1.0 / 64.0;           // grid.h
    solver::SolverConfig solver;
    DiagnosticsToggles diagnostics;
    std::string output_dir = "out";

    solver::ProblemSpec problem() const;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates; throws ConfigError "<source>:<line>: <message>".
RunConfig parse(const std::string& text, const std::string& source = "config");
RunConfig load(const std::string& path);

/// Every key, in a fixed order; parse(serialize(c)) == c.
std::string serialize(const RunConfig& c);

/// Range checks shared with parse; throws ConfigError.
void validate(const RunConfig& c);

}  // namespace pnlab::config
