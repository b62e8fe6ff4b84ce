// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Mean-value (dynamic programming) solver for
//     -Delta_p^N u = f in Omega,  u = g on dOmega
// on a uniform grid, plus a frozen-direction policy-iteration cross-check.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnlab/geometry.hpp"
#include "pnlab/grid_field.hpp"
#include "pnlab/operators.hpp"
#include "pnlab/oracles.hpp"

namespace pnlab::solver {

using geometry::DomainSpec;
using geometry::Grid;
using geometry::Vec2;

struct ProblemSpec {
    operators::PParams params{};
    double rhs = 1.0;                                // constant f
    std::function<double(const Vec2&)> dirichlet;    // g; empty means g = 0
    double dirichlet_constant = 0.0;                 // g when `dirichlet` is empty
    std::optional<double> neumann_target;            // expected c, if any

    double g(const Vec2& y) const { return dirichlet ? dirichlet(y) : dirichlet_constant; }
};

enum class Scheme { dpp, policy_iteration };
enum class BoundaryRule {
    ray,    // quadratic along the ray through the opposite point and the boundary crossing
    clamp,  // value of g at the nearest boundary point
};

std::string to_string(Scheme s);
std::string to_string(BoundaryRule r);
Scheme scheme_from_string(const std::string& s);
BoundaryRule boundary_rule_from_string(const std::string& s);

struct SolverConfig {
    double epsilon_over_h = 3.0;   // stencil radius eps = epsilon_over_h * h
    int directions = 32;           // m
    double damping = 0.0;          // omega in (0, 1]; 0 selects 1 (p >= 2) or 0.5 (p < 2)
    double tolerance = 1e-7;       // sup-norm update threshold
    int max_iterations = 200000;
    Scheme scheme = Scheme::dpp;
    BoundaryRule boundary_rule = BoundaryRule::ray;
    bool moment_matched_mean = true;  // cancel the bilinear interpolation diffusion
    // policy iteration
    int inner_sweeps = 20;
    double jacobi_damping = 0.6;
    double grad_floor = 0.0;  // 0 selects operators::default_grad_floor(h)
    // Nested iteration: solve on grids 2^L h, ..., 2h first and start from the
    // interpolated coarse solution instead of u0 = 0.
    int nested_levels = 0;

    double epsilon(double h) const { return epsilon_over_h * h; }
    double resolved_damping(double p) const;
    double resolved_grad_floor(double h) const;
    /// Throws ConfigError when eps < 2h, m < 8, tolerance <= 0, omega outside (0, 1].
    void validate() const;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct ConvergenceReport {
    std::string scheme;
    bool converged = false;
    int iterations = 0;
    double final_update = 0.0;
    double residual = 0.0;          // sup |-Delta_p^N u_h - f| over unmasked interior nodes
    double masked_fraction = 0.0;   // interior nodes masked by the gradient floor
    double wall_seconds = 0.0;
    int coarse_iterations = 0;      // sweeps spent on nested coarse levels
};

struct Solution {
    GridField field;
    ConvergenceReport report;
};

/// Precomputed mean-value operator on a fixed (domain, grid, problem, config).
class DppOperator {
public:
    DppOperator(const DomainSpec& domain, const Grid& grid, const ProblemSpec& problem, const SolverConfig& config);
    ~DppOperator();
    DppOperator(DppOperator&&) noexcept;
    DppOperator& operator=(DppOperator&&) noexcept;

    /// One undamped sweep. Exterior nodes keep their values.
    GridField apply(const GridField& field) const;
    /// out = (1 - omega) u + omega * apply(u); returns the sup-norm update.
    double step(const GridField& in, GridField& out, double omega) const;

    /// Field with zeros inside and the Dirichlet extension outside.
    GridField initial_field() const;
    const geometry::Classification& classification() const;
    const oracles::DppWeights& weights() const;
    double epsilon() const;
    double mean_radius() const;
    std::size_t regular_count() const;
    std::size_t special_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One sweep of the scheme: every node inside the domain receives
///   beta * mean + (alpha/2)(max + min) + source_coeff * eps^2 * f.
GridField dpp_sweep(const GridField& field, const DomainSpec& domain, const ProblemSpec& problem,
                    const SolverConfig& config);

/// Damped fixed-point iteration from u0 = 0 (or from the prolongated coarse
/// solution when config.nested_levels > 0).
Solution solve(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config);

/// Same iteration started from the interior values of `initial` (any grid;
/// values are bilinearly interpolated onto `grid`).
Solution solve_from(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config,
                    const GridField& initial);

/// Bilinear interpolation of `coarse` at every node of `target` whose tag is
/// not exterior; exterior nodes of `target` are left untouched.
void prolongate(const GridField& coarse, GridField& target);

struct ResidualReport {
    double sup_residual = 0.0;
    double masked_fraction = 0.0;
    std::size_t evaluated = 0;
};

/// sup over unmasked interior nodes of |-Delta_p^N u - f| (central differences).
ResidualReport residual(const GridField& field, const ProblemSpec& problem, double grad_floor);

/// Frozen-direction policy iteration: alternate between freezing
/// q = grad u / |grad u| and damped Jacobi sweeps on the linear operator
/// -(1/p) Delta u - ((p-2)/p) q^T D^2 u q = f (9-point stencil).
Solution policy_solve(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config);

/// Dispatches on config.scheme.
Solution run(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config);

/// Grid covering the domain with enough margin for the solver stencils.
Grid solver_grid(const DomainSpec& domain, double h, const SolverConfig& config);

}  // namespace pnlab::solver
