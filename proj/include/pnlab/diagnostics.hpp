// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Evidence extracted from solved (or analytically sampled) fields: viscosity
// and Pucci checks on fitted jets, boundary normal derivatives and their
// constancy, the boundary identity, corner quantities, moving-plane
// comparison and P-functions.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnlab/geometry.hpp"
#include "pnlab/grid_field.hpp"
#include "pnlab/operators.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::diagnostics {

using geometry::DomainSpec;
using geometry::Vec2;

/// Off-grid evaluation of a grid field. Exterior nodes within a few cells of
/// the boundary receive a smooth extension (quadratic along the normal through
/// the Dirichlet value and two interior samples) so that bicubic
/// interpolation stays accurate up to the boundary.
class FieldSampler {
public:
    FieldSampler(const GridField& field, const DomainSpec& domain, std::function<double(const Vec2&)> dirichlet);
    FieldSampler(const GridField& field, const DomainSpec& domain, const solver::ProblemSpec& problem);

    /// Bicubic where the 4x4 stencil is available, bilinear otherwise.
    /// Throws CoverageError when not even the bilinear cell is available.
    double operator()(const Vec2& x) const;
    bool covers(const Vec2& x) const;
    double boundary_value(const Vec2& y) const { return dirichlet_(y); }

    const GridField& field() const { return *field_; }
    const DomainSpec& domain() const { return domain_; }
    double h() const { return field_->grid.h; }
    /// Field values with the exterior extension applied (NaN where unset).
    const std::vector<double>& extended() const { return ext_; }

private:
    double interior_eval(const Vec2& x) const;
    bool eval(const std::vector<double>& vals, const Vec2& x, double& out) const;

    const GridField* field_;
    DomainSpec domain_;
    std::function<double(const Vec2&)> dirichlet_;
    std::vector<double> ext_;
};

// ---------------------------------------------------------------- jets

struct ViscosityConfig {
    double tau = 0.0;              // 0 selects 10 h
    double patch_radius_h = 3.0;   // least-squares patch radius in cells
    std::vector<double> deltas_h = {0.0, 1.0, 4.0};  // X +- delta I, delta in units of h
    double contact_tol = 1e-9;     // slack in "attains its patch minimum at the node"
    double grad_floor = 0.0;       // 0 selects operators::default_grad_floor(h)
};

struct ViscosityReport {
    std::vector<double> sub_violation;    // per node, max(0, F_lower) over touching-from-above tests
    std::vector<double> super_violation;  // per node, max(0, -F_upper) over touching-from-below tests
    std::vector<operators::Jet> jets;     // fitted jet per node (zero where not evaluated)
    std::vector<std::uint8_t> evaluated_mask;
    double tau = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  // patch left the grid or touched the exterior
    double worst_sub = 0.0;
    double worst_super = 0.0;
    std::size_t violating_nodes = 0;

    bool passed() const { return violating_nodes == 0; }
};

/// Least-squares quadratic fit around node k; false when the patch is incomplete.
bool fit_jet(const GridField& field, std::size_t k, double patch_radius_h, operators::Jet& jet);

ViscosityReport viscosity_check(const GridField& field, const operators::PParams& params,
                                const ViscosityConfig& config = {});

struct PucciReport {
    std::size_t evaluated = 0;
    std::size_t violations = 0;
    double worst = 0.0;           // largest violation magnitude
    double tau = 0.0;
    std::vector<std::uint8_t> flagged;  // per node

    double fraction() const { return evaluated ? static_cast<double>(violations) / static_cast<double>(evaluated) : 0.0; }
};

/// Checks M+(X) + K >= -tau and M-(X) - K <= tau on fitted Hessians.
/// tau = 0 selects 10 h.
PucciReport pucci_check(const GridField& field, const operators::PParams& params, double K, double tau = 0.0,
                        double patch_radius_h = 3.0);

// ---------------------------------------------------------------- boundary

struct NeumannTrace {
    std::vector<geometry::BoundarySample> samples;
    std::vector<double> values;  // u_nu per kept sample
    std::size_t dropped = 0;
    double spacing = 0.0;        // probe spacing t
};

/// u_nu ~ (-3 u(y) + 4 u(y - t nu) - u(y - 2 t nu)) / (-2 t), u(y) = g(y).
/// t = 0 selects 2 h.
NeumannTrace neumann_trace(const FieldSampler& sampler, int samples, double t = 0.0);

struct ConstancyScore {
    double spread = 0.0;  // (max - min) / |mean|
    double mean = 0.0;
    bool defined = false;  // false when |mean| is too small
};

/// Requires at least 8 values.
ConstancyScore constancy_score(const std::vector<double>& values);

/// Per-sample residual of (p-1)/p u_nunu + (n-1)/p kappa u_nu + f with
/// u_nunu = (u(y) - 2 u(y - t nu) + u(y - 2 t nu)) / t^2.
struct BoundaryIdentity {
    std::vector<geometry::BoundarySample> samples;
    std::vector<double> u_nu;
    std::vector<double> u_nunu;
    std::vector<double> residuals;
    std::size_t dropped = 0;

    double max_abs() const;
};

BoundaryIdentity boundary_identity(const FieldSampler& sampler, const operators::PParams& params, double rhs,
                                   int samples, double t = 0.0);

struct CornerQuantities {
    double u_nu = 0.0;
    double u_nunu = 0.0;
    double u_nutau = 0.0;
    double u_tautau = 0.0;
    double u_ss = 0.0;              // second arclength derivative of g
    double tangential_defect = 0.0;  // u_tautau - (u_ss + kappa u_nu)

    /// Second derivative along eta = alpha nu + beta tau.
    double u_etaeta(double alpha, double beta) const {
        return alpha * alpha * u_nunu + 2.0 * alpha * beta * u_nutau + beta * beta * u_tautau;
    }
};

CornerQuantities corner_quantities(const FieldSampler& sampler, const geometry::BoundarySample& at);

// ---------------------------------------------------------------- symmetry

struct MovingPlaneResult {
    Vec2 direction{};
    double offset = 0.0;  // measured from the domain center along direction
    double min_w = 0.0;
    Vec2 argmin{};
    std::size_t nodes = 0;
    bool empty = true;
};

/// For each offset lambda: min over nodes x inside the domain with
/// (x - c).e < lambda and reflect(x) inside of u(x) - u(reflect(x)).
std::vector<MovingPlaneResult> moving_plane(const FieldSampler& sampler, const Vec2& direction,
                                            const std::vector<double>& offsets);

struct SymmetryReport {
    NeumannTrace trace;
    ConstancyScore score;
    std::vector<double> component_means;
    BoundaryIdentity identity;
    std::vector<MovingPlaneResult> moving_plane;
};

SymmetryReport symmetry_report(const FieldSampler& sampler, const operators::PParams& params, double rhs,
                               int samples);

// ---------------------------------------------------------------- P-function

enum class PVariant { laplacian, infinity };

std::string to_string(PVariant v);
/// p = 2 -> laplacian, p = inf -> infinity; throws ParameterError otherwise.
PVariant p_variant(const operators::PParams& params);

struct PFunctionField {
    PVariant variant = PVariant::laplacian;
    GridField values;                 // P on unmasked nodes, 0 elsewhere
    std::vector<std::uint8_t> mask;
    ConstancyScore score;
    double min = 0.0;
    double max = 0.0;
};

/// P = |grad u|^2 + (4/n) u for p = 2 (the Weinberger function of -Delta u = 2)
/// and P = |grad u|^2 + 2u for p = inf, with central-difference gradients at
/// interior nodes whose neighbours are all inside.
PFunctionField p_function(const GridField& field, const operators::PParams& params);

/// Same with an analytic value and gradient, evaluated at non-exterior nodes.
PFunctionField p_function(const GridField& shape, const operators::PParams& params,
                          const std::function<double(const Vec2&)>& value,
                          const std::function<Vec2(const Vec2&)>& gradient);

}  // namespace pnlab::diagnostics
