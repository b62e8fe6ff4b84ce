// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// The normalized p-Laplacian in viscosity form,
//
//     F_p(q, X) = -((p-2)/p) <X q, q> / |q|^2 - (1/p) trace X - 1,
//
// its semicontinuous envelopes at q = 0, the Pucci extremal operators and a
// classical finite-difference evaluation on grid fields.
//
// The coefficient of the <X q, q> term is (p-2)/p, the value consistent with
// Delta_p^N = (1/p) Delta_1^N + ((p-1)/p) Delta_inf^N and with the envelope
// formulas; see README.md ("Operator conventions").
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pnlab/grid_field.hpp"
#include "pnlab/linalg.hpp"

namespace pnlab::operators {

using linalg::SymMatrix;
using linalg::VecN;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Exponent and dimension. p in (1, inf) for the solver; p = inf is accepted
/// by the operator/envelope paths as the limiting operator.
struct PParams {
    double p = 2.0;
    int n = 2;

    bool is_infinity() const { return p == kInfinity; }
    /// Throws ParameterError unless p in (1, inf) (or p = inf when allowed) and n in {2, 3}.
    void validate(bool allow_infinity = false) const;
    /// Weight 1/p of trace X (0 at p = inf).
    double trace_weight() const;
    /// Weight (p-2)/p of the normalized infinity-Laplacian (1 at p = inf).
    double direction_weight() const;
};

/// Test-function jet (gradient, Hessian).
struct Jet {
    VecN q{};
    SymMatrix X{};
};

/// Delta_p^N evaluated classically: (1/p) tr X + ((p-2)/p) <Xq,q>/|q|^2.
/// Throws DegenerateGradientError when q = 0.
double normalized_laplacian(const PParams& params, const Jet& jet);

/// F_p(q, X) for q != 0.
double F_value(const PParams& params, const Jet& jet);

struct Envelopes {
    double lower = 0.0;  // F_*(0, X)
    double upper = 0.0;  // F^*(0, X)
};

/// Closed-form lower/upper semicontinuous envelopes of F_p at q = 0.
Envelopes envelopes(const PParams& params, const SymMatrix& x);

/// F_* and F^* at an arbitrary jet: F itself when |q| > grad_floor, the
/// q = 0 envelopes otherwise.
Envelopes envelopes_at(const PParams& params, const Jet& jet, double grad_floor);

struct PucciBounds {
    double lambda = 0.0;
    double Lambda = 0.0;
};

/// lambda = min{1/p, (p-1)/p}, Lambda = max{1/p, (p-1)/p}.
PucciBounds pucci_bounds(double p);

struct PucciValues {
    double minus = 0.0;
    double plus = 0.0;
};

PucciValues pucci(const SymMatrix& x, double lambda, double Lambda);

/// Default gradient floor 0.1 sqrt(h) for classical evaluation.
double default_grad_floor(double h);

struct FieldEvaluation {
    GridField values;            // Delta_p^N u on unmasked nodes, 0 elsewhere
    std::vector<std::uint8_t> mask;  // 1 where the value is defined
    std::size_t masked_by_gradient = 0;

    std::size_t valid_count() const;
};

/// Central-difference gradient and Hessian at node (i, j). Returns false when
/// the 3x3 stencil leaves the grid or touches an exterior node.
bool central_jet(const GridField& field, int i, int j, Jet& out);

/// Delta_p^N of a grid field by central differences; nodes whose stencil is
/// incomplete or whose gradient is at or below `grad_floor` are masked.
FieldEvaluation classical_field_eval(const GridField& field, const PParams& params, double grad_floor);

}  // namespace pnlab::operators
