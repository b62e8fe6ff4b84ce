// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form reference solutions and brute-force references.
#pragma once

#include "pnlab/linalg.hpp"
#include "pnlab/operators.hpp"

namespace pnlab::oracles {

/// Radial solution of -Delta_p^N v = 1 on the ball B_R in R^n with v(R) = 0:
///     v(r) = p / (2 (p + n - 2)) (R^2 - r^2).
class RadialSolution {
public:
    RadialSolution(double p, int n, double R);

    double value(double r) const;       // v(r)
    double derivative(double r) const;  // v'(r)
    double second_derivative() const;   // v''(r), constant
    /// -(p-1)/p v'' - (n-1)/(p r) v' - 1, zero for r in (0, R].
    double ode_residual(double r) const;

    double p() const { return p_; }
    int n() const { return n_; }
    double radius() const { return R_; }

private:
    void check_radius(double r) const;
    double p_;
    int n_;
    double R_;
    double coeff_;  // p / (2 (p + n - 2))
};

/// v(r) of RadialSolution; throws DomainError for r outside [0, R].
double radial_ball(double p, int n, double R, double r);

/// Hopf constant a = R p / (p + n - 2) = |v'(R)|.
double hopf_constant(double p, int n, double R);

/// Solution of -u'' = 1 on (a, b) with u(a) = u(b) = 0 written as a shifted
/// parabola: u(r) = ((b-a)/2)^2 / 2 - (r - (a+b)/2)^2 / 2.
double infty_annulus(double a, double b, double r);
/// u'(r) of infty_annulus.
double infty_annulus_derivative(double a, double b, double r);

/// Radius (1 - n) c of the ball carrying the p = 1 overdetermined problem.
double p1_ball_radius(int n, double c);

/// Weights of the mean-value scheme
///     S[u](x) = beta * mean_{dB_eps(x)} u + (alpha/2) (max + min)
/// with S[u] - u = (eps^2/2) p/(n+p-2) Delta_p^N u + o(eps^2).
struct DppWeights {
    double alpha = 0.0;
    double beta = 1.0;
    double source_coeff = 0.5;  // multiplies eps^2 f
};

DppWeights dpp_weights(double p, int n);

struct EnvelopeSample {
    double inf = 0.0;
    double sup = 0.0;
};

/// inf/sup of F_p(a, X) over m unit directions spread uniformly (half circle
/// for n = 2 since F is even in a; a Fibonacci sphere for n = 3). m >= 64.
EnvelopeSample envelope_bruteforce(const operators::PParams& params, const linalg::SymMatrix& x, int m);

/// Same sweep followed by a golden-section polish of the winning bracket.
/// Converges to the exact inf/sup to ~1e-12 for n = 2.
EnvelopeSample envelope_bruteforce_refined(const operators::PParams& params, const linalg::SymMatrix& x, int m);

}  // namespace pnlab::oracles
