// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pnlab/errors.hpp"

namespace pnlab::oracles {

using linalg::SymMatrix;
using linalg::VecN;
using operators::Jet;
using operators::PParams;

namespace {

void check_pn(double p, int n) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("p must lie in (1, inf)");
    if (n < 2) throw ParameterError("dimension n must be at least 2");
}

double f_dir(const PParams& params, const SymMatrix& x, const VecN& a) {
    return operators::F_value(params, Jet{a, x});
}

VecN dir2(double theta) { return VecN{2, {std::cos(theta), std::sin(theta), 0.0}}; }

std::vector<VecN> fibonacci_sphere(int m) {
    std::vector<VecN> out;
    out.reserve(static_cast<std::size_t>(m));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
        const double z = 1.0 - 2.0 * (k + 0.5) / m;
        const double r = std::sqrt(1.0 - z * z);
        const double phi = golden * k;
        out.push_back(VecN{3, {r * std::cos(phi), r * std::sin(phi), z}});
    }
    return out;
}

// Golden-section search for the minimum of sign * F over theta in [lo, hi].
double golden_minimize(const PParams& params, const SymMatrix& x, double lo, double hi, double sign) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double t) { return sign * f_dir(params, x, dir2(t)); };
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = f(d);
        }
    }
    return sign * f(0.5 * (lo + hi));
}

// Pattern search on the unit sphere minimizing sign * F, starting at a.
double sphere_polish(const PParams& params, const SymMatrix& x, VecN a, double step, double sign) {
    auto normalize = [](VecN v) {
        const double len = std::sqrt(v.norm2());
        for (int i = 0; i < 3; ++i) v[i] /= len;
        return v;
    };
    double best = sign * f_dir(params, x, a);
    while (step > 1e-10) {
        // Tangent frame at a.
        VecN t1{3, {0, 0, 0}};
        const int axis = std::abs(a[0]) < 0.9 ? 0 : 1;
        VecN e{3, {0, 0, 0}};
        e[axis] = 1.0;
        const double proj = a[0] * e[0] + a[1] * e[1] + a[2] * e[2];
        for (int i = 0; i < 3; ++i) t1[i] = e[i] - proj * a[i];
        t1 = normalize(t1);
        const VecN t2{3, {a[1] * t1[2] - a[2] * t1[1], a[2] * t1[0] - a[0] * t1[2], a[0] * t1[1] - a[1] * t1[0]}};
        bool improved = false;
        for (const VecN& t : {t1, t2}) {
            for (double s : {step, -step}) {
                VecN cand{3, {a[0] + s * t[0], a[1] + s * t[1], a[2] + s * t[2]}};
                cand = normalize(cand);
                const double v = sign * f_dir(params, x, cand);
                if (v < best) {
                    best = v;
                    a = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return sign * best;
}

}  // namespace

RadialSolution::RadialSolution(double p, int n, double R) : p_(p), n_(n), R_(R) {
    check_pn(p, n);
    if (!(R > 0.0)) throw ParameterError("radius must be positive");
    coeff_ = p / (2.0 * (p + n - 2.0));
}

void RadialSolution::check_radius(double r) const {
    if (!(r >= 0.0) || r > R_) throw DomainError("radius " + std::to_string(r) + " outside [0, R]");
}

double RadialSolution::value(double r) const {
    check_radius(r);
    return coeff_ * (R_ * R_ - r * r);
}

double RadialSolution::derivative(double r) const {
    check_radius(r);
    return -2.0 * coeff_ * r;
}

double RadialSolution::second_derivative() const { return -2.0 * coeff_; }

double RadialSolution::ode_residual(double r) const {
    return -(p_ - 1.0) / p_ * second_derivative() - (n_ - 1.0) / (p_ * r) * derivative(r) - 1.0;
}

double radial_ball(double p, int n, double R, double r) { return RadialSolution(p, n, R).value(r); }

double hopf_constant(double p, int n, double R) {
    check_pn(p, n);
    if (!(R > 0.0)) throw ParameterError("radius must be positive");
    return R * p / (p + n - 2.0);
}

double infty_annulus(double a, double b, double r) {
    if (!(a > 0.0) || !(b > a)) throw ParameterError("annulus needs 0 < a < b");
    if (r < a || r > b) throw DomainError("radius outside [a, b]");
    const double half = 0.5 * (b - a);
    const double shift = r - 0.5 * (a + b);
    return 0.5 * half * half - 0.5 * shift * shift;
}

double infty_annulus_derivative(double a, double b, double r) {
    if (!(a > 0.0) || !(b > a)) throw ParameterError("annulus needs 0 < a < b");
    if (r < a || r > b) throw DomainError("radius outside [a, b]");
    return -(r - 0.5 * (a + b));
}

double p1_ball_radius(int n, double c) {
    if (n < 2) throw ParameterError("dimension n must be at least 2");
    if (!(c < 0.0)) throw ParameterError("Neumann constant c must be negative");
    return (1.0 - n) * c;
}

DppWeights dpp_weights(double p, int n) {
    check_pn(p, n);
    const double denom = n + p - 2.0;
    return {(p - 2.0) / denom, n / denom, p / (2.0 * denom)};
}

EnvelopeSample envelope_bruteforce(const PParams& params, const SymMatrix& x, int m) {
    params.validate(true);
    if (m < 64) throw ParameterError("envelope_bruteforce needs at least 64 directions");
    if (x.dim() != params.n) throw ParameterError("matrix dimension does not match n");
    EnvelopeSample out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    auto visit = [&](const VecN& a) {
        const double v = f_dir(params, x, a);
        out.inf = std::min(out.inf, v);
        out.sup = std::max(out.sup, v);
    };
    if (params.n == 2) {
        for (int k = 0; k < m; ++k) visit(dir2(std::numbers::pi * k / m));
    } else {
        for (const auto& a : fibonacci_sphere(m)) visit(a);
    }
    return out;
}

EnvelopeSample envelope_bruteforce_refined(const PParams& params, const SymMatrix& x, int m) {
    params.validate(true);
    if (m < 64) throw ParameterError("envelope_bruteforce needs at least 64 directions");
    if (x.dim() != params.n) throw ParameterError("matrix dimension does not match n");
    EnvelopeSample out;
    if (params.n == 2) {
        const double dtheta = std::numbers::pi / m;
        int kmin = 0, kmax = 0;
        double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
        for (int k = 0; k < m; ++k) {
            const double v = f_dir(params, x, dir2(dtheta * k));
            if (v < vmin) { vmin = v; kmin = k; }
            if (v > vmax) { vmax = v; kmax = k; }
        }
        out.inf = std::min(vmin, golden_minimize(params, x, dtheta * (kmin - 1), dtheta * (kmin + 1), 1.0));
        out.sup = std::max(vmax, golden_minimize(params, x, dtheta * (kmax - 1), dtheta * (kmax + 1), -1.0));
        return out;
    }
    const auto dirs = fibonacci_sphere(m);
    std::size_t kmin = 0, kmax = 0;
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double v = f_dir(params, x, dirs[k]);
        if (v < vmin) { vmin = v; kmin = k; }
        if (v > vmax) { vmax = v; kmax = k; }
    }
    const double step = std::sqrt(4.0 * std::numbers::pi / m);
    out.inf = std::min(vmin, sphere_polish(params, x, dirs[kmin], step, 1.0));
    out.sup = std::max(vmax, sphere_polish(params, x, dirs[kmax], step, -1.0));
    return out;
}

}  // namespace pnlab::oracles
