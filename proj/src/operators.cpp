// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnlab/errors.hpp"
#include "pnlab/parallel.hpp"

namespace pnlab::operators {

using geometry::NodeTag;

void PParams::validate(bool allow_infinity) const {
    if (n < 2 || n > 3) throw ParameterError("dimension n must be 2 or 3");
    if (is_infinity()) {
        if (!allow_infinity) throw ParameterError("p = infinity is not supported on this path");
        return;
    }
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("exponent p must lie in (1, inf), got " + std::to_string(p));
}

double PParams::trace_weight() const { return is_infinity() ? 0.0 : 1.0 / p; }

double PParams::direction_weight() const { return is_infinity() ? 1.0 : (p - 2.0) / p; }

double normalized_laplacian(const PParams& params, const Jet& jet) {
    const double q2 = jet.q.norm2();
    if (!(q2 > 0.0)) throw DegenerateGradientError("F_p is undefined at q = 0; use the envelopes");
    return params.trace_weight() * jet.X.trace() + params.direction_weight() * jet.X.quadratic_form(jet.q) / q2;
}

double F_value(const PParams& params, const Jet& jet) {
    params.validate(true);
    return -normalized_laplacian(params, jet) - 1.0;
}

Envelopes envelopes(const PParams& params, const SymMatrix& x) {
    params.validate(true);
    const auto eig = linalg::sym_eigs(x);
    const double w_tr = params.trace_weight();
    const double w_dir = params.direction_weight();
    // F(a, X) = -w_dir * R(a) - w_tr * tr X - 1 with the Rayleigh quotient
    // R(a) in [lambda_1, lambda_n].
    const double tr = eig.sum();
    const double at_max = -w_dir * eig.max() - w_tr * tr - 1.0;
    const double at_min = -w_dir * eig.min() - w_tr * tr - 1.0;
    // w_dir >= 0 for p >= 2, so the infimum sits at lambda_n; branches swap for p < 2.
    if (w_dir >= 0.0) return {at_max, at_min};
    return {at_min, at_max};
}

Envelopes envelopes_at(const PParams& params, const Jet& jet, double grad_floor) {
    if (std::sqrt(jet.q.norm2()) > grad_floor) {
        const double f = F_value(params, jet);
        return {f, f};
    }
    return envelopes(params, jet.X);
}

PucciBounds pucci_bounds(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("Pucci bounds need p in (1, inf)");
    const double a = 1.0 / p;
    const double b = (p - 1.0) / p;
    return {std::min(a, b), std::max(a, b)};
}

PucciValues pucci(const SymMatrix& x, double lambda, double Lambda) {
    if (!(lambda > 0.0)) throw ParameterError("Pucci operator needs lambda > 0");
    if (!(Lambda >= lambda)) throw ParameterError("Pucci operator needs lambda <= Lambda");
    const auto eig = linalg::sym_eigs(x);
    double pos = 0.0;
    double neg = 0.0;
    for (double e : eig.span()) {
        if (e > 0.0) pos += e;
        else neg += e;
    }
    return {lambda * pos + Lambda * neg, Lambda * pos + lambda * neg};
}

double default_grad_floor(double h) { return 0.1 * std::sqrt(h); }

std::size_t FieldEvaluation::valid_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

bool central_jet(const GridField& field, int i, int j, Jet& out) {
    const auto& g = field.grid;
    if (i < 1 || j < 1 || i > g.nx - 2 || j > g.ny - 2) return false;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
            if (field.tag(i + di, j + dj) == NodeTag::exterior) return false;
    const double h = g.h;
    const double c = field.at(i, j);
    const double e = field.at(i + 1, j), w = field.at(i - 1, j);
    const double n = field.at(i, j + 1), s = field.at(i, j - 1);
    out.q = VecN{2, {(e - w) / (2.0 * h), (n - s) / (2.0 * h), 0.0}};
    const double uxx = (e - 2.0 * c + w) / (h * h);
    const double uyy = (n - 2.0 * c + s) / (h * h);
    const double uxy = (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) - field.at(i - 1, j + 1) + field.at(i - 1, j - 1)) /
                       (4.0 * h * h);
    out.X = SymMatrix::from_2x2(uxx, uxy, uyy);
    return true;
}

FieldEvaluation classical_field_eval(const GridField& field, const PParams& params, double grad_floor) {
    params.validate(true);
    const auto& g = field.grid;
    FieldEvaluation out;
    out.values = GridField(g, field.tags, 0.0);
    out.mask.assign(g.size(), 0);
    std::vector<std::uint8_t> gradient_masked(g.size(), 0);
    parallel_for(0, g.ny, [&](int j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (field.tags[k] == NodeTag::exterior) continue;
            Jet jet;
            if (!central_jet(field, i, j, jet)) continue;
            if (std::sqrt(jet.q.norm2()) <= grad_floor) {
                gradient_masked[k] = 1;
                continue;
            }
            out.values.values[k] = normalized_laplacian(params, jet);
            out.mask[k] = 1;
        }
    });
    out.masked_by_gradient = static_cast<std::size_t>(std::count(gradient_masked.begin(), gradient_masked.end(), std::uint8_t{1}));
    return out;
}

}  // namespace pnlab::operators
