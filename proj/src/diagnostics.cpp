// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pnlab/errors.hpp"
#include "pnlab/parallel.hpp"

namespace pnlab::diagnostics {

using geometry::Grid;
using geometry::NodeTag;
using operators::Jet;
using operators::PParams;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cubic Lagrange weights on nodes -1, 0, 1, 2 at t in [0, 1].
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace

FieldSampler::FieldSampler(const GridField& field, const DomainSpec& domain,
                           std::function<double(const Vec2&)> dirichlet)
    : field_(&field), domain_(domain), dirichlet_(std::move(dirichlet)) {
    const Grid& g = field.grid;
    ext_.assign(g.size(), kNaN);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (field.inside(k)) ext_[k] = field.values[k];

    // Extend into the exterior layer: quadratic along the normal through g(b)
    // and interior samples at depths 3h and 6h.
    const double h = g.h;
    const double reach = 4.0 * h;
    std::vector<double> ghost(g.size(), kNaN);
    parallel_for(0, static_cast<int>(g.size()), [&](int kk) {
        const auto k = static_cast<std::size_t>(kk);
        if (field.inside(k)) return;
        const Vec2 x = g.node(k);
        const double sd = geometry::sdf_eval(domain_, x);
        if (sd > reach) return;
        const auto bp = geometry::nearest_boundary_point(domain_, x);
        const double u1 = interior_eval(bp.point - bp.normal * (3.0 * h));
        const double u2 = interior_eval(bp.point - bp.normal * (6.0 * h));
        if (!std::isfinite(u1) || !std::isfinite(u2)) return;
        const double s = -std::max(sd, 0.0) / (3.0 * h);
        const double l0 = (s - 1.0) * (s - 2.0) / 2.0;
        const double l1 = -s * (s - 2.0);
        const double l2 = s * (s - 1.0) / 2.0;
        ghost[k] = l0 * dirichlet_(bp.point) + l1 * u1 + l2 * u2;
    });
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!field.inside(k)) ext_[k] = ghost[k];
}

FieldSampler::FieldSampler(const GridField& field, const DomainSpec& domain, const solver::ProblemSpec& problem)
    : FieldSampler(field, domain, [problem](const Vec2& y) { return problem.g(y); }) {}

bool FieldSampler::eval(const std::vector<double>& vals, const Vec2& x, double& out) const {
    const Grid& g = field_->grid;
    const double fx = (x.x - g.origin.x) / g.h;
    const double fy = (x.y - g.origin.y) / g.h;
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= g.nx - 1 && fy <= g.ny - 1)) return false;
    int i0 = std::min(static_cast<int>(std::floor(fx)), g.nx - 2);
    int j0 = std::min(static_cast<int>(std::floor(fy)), g.ny - 2);
    const double tx = fx - i0, ty = fy - j0;

    if (i0 >= 1 && j0 >= 1 && i0 + 2 < g.nx && j0 + 2 < g.ny) {
        const auto wx = cubic_weights(tx), wy = cubic_weights(ty);
        double acc = 0.0;
        bool ok = true;
        for (int b = 0; b < 4 && ok; ++b) {
            double row = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double v = vals[g.index(i0 - 1 + a, j0 - 1 + b)];
                if (!std::isfinite(v)) { ok = false; break; }
                row += wx[static_cast<std::size_t>(a)] * v;
            }
            acc += wy[static_cast<std::size_t>(b)] * row;
        }
        if (ok) {
            out = acc;
            return true;
        }
    }
    const double v00 = vals[g.index(i0, j0)], v10 = vals[g.index(i0 + 1, j0)];
    const double v01 = vals[g.index(i0, j0 + 1)], v11 = vals[g.index(i0 + 1, j0 + 1)];
    if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v01) || !std::isfinite(v11)) return false;
    out = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
    return true;
}

double FieldSampler::interior_eval(const Vec2& x) const {
    double out = kNaN;
    return eval(ext_, x, out) ? out : kNaN;
}

double FieldSampler::operator()(const Vec2& x) const {
    double out = 0.0;
    if (!eval(ext_, x, out)) throw CoverageError("sample point is not covered by the field");
    return out;
}

bool FieldSampler::covers(const Vec2& x) const {
    double out = 0.0;
    return eval(ext_, x, out);
}

// ---------------------------------------------------------------- jets

namespace {

// Least-squares weights mapping patch values to (c, qx, qy, Xxx, Xxy, Xyy).
struct JetFit {
    std::vector<std::array<int, 2>> offsets;
    std::vector<std::array<double, 6>> weights;  // per offset
};

JetFit make_fit(double radius_h, double h) {
    JetFit fit;
    const int r = static_cast<int>(std::floor(radius_h));
    for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di)
            if (di * di + dj * dj <= radius_h * radius_h + 1e-9) fit.offsets.push_back({di, dj});
    // Basis in cell units: 1, x, y, x^2/2, xy, y^2/2.
    auto basis = [](double x, double y) { return std::array<double, 6>{1.0, x, y, 0.5 * x * x, x * y, 0.5 * y * y}; };
    std::array<std::array<double, 6>, 6> m{};
    for (const auto& o : fit.offsets) {
        const auto b = basis(o[0], o[1]);
        for (int a = 0; a < 6; ++a)
            for (int c = 0; c < 6; ++c) m[a][c] += b[a] * b[c];
    }
    // Invert the 6x6 normal matrix by Gauss-Jordan with partial pivoting.
    std::array<std::array<double, 12>, 6> aug{};
    for (int a = 0; a < 6; ++a) {
        for (int c = 0; c < 6; ++c) aug[a][c] = m[a][c];
        aug[a][6 + a] = 1.0;
    }
    for (int col = 0; col < 6; ++col) {
        int piv = col;
        for (int r2 = col + 1; r2 < 6; ++r2)
            if (std::abs(aug[r2][col]) > std::abs(aug[piv][col])) piv = r2;
        std::swap(aug[col], aug[piv]);
        const double d = aug[col][col];
        for (auto& v : aug[col]) v /= d;
        for (int r2 = 0; r2 < 6; ++r2) {
            if (r2 == col) continue;
            const double f = aug[r2][col];
            for (int c = 0; c < 12; ++c) aug[r2][c] -= f * aug[col][c];
        }
    }
    const std::array<double, 6> scale = {1.0, 1.0 / h, 1.0 / h, 1.0 / (h * h), 1.0 / (h * h), 1.0 / (h * h)};
    for (const auto& o : fit.offsets) {
        const auto b = basis(o[0], o[1]);
        std::array<double, 6> w{};
        for (int a = 0; a < 6; ++a) {
            double s = 0.0;
            for (int c = 0; c < 6; ++c) s += aug[a][6 + c] * b[c];
            w[a] = s * scale[a];
        }
        fit.weights.push_back(w);
    }
    return fit;
}

bool apply_fit(const JetFit& fit, const GridField& field, std::size_t k, std::array<double, 6>& coef) {
    const Grid& g = field.grid;
    const int i = static_cast<int>(k % static_cast<std::size_t>(g.nx));
    const int j = static_cast<int>(k / static_cast<std::size_t>(g.nx));
    coef.fill(0.0);
    for (std::size_t s = 0; s < fit.offsets.size(); ++s) {
        const int ni = i + fit.offsets[s][0], nj = j + fit.offsets[s][1];
        if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) return false;
        const std::size_t nk = g.index(ni, nj);
        if (!field.inside(nk)) return false;
        for (int a = 0; a < 6; ++a) coef[static_cast<std::size_t>(a)] += fit.weights[s][static_cast<std::size_t>(a)] * field.values[nk];
    }
    return true;
}

Jet jet_from(const std::array<double, 6>& c) {
    Jet jet;
    jet.q.n = 2;
    jet.q[0] = c[1];
    jet.q[1] = c[2];
    jet.X = linalg::SymMatrix::from_2x2(c[3], c[4], c[5]);
    return jet;
}

}  // namespace

bool fit_jet(const GridField& field, std::size_t k, double patch_radius_h, Jet& jet) {
    if (field.tags[k] != NodeTag::interior) return false;
    const JetFit fit = make_fit(patch_radius_h, field.grid.h);
    std::array<double, 6> c{};
    if (!apply_fit(fit, field, k, c)) return false;
    jet = jet_from(c);
    return true;
}

ViscosityReport viscosity_check(const GridField& field, const PParams& params, const ViscosityConfig& config) {
    params.validate(true);
    const Grid& g = field.grid;
    const double h = g.h;
    const double tau = config.tau > 0.0 ? config.tau : 10.0 * h;
    const double floor = config.grad_floor > 0.0 ? config.grad_floor : operators::default_grad_floor(h);
    const JetFit fit = make_fit(config.patch_radius_h, h);

    ViscosityReport rep;
    rep.tau = tau;
    rep.sub_violation.assign(g.size(), 0.0);
    rep.super_violation.assign(g.size(), 0.0);
    rep.jets.assign(g.size(), Jet{});
    rep.evaluated_mask.assign(g.size(), 0);

    parallel_for(0, static_cast<int>(g.size()), [&](int kk) {
        const auto k = static_cast<std::size_t>(kk);
        if (field.tags[k] != NodeTag::interior) return;
        std::array<double, 6> c{};
        if (!apply_fit(fit, field, k, c)) return;
        rep.evaluated_mask[k] = 1;
        const Jet jet = jet_from(c);
        rep.jets[k] = jet;
        const int i = static_cast<int>(k % static_cast<std::size_t>(g.nx));
        const int j = static_cast<int>(k / static_cast<std::size_t>(g.nx));
        const double u0 = field.values[k];
        for (double dh : config.deltas_h) {
            for (int sign : {1, -1}) {
                if (dh == 0.0 && sign < 0) continue;
                const double delta = sign * dh * h;
                // phi - u over the patch, phi = u0 + q.y + y^T (X + delta I) y / 2.
                double lo = 0.0, hi = 0.0;
                for (const auto& o : fit.offsets) {
                    const double y0 = o[0] * h, y1 = o[1] * h;
                    const double phi = u0 + c[1] * y0 + c[2] * y1 +
                                       0.5 * ((c[3] + delta) * y0 * y0 + 2.0 * c[4] * y0 * y1 + (c[5] + delta) * y1 * y1);
                    const double d = phi - field.values[g.index(i + o[0], j + o[1])];
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                }
                Jet tj = jet;
                tj.X = jet.X + linalg::SymMatrix::identity(2, delta);
                const auto env = operators::envelopes_at(params, tj, floor);
                if (lo >= -config.contact_tol)  // touches from above
                    rep.sub_violation[k] = std::max(rep.sub_violation[k], std::max(0.0, env.lower));
                if (hi <= config.contact_tol)  // touches from below
                    rep.super_violation[k] = std::max(rep.super_violation[k], std::max(0.0, -env.upper));
            }
        }
    });

    for (std::size_t k = 0; k < g.size(); ++k) {
        if (field.tags[k] == NodeTag::interior && !rep.evaluated_mask[k]) ++rep.skipped;
        if (!rep.evaluated_mask[k]) continue;
        ++rep.evaluated;
        rep.worst_sub = std::max(rep.worst_sub, rep.sub_violation[k]);
        rep.worst_super = std::max(rep.worst_super, rep.super_violation[k]);
        if (rep.sub_violation[k] > tau || rep.super_violation[k] > tau) ++rep.violating_nodes;
    }
    return rep;
}

PucciReport pucci_check(const GridField& field, const PParams& params, double K, double tau, double patch_radius_h) {
    params.validate(true);
    const Grid& g = field.grid;
    const double h = g.h;
    PucciReport rep;
    rep.tau = tau > 0.0 ? tau : 10.0 * h;
    rep.flagged.assign(g.size(), 0);
    const auto pb = params.is_infinity() ? operators::PucciBounds{0.0, 1.0} : operators::pucci_bounds(params.p);
    const JetFit fit = make_fit(patch_radius_h, h);
    std::vector<double> viol(g.size(), -1.0);
    parallel_for(0, static_cast<int>(g.size()), [&](int kk) {
        const auto k = static_cast<std::size_t>(kk);
        if (field.tags[k] != NodeTag::interior) return;
        std::array<double, 6> c{};
        if (!apply_fit(fit, field, k, c)) return;
        const auto pv = operators::pucci(linalg::SymMatrix::from_2x2(c[3], c[4], c[5]), pb.lambda, pb.Lambda);
        viol[k] = std::max({0.0, -(pv.plus + K), pv.minus - K});
    });
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (viol[k] < 0.0) continue;
        ++rep.evaluated;
        rep.worst = std::max(rep.worst, viol[k]);
        if (viol[k] > rep.tau) {
            ++rep.violations;
            rep.flagged[k] = 1;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- boundary

NeumannTrace neumann_trace(const FieldSampler& sampler, int samples, double t) {
    if (samples < 1) throw ParameterError("neumann_trace needs at least one sample");
    NeumannTrace tr;
    tr.spacing = t > 0.0 ? t : 2.0 * sampler.h();
    for (const auto& s : geometry::boundary_probe(sampler.domain(), samples)) {
        const Vec2 p1 = s.point - s.normal * tr.spacing;
        const Vec2 p2 = s.point - s.normal * (2.0 * tr.spacing);
        if (!sampler.covers(p1) || !sampler.covers(p2)) {
            ++tr.dropped;
            continue;
        }
        const double f0 = sampler.boundary_value(s.point);
        tr.values.push_back((-3.0 * f0 + 4.0 * sampler(p1) - sampler(p2)) / (-2.0 * tr.spacing));
        tr.samples.push_back(s);
    }
    return tr;
}

ConstancyScore constancy_score(const std::vector<double>& values) {
    if (values.size() < 8) throw ParameterError("constancy score needs at least 8 values");
    ConstancyScore sc;
    double sum = 0.0, lo = values.front(), hi = values.front();
    for (double v : values) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    sc.mean = sum / static_cast<double>(values.size());
    const double scale = std::max(std::abs(lo), std::abs(hi));
    sc.defined = std::abs(sc.mean) > 1e-12 * std::max(scale, 1.0);
    sc.spread = sc.defined ? (hi - lo) / std::abs(sc.mean) : std::numeric_limits<double>::infinity();
    return sc;
}

double BoundaryIdentity::max_abs() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
}

BoundaryIdentity boundary_identity(const FieldSampler& sampler, const PParams& params, double rhs, int samples,
                                   double t) {
    params.validate(true);
    const double step = t > 0.0 ? t : 2.0 * sampler.h();
    const double nn = params.is_infinity() ? 1.0 : (params.p - 1.0) / params.p;
    const double tc = params.trace_weight() * (params.n - 1);
    BoundaryIdentity bi;
    for (const auto& s : geometry::boundary_probe(sampler.domain(), samples)) {
        const Vec2 p1 = s.point - s.normal * step;
        const Vec2 p2 = s.point - s.normal * (2.0 * step);
        if (!sampler.covers(p1) || !sampler.covers(p2)) {
            ++bi.dropped;
            continue;
        }
        const double f0 = sampler.boundary_value(s.point), f1 = sampler(p1), f2 = sampler(p2);
        const double un = (-3.0 * f0 + 4.0 * f1 - f2) / (-2.0 * step);
        const double unn = (f0 - 2.0 * f1 + f2) / (step * step);
        bi.samples.push_back(s);
        bi.u_nu.push_back(un);
        bi.u_nunu.push_back(unn);
        bi.residuals.push_back(nn * unn + tc * s.curvature * un + rhs);
    }
    return bi;
}

CornerQuantities corner_quantities(const FieldSampler& sampler, const geometry::BoundarySample& at) {
    const double h = sampler.h();
    const double d = 2.0 * h;
    const Vec2 nu = at.normal, tau = at.tangent;
    const double f0 = sampler.boundary_value(at.point);
    std::array<double, 3> f{}, ut{}, utt{};
    for (int k = 0; k < 3; ++k) {
        const Vec2 z = at.point - nu * (d * (k + 1));
        const double c = sampler(z), pl = sampler(z + tau * d), mi = sampler(z - tau * d);
        f[static_cast<std::size_t>(k)] = c;
        ut[static_cast<std::size_t>(k)] = (pl - mi) / (2.0 * d);
        utt[static_cast<std::size_t>(k)] = (pl - 2.0 * c + mi) / (d * d);
    }
    CornerQuantities cq;
    cq.u_nu = (-3.0 * f0 + 4.0 * f[0] - f[1]) / (-2.0 * d);
    cq.u_nunu = (f0 - 2.0 * f[0] + f[1]) / (d * d);
    // Quadratic extrapolation from depths d, 2d, 3d to the boundary.
    cq.u_tautau = 3.0 * utt[0] - 3.0 * utt[1] + utt[2];
    cq.u_nutau = -(-1.25 * ut[0] + 2.0 * ut[1] - 0.75 * ut[2]) / h;
    // Second arclength derivative of g from neighbouring boundary points.
    const auto bp = geometry::nearest_boundary_point(sampler.domain(), at.point + tau * d);
    const auto bm = geometry::nearest_boundary_point(sampler.domain(), at.point - tau * d);
    const double lp = geometry::norm(bp.point - at.point), lm = geometry::norm(bm.point - at.point);
    const double gp = sampler.boundary_value(bp.point), gm = sampler.boundary_value(bm.point);
    cq.u_ss = 2.0 * (lm * gp - (lp + lm) * f0 + lp * gm) / (lp * lm * (lp + lm));
    cq.tangential_defect = cq.u_tautau - (cq.u_ss + at.curvature * cq.u_nu);
    return cq;
}

// ---------------------------------------------------------------- symmetry

std::vector<MovingPlaneResult> moving_plane(const FieldSampler& sampler, const Vec2& direction,
                                            const std::vector<double>& offsets) {
    const double len = geometry::norm(direction);
    if (!(len > 0.0)) throw ParameterError("moving plane direction must be non-zero");
    const Vec2 e = direction * (1.0 / len);
    const DomainSpec& dom = sampler.domain();
    const GridField& field = sampler.field();
    const Grid& g = field.grid;
    std::vector<MovingPlaneResult> out;
    for (double lambda : offsets) {
        MovingPlaneResult r;
        r.direction = e;
        r.offset = lambda;
        r.min_w = std::numeric_limits<double>::infinity();
        const geometry::Hyperplane plane{e, geometry::dot(dom.center, e) + lambda};
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!field.inside(k)) continue;
            const Vec2 x = g.node(k);
            if (geometry::dot(x, e) >= plane.offset) continue;
            const Vec2 xr = geometry::reflect(x, plane);
            if (geometry::sdf_eval(dom, xr) >= 0.0 || !sampler.covers(xr)) continue;
            const double w = field.values[k] - sampler(xr);
            ++r.nodes;
            if (w < r.min_w) {
                r.min_w = w;
                r.argmin = x;
            }
        }
        r.empty = r.nodes == 0;
        if (r.empty) r.min_w = 0.0;
        out.push_back(r);
    }
    return out;
}

SymmetryReport symmetry_report(const FieldSampler& sampler, const PParams& params, double rhs, int samples) {
    SymmetryReport rep;
    rep.trace = neumann_trace(sampler, samples);
    rep.score = constancy_score(rep.trace.values);
    const int comps = sampler.domain().component_count();
    std::vector<double> sum(static_cast<std::size_t>(comps), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(comps), 0);
    for (std::size_t s = 0; s < rep.trace.values.size(); ++s) {
        const auto c = static_cast<std::size_t>(rep.trace.samples[s].component);
        sum[c] += rep.trace.values[s];
        ++cnt[c];
    }
    for (int c = 0; c < comps; ++c)
        rep.component_means.push_back(cnt[static_cast<std::size_t>(c)] ? sum[static_cast<std::size_t>(c)] / cnt[static_cast<std::size_t>(c)] : 0.0);
    rep.identity = boundary_identity(sampler, params, rhs, samples);
    return rep;
}

// ---------------------------------------------------------------- P-function

std::string to_string(PVariant v) { return v == PVariant::laplacian ? "laplacian" : "infinity"; }

PVariant p_variant(const PParams& params) {
    if (params.is_infinity()) return PVariant::infinity;
    if (params.p == 2.0) return PVariant::laplacian;
    throw ParameterError("P-function is available for p = 2 and p = inf only");
}

namespace {

void finish(PFunctionField& pf) {
    std::vector<double> vals;
    for (std::size_t k = 0; k < pf.mask.size(); ++k)
        if (pf.mask[k]) vals.push_back(pf.values.values[k]);
    if (vals.empty()) throw CoverageError("P-function has no valid nodes");
    pf.min = *std::min_element(vals.begin(), vals.end());
    pf.max = *std::max_element(vals.begin(), vals.end());
    if (vals.size() >= 8) pf.score = constancy_score(vals);
}

double coefficient(PVariant v, int n) { return v == PVariant::laplacian ? 4.0 / n : 2.0; }

}  // namespace

PFunctionField p_function(const GridField& field, const PParams& params) {
    PFunctionField pf;
    pf.variant = p_variant(params);
    const double c = coefficient(pf.variant, params.n);
    const Grid& g = field.grid;
    pf.values = GridField(g, field.tags, 0.0);
    pf.mask.assign(g.size(), 0);
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (field.tags[k] != NodeTag::interior) continue;
            const std::size_t e = g.index(i + 1, j), w = g.index(i - 1, j);
            const std::size_t n = g.index(i, j + 1), s = g.index(i, j - 1);
            if (!field.inside(e) || !field.inside(w) || !field.inside(n) || !field.inside(s)) continue;
            const double gx = (field.values[e] - field.values[w]) / (2.0 * g.h);
            const double gy = (field.values[n] - field.values[s]) / (2.0 * g.h);
            pf.values.values[k] = gx * gx + gy * gy + c * field.values[k];
            pf.mask[k] = 1;
        }
    }
    finish(pf);
    return pf;
}

PFunctionField p_function(const GridField& shape, const PParams& params,
                          const std::function<double(const Vec2&)>& value,
                          const std::function<Vec2(const Vec2&)>& gradient) {
    PFunctionField pf;
    pf.variant = p_variant(params);
    const double c = coefficient(pf.variant, params.n);
    const Grid& g = shape.grid;
    pf.values = GridField(g, shape.tags, 0.0);
    pf.mask.assign(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!shape.inside(k)) continue;
        const Vec2 x = g.node(k);
        const Vec2 gr = gradient(x);
        pf.values.values[k] = geometry::dot(gr, gr) + c * value(x);
        pf.mask[k] = 1;
    }
    finish(pf);
    return pf;
}

}  // namespace pnlab::diagnostics
