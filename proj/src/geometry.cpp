// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "pnlab/errors.hpp"

namespace pnlab::geometry {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
    const double len = norm(v);
    return len > 0.0 ? v * (1.0 / len) : fallback;
}

// Smallest positive root of t^2 |d|^2 + 2 t <w,d> + |w|^2 - r^2 = 0.
double ray_circle(const Vec2& w, const Vec2& d, double r, bool want_far) {
    const double qa = dot(d, d);
    const double qb = dot(w, d);
    const double qc = dot(w, w) - r * r;
    const double disc = qb * qb - qa * qc;
    if (disc < 0.0) return kInf;
    const double sq = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = qb >= 0.0 ? -(qb + sq) : -(qb - sq);
    double t1 = q / qa;
    double t2 = q != 0.0 ? qc / q : -t1;
    if (t1 > t2) std::swap(t1, t2);
    if (want_far) return t2 > 0.0 ? t2 : kInf;
    if (t1 > 0.0) return t1;
    if (t2 > 0.0) return t2;
    return kInf;
}

// --- ellipse ---------------------------------------------------------------

struct EllipseProjection {
    double t = 0.0;  // parameter in the first quadrant
    Vec2 point{};    // projection in the first quadrant
};

double ellipse_dist2(double a, double b, double px, double py, double t) {
    const double dx = a * std::cos(t) - px;
    const double dy = b * std::sin(t) - py;
    return dx * dx + dy * dy;
}

// Projection of (px, py), px, py >= 0, onto the ellipse (a cos t, b sin t).
EllipseProjection project_ellipse_quadrant(double a, double b, double px, double py) {
    constexpr int kCoarse = 32;
    double best_t = 0.0;
    double best_d = kInf;
    for (int k = 0; k <= kCoarse; ++k) {
        const double t = 0.5 * kPi * k / kCoarse;
        const double d = ellipse_dist2(a, b, px, py, t);
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double t = best_t;
    for (int iter = 0; iter < 50; ++iter) {
        const double c = std::cos(t);
        const double s = std::sin(t);
        const double g = (b * b - a * a) * s * c + a * px * s - b * py * c;
        const double gp = (b * b - a * a) * (c * c - s * s) + a * px * c + b * py * s;
        double step = gp > 0.0 ? -g / gp : -g / (a * a + b * b);
        const double d0 = ellipse_dist2(a, b, px, py, t);
        // Damping: halve until the distance does not increase.
        double t_new = std::clamp(t + step, 0.0, 0.5 * kPi);
        for (int h = 0; h < 40 && ellipse_dist2(a, b, px, py, t_new) > d0; ++h) {
            step *= 0.5;
            t_new = std::clamp(t + step, 0.0, 0.5 * kPi);
        }
        const double moved = std::abs(t_new - t);
        t = t_new;
        if (moved < 1e-12) break;
    }
    return {t, {a * std::cos(t), b * std::sin(t)}};
}

double ellipse_curvature(double a, double b, double t) {
    const double s = std::sin(t);
    const double c = std::cos(t);
    const double w = a * a * s * s + b * b * c * c;
    return a * b / (w * std::sqrt(w));
}

Vec2 ellipse_normal(double a, double b, double t) {
    return unit_or({b * std::cos(t), a * std::sin(t)}, {1.0, 0.0});
}

// Cumulative arclength table of the ellipse over [0, 2 pi].
struct ArcTable {
    std::vector<double> t;
    std::vector<double> s;
};

ArcTable ellipse_arc_table(double a, double b, int panels) {
    // 5-point Gauss-Legendre per panel.
    static constexpr std::array<double, 5> x5{-0.9061798459386640, -0.5384693101056831, 0.0,
                                              0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> w5{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};
    ArcTable tab;
    tab.t.resize(static_cast<std::size_t>(panels) + 1);
    tab.s.resize(static_cast<std::size_t>(panels) + 1);
    const double dt = 2.0 * kPi / panels;
    tab.t[0] = 0.0;
    tab.s[0] = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double t0 = k * dt;
        double acc = 0.0;
        for (std::size_t q = 0; q < 5; ++q) {
            const double t = t0 + 0.5 * dt * (x5[q] + 1.0);
            acc += w5[q] * std::hypot(a * std::sin(t), b * std::cos(t));
        }
        tab.t[static_cast<std::size_t>(k) + 1] = t0 + dt;
        tab.s[static_cast<std::size_t>(k) + 1] = tab.s[static_cast<std::size_t>(k)] + 0.5 * dt * acc;
    }
    return tab;
}

double ellipse_param_at_arclength(const ArcTable& tab, double a, double b, double target) {
    auto it = std::upper_bound(tab.s.begin(), tab.s.end(), target);
    std::size_t k = it == tab.s.begin() ? 0 : static_cast<std::size_t>(it - tab.s.begin()) - 1;
    k = std::min(k, tab.s.size() - 2);
    const double frac = (target - tab.s[k]) / (tab.s[k + 1] - tab.s[k]);
    double t = tab.t[k] + frac * (tab.t[k + 1] - tab.t[k]);
    // Newton on s(t) - target using the local panel as the base.
    for (int iter = 0; iter < 8; ++iter) {
        // Integrate speed from panel start to t with 5-point Gauss-Legendre.
        static constexpr std::array<double, 5> x5{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
        static constexpr std::array<double, 5> w5{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                  0.4786286704993665, 0.2369268850561891};
        const double t0 = tab.t[k];
        const double span = t - t0;
        double acc = 0.0;
        for (std::size_t q = 0; q < 5; ++q) {
            const double tq = t0 + 0.5 * span * (x5[q] + 1.0);
            acc += w5[q] * std::hypot(a * std::sin(tq), b * std::cos(tq));
        }
        const double s_t = tab.s[k] + 0.5 * span * acc;
        const double speed = std::hypot(a * std::sin(t), b * std::cos(t));
        const double dt = (target - s_t) / speed;
        t += dt;
        if (std::abs(dt) < 1e-15) break;
    }
    return t;
}

// --- stadium ---------------------------------------------------------------

Vec2 segment_projection(double half_length, const Vec2& p) {
    return {std::clamp(p.x, -half_length, half_length), 0.0};
}

}  // namespace

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::disk: return "disk";
        case DomainKind::annulus: return "annulus";
        case DomainKind::ellipse: return "ellipse";
        case DomainKind::stadium: return "stadium";
    }
    return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
    if (name == "disk") return DomainKind::disk;
    if (name == "annulus") return DomainKind::annulus;
    if (name == "ellipse") return DomainKind::ellipse;
    if (name == "stadium") return DomainKind::stadium;
    throw ParameterError("unknown domain kind '" + name + "'");
}

DomainSpec DomainSpec::disk(double radius, Vec2 center) {
    DomainSpec d{DomainKind::disk, center, radius, 0.0};
    d.validate();
    return d;
}

DomainSpec DomainSpec::annulus(double inner, double outer, Vec2 center) {
    DomainSpec d{DomainKind::annulus, center, inner, outer};
    d.validate();
    return d;
}

DomainSpec DomainSpec::ellipse(double semi_x, double semi_y, Vec2 center) {
    DomainSpec d{DomainKind::ellipse, center, semi_x, semi_y};
    d.validate();
    return d;
}

DomainSpec DomainSpec::stadium(double half_length, double radius, Vec2 center) {
    DomainSpec d{DomainKind::stadium, center, half_length, radius};
    d.validate();
    return d;
}

void DomainSpec::validate() const {
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) throw ParameterError("domain center must be finite");
    switch (kind) {
        case DomainKind::disk:
            if (!finite_positive(a)) throw ParameterError("disk radius must be positive");
            break;
        case DomainKind::annulus:
            if (!finite_positive(a) || !finite_positive(b)) throw ParameterError("annulus radii must be positive");
            if (a >= b) throw ParameterError("annulus inner radius must be smaller than outer radius");
            break;
        case DomainKind::ellipse:
            if (!finite_positive(a) || !finite_positive(b)) throw ParameterError("ellipse semi-axes must be positive");
            break;
        case DomainKind::stadium:
            if (!finite_positive(a) || !finite_positive(b))
                throw ParameterError("stadium half-length and radius must be positive");
            break;
    }
}

double DomainSpec::inradius() const {
    switch (kind) {
        case DomainKind::disk: return a;
        case DomainKind::annulus: return 0.5 * (b - a);
        case DomainKind::ellipse: return std::min(a, b);
        case DomainKind::stadium: return b;
    }
    return 0.0;
}

BoundingBox bounding_box(const DomainSpec& d) {
    Vec2 half{};
    switch (d.kind) {
        case DomainKind::disk: half = {d.a, d.a}; break;
        case DomainKind::annulus: half = {d.b, d.b}; break;
        case DomainKind::ellipse: half = {d.a, d.b}; break;
        case DomainKind::stadium: half = {d.a + d.b, d.b}; break;
    }
    return {d.center - half, d.center + half};
}

double sdf_eval(const DomainSpec& d, const Vec2& x) {
    d.validate();
    const Vec2 p = x - d.center;
    switch (d.kind) {
        case DomainKind::disk: return norm(p) - d.a;
        case DomainKind::annulus: {
            const double r = norm(p);
            return std::max(d.a - r, r - d.b);
        }
        case DomainKind::ellipse: {
            const double px = std::abs(p.x);
            const double py = std::abs(p.y);
            const auto proj = project_ellipse_quadrant(d.a, d.b, px, py);
            const double dist = std::hypot(proj.point.x - px, proj.point.y - py);
            const double level = (px / d.a) * (px / d.a) + (py / d.b) * (py / d.b) - 1.0;
            return level < 0.0 ? -dist : dist;
        }
        case DomainKind::stadium: return norm(p - segment_projection(d.a, p)) - d.b;
    }
    return 0.0;
}

BoundaryPoint nearest_boundary_point(const DomainSpec& d, const Vec2& x) {
    d.validate();
    const Vec2 p = x - d.center;
    switch (d.kind) {
        case DomainKind::disk: {
            const Vec2 n = unit_or(p, {1.0, 0.0});
            return {d.center + n * d.a, n, 1.0 / d.a, 0};
        }
        case DomainKind::annulus: {
            const Vec2 dir = unit_or(p, {1.0, 0.0});
            const double r = norm(p);
            if (r - d.a < d.b - r) return {d.center + dir * d.a, -dir, -1.0 / d.a, 1};
            return {d.center + dir * d.b, dir, 1.0 / d.b, 0};
        }
        case DomainKind::ellipse: {
            const double sx = p.x < 0.0 ? -1.0 : 1.0;
            const double sy = p.y < 0.0 ? -1.0 : 1.0;
            const auto proj = project_ellipse_quadrant(d.a, d.b, std::abs(p.x), std::abs(p.y));
            Vec2 n = ellipse_normal(d.a, d.b, proj.t);
            n = {sx * n.x, sy * n.y};
            const Vec2 q{sx * proj.point.x, sy * proj.point.y};
            return {d.center + q, n, ellipse_curvature(d.a, d.b, proj.t), 0};
        }
        case DomainKind::stadium: {
            const Vec2 base = segment_projection(d.a, p);
            const Vec2 n = unit_or(p - base, {0.0, p.y < 0.0 ? -1.0 : 1.0});
            const bool on_cap = std::abs(p.x) > d.a;
            return {d.center + base + n * d.b, n, on_cap ? 1.0 / d.b : 0.0, 0};
        }
    }
    return {};
}

double ray_exit(const DomainSpec& d, const Vec2& x, const Vec2& dir) {
    const Vec2 w = x - d.center;
    switch (d.kind) {
        case DomainKind::disk: return ray_circle(w, dir, d.a, true);
        case DomainKind::annulus: {
            const double outer = ray_circle(w, dir, d.b, true);
            const double inner = ray_circle(w, dir, d.a, false);
            return std::min(outer, inner);
        }
        case DomainKind::ellipse: {
            const Vec2 ws{w.x / d.a, w.y / d.b};
            const Vec2 ds{dir.x / d.a, dir.y / d.b};
            return ray_circle(ws, ds, 1.0, true);
        }
        case DomainKind::stadium: {
            double best = kInf;
            // Flat sides y = +-b.
            if (dir.y != 0.0) {
                for (double side : {d.b, -d.b}) {
                    const double t = (side - w.y) / dir.y;
                    if (t > 0.0 && std::abs(w.x + t * dir.x) <= d.a) best = std::min(best, t);
                }
            }
            // Caps.
            for (double cx : {d.a, -d.a}) {
                const double t = ray_circle(w - Vec2{cx, 0.0}, dir, d.b, true);
                if (std::isfinite(t)) {
                    const double hx = w.x + t * dir.x;
                    if ((cx > 0.0 && hx >= d.a) || (cx < 0.0 && hx <= -d.a)) best = std::min(best, t);
                }
            }
            return best;
        }
    }
    return kInf;
}

double component_length(const DomainSpec& d, int component) {
    switch (d.kind) {
        case DomainKind::disk: return 2.0 * kPi * d.a;
        case DomainKind::annulus: return 2.0 * kPi * (component == 0 ? d.b : d.a);
        case DomainKind::ellipse: return ellipse_arc_table(d.a, d.b, 256).s.back();
        case DomainKind::stadium: return 4.0 * d.a + 2.0 * kPi * d.b;
    }
    return 0.0;
}

std::vector<BoundarySample> boundary_probe(const DomainSpec& d, int m) {
    d.validate();
    if (m < 8) throw ParameterError("boundary_probe needs at least 8 samples");
    std::vector<BoundarySample> out;
    out.reserve(static_cast<std::size_t>(m));

    auto circle_samples = [&](double radius, int count, bool outward, double s0, int comp) {
        for (int k = 0; k < count; ++k) {
            const double th = 2.0 * kPi * k / count;
            const Vec2 dir{std::cos(th), std::sin(th)};
            BoundarySample bs;
            bs.point = d.center + dir * radius;
            bs.normal = outward ? dir : -dir;
            bs.tangent = perp(bs.normal);
            bs.curvature = outward ? 1.0 / radius : -1.0 / radius;
            bs.s = s0 + radius * th;
            bs.component = comp;
            out.push_back(bs);
        }
    };

    switch (d.kind) {
        case DomainKind::disk: circle_samples(d.a, m, true, 0.0, 0); break;
        case DomainKind::annulus: {
            const int outer = static_cast<int>(std::lround(m * d.b / (d.a + d.b)));
            const int inner = m - outer;
            circle_samples(d.b, outer, true, 0.0, 0);
            circle_samples(d.a, inner, false, 2.0 * kPi * d.b, 1);
            break;
        }
        case DomainKind::ellipse: {
            const auto tab = ellipse_arc_table(d.a, d.b, 1024);
            const double total = tab.s.back();
            for (int k = 0; k < m; ++k) {
                const double s = total * k / m;
                const double t = k == 0 ? 0.0 : ellipse_param_at_arclength(tab, d.a, d.b, s);
                BoundarySample bs;
                bs.point = d.center + Vec2{d.a * std::cos(t), d.b * std::sin(t)};
                bs.normal = ellipse_normal(d.a, d.b, t);
                bs.tangent = perp(bs.normal);
                bs.curvature = ellipse_curvature(d.a, d.b, t);
                bs.s = s;
                out.push_back(bs);
            }
            break;
        }
        case DomainKind::stadium: {
            const double L = d.a;
            const double r = d.b;
            const double quarter = 0.5 * kPi * r;
            const double flat = 2.0 * L;
            const double total = 2.0 * flat + 2.0 * kPi * r;
            for (int k = 0; k < m; ++k) {
                const double s = total * k / m;
                BoundarySample bs;
                bs.s = s;
                double u = s;
                if (u < quarter) {  // right cap, upper quarter
                    const double th = u / r;
                    bs.normal = {std::cos(th), std::sin(th)};
                    bs.point = Vec2{L, 0.0} + bs.normal * r;
                    bs.curvature = 1.0 / r;
                } else if ((u -= quarter) < flat) {  // top flat, right to left
                    bs.normal = {0.0, 1.0};
                    bs.point = {L - u, r};
                    bs.curvature = 0.0;
                } else if ((u -= flat) < 2.0 * quarter) {  // left cap
                    const double th = 0.5 * kPi + u / r;
                    bs.normal = {std::cos(th), std::sin(th)};
                    bs.point = Vec2{-L, 0.0} + bs.normal * r;
                    bs.curvature = 1.0 / r;
                } else if ((u -= 2.0 * quarter) < flat) {  // bottom flat, left to right
                    bs.normal = {0.0, -1.0};
                    bs.point = {-L + u, -r};
                    bs.curvature = 0.0;
                } else {  // right cap, lower quarter
                    u -= flat;
                    const double th = 1.5 * kPi + u / r;
                    bs.normal = {std::cos(th), std::sin(th)};
                    bs.point = Vec2{L, 0.0} + bs.normal * r;
                    bs.curvature = 1.0 / r;
                }
                bs.point += d.center;
                bs.tangent = perp(bs.normal);
                out.push_back(bs);
            }
            break;
        }
    }
    return out;
}

Grid Grid::covering(const DomainSpec& domain, double h, double margin) {
    if (!(h > 0.0)) throw ParameterError("grid spacing must be positive");
    const auto box = bounding_box(domain);
    const double half_x = 0.5 * (box.hi.x - box.lo.x) + margin;
    const double half_y = 0.5 * (box.hi.y - box.lo.y) + margin;
    // Small slack so that extents which are exact multiples of h stay covered.
    const int kx = static_cast<int>(std::ceil(half_x / h - 1e-9));
    const int ky = static_cast<int>(std::ceil(half_y / h - 1e-9));
    Grid g;
    g.h = h;
    g.nx = 2 * kx + 1;
    g.ny = 2 * ky + 1;
    g.origin = {domain.center.x - kx * h, domain.center.y - ky * h};
    return g;
}

std::size_t Classification::count(NodeTag tag) const {
    return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), tag));
}

Classification classify_grid(const DomainSpec& domain, const Grid& grid, double epsilon) {
    domain.validate();
    if (!(grid.h > 0.0) || grid.nx < 3 || grid.ny < 3) throw ParameterError("grid must have h > 0 and at least 3x3 nodes");
    if (epsilon < 2.0 * grid.h * (1.0 - 1e-12)) throw ParameterError("classification requires epsilon >= 2h");
    const auto box = bounding_box(domain);
    const Vec2 hi = grid.upper();
    if (box.lo.x <= grid.origin.x || box.lo.y <= grid.origin.y || box.hi.x >= hi.x || box.hi.y >= hi.y)
        throw CoverageError("grid does not cover the domain bounding box");

    Classification c;
    c.epsilon = epsilon;
    c.tags.resize(grid.size());
    c.sd.resize(grid.size());
    c.nearest.resize(grid.size());
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            const Vec2 x = grid.node(i, j);
            const double sd = sdf_eval(domain, x);
            c.sd[k] = sd;
            c.nearest[k] = nearest_boundary_point(domain, x).point;
            c.tags[k] = sd <= -epsilon ? NodeTag::interior : (sd < 0.0 ? NodeTag::band : NodeTag::exterior);
        }
    }
    return c;
}

Vec2 reflect(const Vec2& x, const Hyperplane& plane) {
    if (std::abs(norm(plane.direction) - 1.0) > 1e-12) throw ParameterError("hyperplane direction must be a unit vector");
    const double s = dot(x, plane.direction) - plane.offset;
    return x - plane.direction * (2.0 * s);
}

}  // namespace pnlab::geometry
