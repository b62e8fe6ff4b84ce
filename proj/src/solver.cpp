// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "pnlab/errors.hpp"
#include "pnlab/parallel.hpp"

namespace pnlab::solver {

using geometry::NodeTag;

std::string to_string(Scheme s) { return s == Scheme::dpp ? "dpp" : "policy-iteration"; }
std::string to_string(BoundaryRule r) { return r == BoundaryRule::ray ? "ray" : "clamp"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "dpp") return Scheme::dpp;
    if (s == "policy-iteration") return Scheme::policy_iteration;
    throw ConfigError("unknown scheme '" + s + "' (expected dpp or policy-iteration)");
}

BoundaryRule boundary_rule_from_string(const std::string& s) {
    if (s == "ray") return BoundaryRule::ray;
    if (s == "clamp") return BoundaryRule::clamp;
    throw ConfigError("unknown boundary rule '" + s + "' (expected ray or clamp)");
}

double SolverConfig::resolved_damping(double p) const {
    if (damping > 0.0) return damping;
    return p < 2.0 ? 0.5 : 1.0;
}

double SolverConfig::resolved_grad_floor(double h) const {
    return grad_floor > 0.0 ? grad_floor : operators::default_grad_floor(h);
}

void SolverConfig::validate() const {
    if (!(epsilon_over_h >= 2.0)) throw ConfigError("solver requires epsilon >= 2h");
    if (directions < 8) throw ConfigError("solver requires at least 8 directions");
    if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (damping != 0.0 && !(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (inner_sweeps < 1) throw ConfigError("inner_sweeps must be at least 1");
    if (!(jacobi_damping > 0.0 && jacobi_damping <= 1.0)) throw ConfigError("jacobi_damping must lie in (0, 1]");
    if (grad_floor < 0.0) throw ConfigError("grad_floor must be non-negative");
    if (nested_levels < 0 || nested_levels > 6) throw ConfigError("nested_levels must lie in [0, 6]");
}

namespace {

// Unit directions 2 pi k / m. When m is a multiple of 8 the set is built from
// one octant so that it is exactly invariant under the symmetries of the grid.
std::vector<Vec2> circle_directions(int m) {
    std::vector<Vec2> dirs(static_cast<std::size_t>(m));
    if (m % 8 != 0) {
        for (int k = 0; k < m; ++k) {
            const double th = 2.0 * std::numbers::pi * k / m;
            dirs[static_cast<std::size_t>(k)] = {std::cos(th), std::sin(th)};
        }
        return dirs;
    }
    const int quarter = m / 4;
    const int eighth = m / 8;
    for (int k = 0; k < quarter; ++k) {
        Vec2 d;
        if (k <= eighth) {
            const double th = 2.0 * std::numbers::pi * k / m;
            d = {std::cos(th), std::sin(th)};
        } else {
            const double th = 2.0 * std::numbers::pi * (quarter - k) / m;
            d = {std::sin(th), std::cos(th)};
        }
        dirs[static_cast<std::size_t>(k)] = d;
        for (int q = 1; q < 4; ++q) {
            d = {-d.y, d.x};
            dirs[static_cast<std::size_t>(k + q * quarter)] = d;
        }
    }
    return dirs;
}

struct StencilPoint {
    Vec2 offset;  // in grid units
    int di = 0;
    int dj = 0;
    double w00 = 0, w10 = 0, w01 = 0, w11 = 0;
    double spread = 0.0;  // (tx(1-tx) + ty(1-ty)) / 2, interpolation variance / h^2
};

std::vector<StencilPoint> make_points(const std::vector<Vec2>& dirs, double radius_h) {
    std::vector<StencilPoint> pts;
    pts.reserve(dirs.size());
    for (const auto& d : dirs) {
        StencilPoint sp;
        sp.offset = d * radius_h;
        const double fx = std::floor(sp.offset.x);
        const double fy = std::floor(sp.offset.y);
        const double tx = sp.offset.x - fx;
        const double ty = sp.offset.y - fy;
        sp.di = static_cast<int>(fx);
        sp.dj = static_cast<int>(fy);
        sp.w00 = (1.0 - tx) * (1.0 - ty);
        sp.w10 = tx * (1.0 - ty);
        sp.w01 = (1.0 - tx) * ty;
        sp.w11 = tx * ty;
        sp.spread = 0.5 * (tx * (1.0 - tx) + ty * (1.0 - ty));
        pts.push_back(sp);
    }
    return pts;
}

// Interpolation spread at an offset, computed from |x|, |y| so that every
// symmetric image of a point gets a bitwise identical value.
double spread_at(const Vec2& offset) {
    const double ax = std::abs(offset.x), ay = std::abs(offset.y);
    const double tx = ax - std::floor(ax), ty = ay - std::floor(ay);
    return 0.5 * (tx * (1.0 - tx) + ty * (1.0 - ty));
}

// Radius along d at which the bilinear sample of a quadratic with isotropic
// Hessian -c I reads exactly like the true value at distance eps:
//   r^2 = eps^2 - 2 spread(r d)   (grid units).
double corrected_radius(const Vec2& d, double eps_h) {
    double r = eps_h;
    for (int it = 0; it < 100; ++it) {
        const double next = std::sqrt(eps_h * eps_h - 2.0 * spread_at(d * r));
        if (next == r) break;
        r = next;
    }
    return r;
}

std::vector<StencilPoint> make_points(const std::vector<Vec2>& dirs, const std::vector<double>& radii_h) {
    std::vector<StencilPoint> pts;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        auto one = make_points({dirs[k]}, radii_h[k]);
        pts.push_back(one.front());
    }
    return pts;
}

double mean_spread(const std::vector<StencilPoint>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += p.spread;
    return s / static_cast<double>(pts.size());
}

// Per-axis second moment (in h^2) of the bilinear sphere mean at radius r:
// r^2 / 2 + mean interpolation variance.
double mean_moment(const std::vector<Vec2>& dirs, double radius_h) {
    return 0.5 * radius_h * radius_h + mean_spread(make_points(dirs, radius_h));
}

// Affine value of one stencil point at a near-boundary node:
//   value = self * u(x) + constant + sum_t w[t] * u[idx[t]]
// with taps [first, first + count) of the shared tap arrays.
struct Term {
    double self = 0.0;
    double constant = 0.0;
    std::uint32_t first = 0;
    std::uint32_t count = 0;
};

struct Tap {
    std::uint32_t idx;
    double w;
};

// Near-boundary node. slot[first_slot + k] is -1 when stencil point k
// (sphere-mean points first, then the extreme set) interpolates interior
// values only, and otherwise indexes its stored affine term.
struct SpecialNode {
    std::size_t node = 0;
    std::size_t first_slot = 0;
};

}  // namespace

struct DppOperator::Impl {
    DomainSpec domain;
    Grid grid;
    ProblemSpec problem;
    SolverConfig config;
    geometry::Classification cls;
    oracles::DppWeights weights;
    double eps = 0.0;
    double mean_radius = 0.0;
    double source = 0.0;
    bool use_extremes = true;

    std::vector<StencilPoint> mean_pts;
    std::vector<StencilPoint> ext_pts;
    struct MeanTap {
        int di, dj;
        double w;
    };
    std::vector<MeanTap> mean_taps;  // merged bilinear sphere-mean stencil

    std::vector<std::uint8_t> regular;
    std::vector<std::pair<int, int>> row_span;  // [lo, hi] of regular nodes per row, lo > hi if none
    std::vector<SpecialNode> special;
    std::vector<Term> terms;
    std::vector<Tap> taps;
    std::vector<std::int32_t> slots;
    std::vector<std::ptrdiff_t> mean_base, ext_base;  // lower-left corner offsets
    std::size_t n_regular = 0;

    void build();
    Term make_term(int i, int j, const StencilPoint& sp);
    bool point_is_regular(int i, int j, const StencilPoint& sp) const;
    void sweep_rows(const double* u, double* out) const;
    double solve_special(const SpecialNode& s, const double* u) const;
    double term_value(const Term& t, const double* u) const;
};

Term DppOperator::Impl::make_term(int i, int j, const StencilPoint& sp) {
    Term t;
    t.first = static_cast<std::uint32_t>(taps.size());
    const Vec2 x = grid.node(i, j);
    const Vec2 d = sp.offset * grid.h;
    const Vec2 y = x + d;
    const bool ray = config.boundary_rule == BoundaryRule::ray;

    auto in_grid = [&](int a, int b) { return a >= 0 && b >= 0 && a < grid.nx && b < grid.ny; };
    auto usable = [&](int a, int b) { return in_grid(a, b) && cls.tags[grid.index(a, b)] != NodeTag::exterior; };
    auto push = [&](int a, int b, double w) {
        taps.push_back({static_cast<std::uint32_t>(grid.index(a, b)), w});
    };

    // Value at x + dir (outside the domain). Ray rule: quadratic through the
    // opposite point x - dir, x itself and the crossing b = x + tau dir, or
    // linear through x and b when the opposite point is unusable.
    // `opposite` pushes the taps of u(x - dir) scaled by its argument and
    // returns false if that value is unavailable.
    auto boundary_value = [&](const Vec2& dir, double weight, const Vec2& target, auto&& opposite) {
        double tau = geometry::ray_exit(domain, x, dir);
        if (!ray || !std::isfinite(tau)) {
            t.constant += weight * problem.g(geometry::nearest_boundary_point(domain, target).point);
            return;
        }
        tau = std::clamp(tau, 1e-12, 1.0);
        const double gb = problem.g(x + dir * tau);
        if (opposite(weight * (1.0 - tau) / (1.0 + tau))) {
            t.self += weight * (-2.0 * (1.0 - tau) / tau);
            t.constant += weight * 2.0 / (tau * (1.0 + tau)) * gb;
        } else {
            t.self += weight * (1.0 - 1.0 / tau);
            t.constant += weight * gb / tau;
        }
    };

    if (geometry::sdf_eval(domain, y) >= 0.0) {
        auto opposite = [&](double w) {
            const double ox = -sp.offset.x, oy = -sp.offset.y;
            const double fx = std::floor(ox), fy = std::floor(oy);
            const double tx = ox - fx, ty = oy - fy;
            const int i0 = i + static_cast<int>(fx), j0 = j + static_cast<int>(fy);
            // Zero-weight corners are ignored so that axis-aligned offsets
            // keep the mirror symmetry of the stencil.
            const int ci[4] = {i0, i0 + 1, i0, i0 + 1};
            const int cj[4] = {j0, j0, j0 + 1, j0 + 1};
            const double cw[4] = {(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty};
            for (int c = 0; c < 4; ++c)
                if (cw[c] != 0.0 && !usable(ci[c], cj[c])) return false;
            if (geometry::sdf_eval(domain, x - d) >= 0.0) return false;
            for (int c = 0; c < 4; ++c)
                if (cw[c] != 0.0) push(ci[c], cj[c], w * cw[c]);
            return true;
        };
        boundary_value(d, 1.0, y, opposite);
    } else {
        const int ci[4] = {i + sp.di, i + sp.di + 1, i + sp.di, i + sp.di + 1};
        const int cj[4] = {j + sp.dj, j + sp.dj, j + sp.dj + 1, j + sp.dj + 1};
        const double cw[4] = {sp.w00, sp.w10, sp.w01, sp.w11};
        for (int c = 0; c < 4; ++c) {
            if (!in_grid(ci[c], cj[c])) throw CoverageError("interpolation point outside grid bounding box");
            if (cw[c] == 0.0) continue;
            if (cls.tags[grid.index(ci[c], cj[c])] != NodeTag::exterior) {
                push(ci[c], cj[c], cw[c]);
                continue;
            }
            const int oi = 2 * i - ci[c], oj = 2 * j - cj[c];
            auto opposite = [&](double w) {
                if (!usable(oi, oj)) return false;
                push(oi, oj, w);
                return true;
            };
            const Vec2 corner = grid.node(ci[c], cj[c]);
            boundary_value(corner - x, cw[c], corner, opposite);
        }
    }
    t.count = static_cast<std::uint32_t>(taps.size()) - t.first;
    return t;
}

bool DppOperator::Impl::point_is_regular(int i, int j, const StencilPoint& sp) const {
    const int i0 = i + sp.di, j0 = j + sp.dj;
    if (i0 < 0 || j0 < 0 || i0 + 1 >= grid.nx || j0 + 1 >= grid.ny) return false;
    for (int dj = 0; dj <= 1; ++dj)
        for (int di = 0; di <= 1; ++di)
            if (cls.tags[grid.index(i0 + di, j0 + dj)] == NodeTag::exterior) return false;
    const Vec2 y = grid.node(i, j) + sp.offset * grid.h;
    return geometry::sdf_eval(domain, y) < 0.0;
}

void DppOperator::Impl::build() {
    config.validate();
    problem.params.validate(false);
    if (problem.params.n != 2) throw ConfigError("the grid solver works in dimension n = 2");
    eps = config.epsilon(grid.h);
    weights = oracles::dpp_weights(problem.params.p, problem.params.n);
    source = weights.source_coeff * eps * eps * problem.rhs;
    use_extremes = weights.alpha != 0.0;

    const auto dirs = circle_directions(config.directions);
    const double eps_h = config.epsilon_over_h;
    std::vector<double> ext_radii(dirs.size(), eps_h);
    if (config.moment_matched_mean)
        for (std::size_t k = 0; k < dirs.size(); ++k) ext_radii[k] = corrected_radius(dirs[k], eps_h);
    ext_pts = make_points(dirs, ext_radii);

    // Moment matching: bilinear interpolation adds a diffusion of size
    // mean(spread) h^2 per axis. The sphere-mean radius r is chosen so that
    // moment(r) = eps^2 / 2 (units of h^2); together with the per-direction
    // extreme radii the stencil is exact on quadratics with isotropic Hessian.
    double r_h = eps_h;
    if (config.moment_matched_mean) {
        const double target = 0.5 * eps_h * eps_h;
        double lo = 0.5 * eps_h, hi = 1.5 * eps_h;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * eps_h; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mean_moment(dirs, mid) < target ? lo : hi) = mid;
        }
        r_h = 0.5 * (lo + hi);
    }
    mean_radius = r_h * grid.h;
    mean_pts = make_points(dirs, r_h);

    // Merge the sphere-mean points into one linear stencil.
    std::map<std::pair<int, int>, double> stencil;
    const double inv_m = 1.0 / static_cast<double>(mean_pts.size());
    for (const auto& sp : mean_pts) {
        stencil[{sp.di, sp.dj}] += inv_m * sp.w00;
        stencil[{sp.di + 1, sp.dj}] += inv_m * sp.w10;
        stencil[{sp.di, sp.dj + 1}] += inv_m * sp.w01;
        stencil[{sp.di + 1, sp.dj + 1}] += inv_m * sp.w11;
    }
    mean_taps.clear();
    for (const auto& [key, w] : stencil)
        if (w != 0.0) mean_taps.push_back({key.first, key.second, w});

    cls = geometry::classify_grid(domain, grid, eps);

    const double reach = (std::max(eps, mean_radius) + 2.0 * grid.h);
    regular.assign(grid.size(), 0);
    row_span.assign(static_cast<std::size_t>(grid.ny), {grid.nx, -1});
    special.clear();
    terms.clear();
    taps.clear();
    slots.clear();
    mean_base.clear();
    ext_base.clear();
    for (const auto& sp : mean_pts) mean_base.push_back(static_cast<std::ptrdiff_t>(sp.dj) * grid.nx + sp.di);
    for (const auto& sp : ext_pts) ext_base.push_back(static_cast<std::ptrdiff_t>(sp.dj) * grid.nx + sp.di);
    n_regular = 0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            if (cls.tags[k] == NodeTag::exterior) continue;
            bool is_regular = true;
            if (cls.sd[k] > -reach) {
                for (const auto& sp : mean_pts) is_regular = is_regular && point_is_regular(i, j, sp);
                if (use_extremes)
                    for (const auto& sp : ext_pts) is_regular = is_regular && point_is_regular(i, j, sp);
            } else {
                // Far from the boundary; only the grid extent can interfere.
                for (const auto* set : {&mean_pts, &ext_pts}) {
                    for (const auto& sp : *set) {
                        const int i0 = i + sp.di, j0 = j + sp.dj;
                        if (i0 < 0 || j0 < 0 || i0 + 1 >= grid.nx || j0 + 1 >= grid.ny)
                            throw CoverageError("interpolation point outside grid bounding box");
                    }
                }
            }
            if (is_regular) {
                regular[k] = 1;
                ++n_regular;
                auto& span = row_span[static_cast<std::size_t>(j)];
                span.first = std::min(span.first, i);
                span.second = std::max(span.second, i);
            } else {
                special.push_back({k, slots.size()});
                auto add = [&](const StencilPoint& sp) {
                    if (point_is_regular(i, j, sp)) {
                        slots.push_back(-1);
                    } else {
                        slots.push_back(static_cast<std::int32_t>(terms.size()));
                        terms.push_back(make_term(i, j, sp));
                    }
                };
                for (const auto& sp : mean_pts) add(sp);
                if (use_extremes)
                    for (const auto& sp : ext_pts) add(sp);
            }
        }
    }
}

namespace {

constexpr int kLaneWidth = 4;
using Lane = double __attribute__((vector_size(kLaneWidth * sizeof(double))));

inline Lane load_lane(const double* p) {
    Lane v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline Lane splat(double x) { return x - Lane{}; }

// Updates 4 W consecutive regular nodes starting at `base` (pointer to u at
// the first node). Accumulators stay in registers across all taps.
template <int W>
inline void dpp_block(const double* base, std::ptrdiff_t nx, const std::ptrdiff_t* mean_off, const double* mean_w,
                      std::size_t nt, const std::ptrdiff_t* ext_off, const std::array<double, 4>* ext_w,
                      std::size_t ne, double beta, double half_alpha, double src, double* out) {
    Lane acc[W];
    for (int b = 0; b < W; ++b) acc[b] = splat(0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const double* s = base + mean_off[t];
        const Lane w = splat(mean_w[t]);
        for (int b = 0; b < W; ++b) acc[b] += w * load_lane(s + kLaneWidth * b);
    }
    const Lane vb = splat(beta), vs = splat(src);
    if (ne == 0) {
        for (int b = 0; b < W; ++b) {
            const Lane r = vb * acc[b] + vs;
            std::memcpy(out + kLaneWidth * b, &r, sizeof(r));
        }
        return;
    }
    Lane mx[W], mn[W];
    for (int b = 0; b < W; ++b) {
        mx[b] = splat(-std::numeric_limits<double>::infinity());
        mn[b] = splat(std::numeric_limits<double>::infinity());
    }
    for (std::size_t t = 0; t < ne; ++t) {
        const double* r0 = base + ext_off[t];
        const double* r1 = r0 + nx;
        const Lane w0 = splat(ext_w[t][0]), w1 = splat(ext_w[t][1]), w2 = splat(ext_w[t][2]), w3 = splat(ext_w[t][3]);
        for (int b = 0; b < W; ++b) {
            const Lane v = w0 * load_lane(r0 + kLaneWidth * b) + w1 * load_lane(r0 + kLaneWidth * b + 1) + w2 * load_lane(r1 + kLaneWidth * b) +
                           w3 * load_lane(r1 + kLaneWidth * b + 1);
            mx[b] = mx[b] < v ? v : mx[b];
            mn[b] = mn[b] > v ? v : mn[b];
        }
    }
    const Lane ha = splat(half_alpha);
    for (int b = 0; b < W; ++b) {
        const Lane r = vb * acc[b] + ha * (mx[b] + mn[b]) + vs;
        std::memcpy(out + kLaneWidth * b, &r, sizeof(r));
    }
}

// Scalar version for the tail of a row.
inline double dpp_node(const double* base, std::ptrdiff_t nx, const std::ptrdiff_t* mean_off, const double* mean_w,
                       std::size_t nt, const std::ptrdiff_t* ext_off, const std::array<double, 4>* ext_w,
                       std::size_t ne, double beta, double half_alpha, double src) {
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) acc += mean_w[t] * base[mean_off[t]];
    if (ne == 0) return beta * acc + src;
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < ne; ++t) {
        const double* r0 = base + ext_off[t];
        const double* r1 = r0 + nx;
        const auto& w = ext_w[t];
        const double v = w[0] * r0[0] + w[1] * r0[1] + w[2] * r1[0] + w[3] * r1[1];
        mx = mx < v ? v : mx;
        mn = mn > v ? v : mn;
    }
    return beta * acc + half_alpha * (mx + mn) + src;
}

}  // namespace

void DppOperator::Impl::sweep_rows(const double* u, double* out) const {
    const std::ptrdiff_t nx = grid.nx;
    const double beta = weights.beta;
    const double half_alpha = 0.5 * weights.alpha;
    const double src = source;
    std::vector<std::ptrdiff_t> mean_off, ext_off;
    std::vector<double> mean_w;
    std::vector<std::array<double, 4>> ext_w;
    for (const auto& t : mean_taps) {
        mean_off.push_back(static_cast<std::ptrdiff_t>(t.dj) * nx + t.di);
        mean_w.push_back(t.w);
    }
    if (use_extremes) {
        for (const auto& sp : ext_pts) {
            ext_off.push_back(static_cast<std::ptrdiff_t>(sp.dj) * nx + sp.di);
            ext_w.push_back({sp.w00, sp.w10, sp.w01, sp.w11});
        }
    }
    parallel_for(0, grid.ny, [&](int j) {
        const auto [lo, hi] = row_span[static_cast<std::size_t>(j)];
        if (lo > hi) return;
        const int len = hi - lo + 1;
        std::vector<double> row_out(static_cast<std::size_t>(len));
        const double* base = u + static_cast<std::ptrdiff_t>(j) * nx + lo;
        constexpr int kLanes = 4;
        int i = 0;
        for (; i + kLaneWidth * kLanes <= len; i += kLaneWidth * kLanes)
            dpp_block<kLanes>(base + i, nx, mean_off.data(), mean_w.data(), mean_off.size(), ext_off.data(),
                              ext_w.data(), ext_off.size(), beta, half_alpha, src, row_out.data() + i);
        for (; i < len; ++i)
            row_out[static_cast<std::size_t>(i)] = dpp_node(base + i, nx, mean_off.data(), mean_w.data(), mean_off.size(),
                                                            ext_off.data(), ext_w.data(), ext_off.size(), beta,
                                                            half_alpha, src);
        const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx);
        for (int c = 0; c < len; ++c) {
            const std::size_t k = row + static_cast<std::size_t>(lo + c);
            if (regular[k]) out[k] = row_out[static_cast<std::size_t>(c)];
        }
    });
}

double DppOperator::Impl::term_value(const Term& t, const double* u) const {
    double v = t.constant;
    const Tap* tp = taps.data() + t.first;
    for (std::uint32_t c = 0; c < t.count; ++c) v += tp[c].w * u[tp[c].idx];
    return v;
}

double DppOperator::Impl::solve_special(const SpecialNode& s, const double* u) const {
    const std::size_t m_ext = use_extremes ? ext_pts.size() : 0;
    const std::int32_t* slot = slots.data() + s.first_slot;
    const std::ptrdiff_t nx = grid.nx;
    const double* here = u + s.node;
    auto point_value = [&](const StencilPoint& sp, std::ptrdiff_t base, std::int32_t term, double& self) {
        if (term < 0) {
            const double* r0 = here + base;
            const double* r1 = r0 + nx;
            self = 0.0;
            return sp.w00 * r0[0] + sp.w10 * r0[1] + sp.w01 * r1[0] + sp.w11 * r1[1];
        }
        const Term& tk = terms[static_cast<std::size_t>(term)];
        self = tk.self;
        return term_value(tk, u);
    };
    const std::size_t m_mean = mean_pts.size();
    double mean_a = 0.0, mean_s = 0.0;
    for (std::size_t k = 0; k < m_mean; ++k) {
        double self;
        mean_a += point_value(mean_pts[k], mean_base[k], slot[k], self);
        mean_s += self;
    }
    mean_a /= static_cast<double>(m_mean);
    mean_s /= static_cast<double>(m_mean);
    const double beta = weights.beta;
    const double half_alpha = 0.5 * weights.alpha;

    if (!use_extremes) {
        // u = beta (A + S u) + src, S <= 0.
        return (beta * mean_a + source) / (1.0 - beta * mean_s);
    }

    std::array<double, 256> a_buf;
    std::array<double, 256> s_buf;
    std::vector<double> a_heap, s_heap;
    double* ea = a_buf.data();
    double* es = s_buf.data();
    if (m_ext > a_buf.size()) {
        a_heap.resize(m_ext);
        s_heap.resize(m_ext);
        ea = a_heap.data();
        es = s_heap.data();
    }
    // Points with no dependence on u(x) enter max/min as constants; only the
    // few boundary points with a self coefficient move with v.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    double cmax = -kInf, cmin = kInf;
    std::size_t n_moving = 0;
    for (std::size_t k = 0; k < m_ext; ++k) {
        double self;
        const double a = point_value(ext_pts[k], ext_base[k], slot[m_mean + k], self);
        if (self == 0.0) {
            cmax = cmax < a ? a : cmax;
            cmin = cmin > a ? a : cmin;
        } else {
            ea[n_moving] = a;
            es[n_moving] = self;
            ++n_moving;
        }
    }
    const bool implicit = mean_s != 0.0 || n_moving > 0;

    // R(v) = beta (A + S v) + (alpha/2)(max_k(a_k + s_k v) + min_k(a_k + s_k v)) + src.
    // Ties take the one-sided slope that keeps Newton monotone.
    auto eval = [&](double v, double& slope) {
        double vmax = cmax, vmin = cmin, smax = 0.0, smin = 0.0;
        for (std::size_t k = 0; k < n_moving; ++k) {
            const double val = ea[k] + es[k] * v;
            if (val > vmax || (val == vmax && es[k] > smax)) { vmax = val; smax = es[k]; }
            if (val < vmin || (val == vmin && es[k] < smin)) { vmin = val; smin = es[k]; }
        }
        slope = 1.0 - beta * mean_s - half_alpha * (smax + smin);
        return v - (beta * (mean_a + mean_s * v) + half_alpha * (vmax + vmin) + source);
    };

    const double v0 = u[s.node];
    double slope = 1.0;
    double g0 = eval(v0, slope);
    if (!implicit) return v0 - g0;
    if (g0 == 0.0) return v0;

    // Newton is exact once the active max/min pair stops changing.
    {
        double v = v0, gv = g0;
        for (int it = 0; it < 4 && slope > 0.0; ++it) {
            const double next = v - gv / slope;
            double next_slope = slope;
            const double gn = eval(next, next_slope);
            if (std::abs(gn) <= 1e-14 * (1.0 + std::abs(next))) return next;
            v = next;
            gv = gn;
            slope = next_slope;
        }
    }
    slope = 1.0;

    // Bracket the root of the piecewise-linear residual g(v) = v - R(v).
    double lo, hi, glo, ghi;
    double step = std::abs(g0);
    if (g0 > 0.0) {
        hi = v0; ghi = g0;
        lo = v0 - step;
        glo = eval(lo, slope);
        for (int k = 0; k < 80 && glo > 0.0; ++k) {
            hi = lo; ghi = glo;
            step *= 2.0;
            lo = v0 - step;
            glo = eval(lo, slope);
        }
    } else {
        lo = v0; glo = g0;
        hi = v0 + step;
        ghi = eval(hi, slope);
        for (int k = 0; k < 80 && ghi < 0.0; ++k) {
            lo = hi; glo = ghi;
            step *= 2.0;
            hi = v0 + step;
            ghi = eval(hi, slope);
        }
    }
    if (glo > 0.0 || ghi < 0.0) return v0 - g0;  // no sign change; fall back to the explicit update

    // Safeguarded Newton (exact on each linear piece) with regula falsi fallback.
    double v = glo == 0.0 ? lo : (ghi == 0.0 ? hi : lo - glo * (hi - lo) / (ghi - glo));
    for (int it = 0; it < 100; ++it) {
        const double gv = eval(v, slope);
        if (gv == 0.0) return v;
        if (gv < 0.0) { lo = v; glo = gv; }
        else { hi = v; ghi = gv; }
        if (hi - lo <= 1e-15 * (1.0 + std::abs(v))) break;
        double next = slope > 0.0 ? v - gv / slope : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = lo - glo * (hi - lo) / (ghi - glo);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        v = next;
    }
    return v;
}

DppOperator::DppOperator(const DomainSpec& domain, const Grid& grid, const ProblemSpec& problem, const SolverConfig& config)
    : impl_(std::make_unique<Impl>()) {
    domain.validate();
    impl_->domain = domain;
    impl_->grid = grid;
    impl_->problem = problem;
    impl_->config = config;
    impl_->build();
}

DppOperator::~DppOperator() = default;
DppOperator::DppOperator(DppOperator&&) noexcept = default;
DppOperator& DppOperator::operator=(DppOperator&&) noexcept = default;

GridField DppOperator::initial_field() const {
    GridField f(impl_->grid, impl_->cls.tags, 0.0);
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (impl_->cls.tags[k] == NodeTag::exterior) f.values[k] = impl_->problem.g(impl_->cls.nearest[k]);
    return f;
}

GridField DppOperator::apply(const GridField& field) const {
    GridField out = field;
    step(field, out, 1.0);
    return out;
}

double DppOperator::step(const GridField& in, GridField& out, double omega) const {
    const auto& im = *impl_;
    if (!(in.grid == im.grid) || in.values.size() != im.grid.size()) throw ConfigError("field grid does not match the operator grid");
    if (out.values.size() != in.values.size()) out = in;
    out.tags = im.cls.tags;
    const double* u = in.values.data();
    double* v = out.values.data();
    im.sweep_rows(u, v);
    const int n_special = static_cast<int>(im.special.size());
    parallel_for(0, n_special, [&](int s) {
        const auto& sn = im.special[static_cast<std::size_t>(s)];
        v[sn.node] = im.solve_special(sn, u);
    });
    double sup = 0.0;
    for (std::size_t k = 0; k < im.grid.size(); ++k) {
        if (im.cls.tags[k] == NodeTag::exterior) {
            v[k] = u[k];
            continue;
        }
        const double next = omega == 1.0 ? v[k] : (1.0 - omega) * u[k] + omega * v[k];
        sup = std::max(sup, std::abs(next - u[k]));
        v[k] = next;
    }
    return sup;
}

const geometry::Classification& DppOperator::classification() const { return impl_->cls; }
const oracles::DppWeights& DppOperator::weights() const { return impl_->weights; }
double DppOperator::epsilon() const { return impl_->eps; }
double DppOperator::mean_radius() const { return impl_->mean_radius; }
std::size_t DppOperator::regular_count() const { return impl_->n_regular; }
std::size_t DppOperator::special_count() const { return impl_->special.size(); }

GridField dpp_sweep(const GridField& field, const DomainSpec& domain, const ProblemSpec& problem, const SolverConfig& config) {
    DppOperator op(domain, field.grid, problem, config);
    return op.apply(field);
}

Grid solver_grid(const DomainSpec& domain, double h, const SolverConfig& config) {
    const double margin = 1.6 * config.epsilon(h) + 3.0 * h;
    return Grid::covering(domain, h, margin);
}

ResidualReport residual(const GridField& field, const ProblemSpec& problem, double grad_floor) {
    const auto eval = operators::classical_field_eval(field, problem.params, grad_floor);
    ResidualReport r;
    std::size_t interior = 0, masked = 0;
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        if (field.tags[k] != NodeTag::interior) continue;
        ++interior;
        if (!eval.mask[k]) {
            ++masked;
            continue;
        }
        r.sup_residual = std::max(r.sup_residual, std::abs(-eval.values.values[k] - problem.rhs));
        ++r.evaluated;
    }
    r.masked_fraction = interior > 0 ? static_cast<double>(masked) / static_cast<double>(interior) : 0.0;
    return r;
}

void prolongate(const GridField& coarse, GridField& target) {
    const Grid& cg = coarse.grid;
    const Grid& fg = target.grid;
    for (int j = 0; j < fg.ny; ++j) {
        for (int i = 0; i < fg.nx; ++i) {
            const std::size_t k = fg.index(i, j);
            if (target.tags[k] == NodeTag::exterior) continue;
            const Vec2 x = fg.node(i, j);
            const double gx = std::clamp((x.x - cg.origin.x) / cg.h, 0.0, static_cast<double>(cg.nx - 1));
            const double gy = std::clamp((x.y - cg.origin.y) / cg.h, 0.0, static_cast<double>(cg.ny - 1));
            const int i0 = std::min(static_cast<int>(gx), cg.nx - 2);
            const int j0 = std::min(static_cast<int>(gy), cg.ny - 2);
            const double tx = gx - i0, ty = gy - j0;
            target.values[k] = (1 - tx) * (1 - ty) * coarse.at(i0, j0) + tx * (1 - ty) * coarse.at(i0 + 1, j0) +
                               (1 - tx) * ty * coarse.at(i0, j0 + 1) + tx * ty * coarse.at(i0 + 1, j0 + 1);
        }
    }
}

namespace {

Solution iterate(const DppOperator& op, GridField u, const ProblemSpec& problem, const Grid& grid,
                 const SolverConfig& config, std::chrono::steady_clock::time_point start) {
    const double omega = config.resolved_damping(problem.params.p);
    GridField next = u;
    Solution sol;
    sol.report.scheme = to_string(Scheme::dpp);
    for (int it = 1; it <= config.max_iterations; ++it) {
        const double upd = op.step(u, next, omega);
        std::swap(u, next);
        sol.report.iterations = it;
        sol.report.final_update = upd;
        if (upd < config.tolerance) {
            sol.report.converged = true;
            break;
        }
    }
    const auto res = residual(u, problem, config.resolved_grad_floor(grid.h));
    sol.report.residual = res.sup_residual;
    sol.report.masked_fraction = res.masked_fraction;
    sol.field = std::move(u);
    sol.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

}  // namespace

Solution solve_from(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config,
                    const GridField& initial) {
    const auto start = std::chrono::steady_clock::now();
    DppOperator op(domain, grid, problem, config);
    GridField u = op.initial_field();
    prolongate(initial, u);
    return iterate(op, std::move(u), problem, grid, config, start);
}

Solution solve(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.nested_levels > 0) {
        SolverConfig coarse_cfg = config;
        coarse_cfg.nested_levels = config.nested_levels - 1;
        const Grid coarse_grid = solver_grid(domain, 2.0 * grid.h, coarse_cfg);
        const Solution coarse = solve(problem, domain, coarse_grid, coarse_cfg);
        Solution sol = solve_from(problem, domain, grid, config, coarse.field);
        sol.report.coarse_iterations = coarse.report.iterations + coarse.report.coarse_iterations;
        sol.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return sol;
    }
    DppOperator op(domain, grid, problem, config);
    return iterate(op, op.initial_field(), problem, grid, config, start);
}

Solution run(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config) {
    return config.scheme == Scheme::dpp ? solve(problem, domain, grid, config) : policy_solve(problem, domain, grid, config);
}

}  // namespace pnlab::solver
