// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "pnlab/errors.hpp"
#include "pnlab/parallel.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::solver {

using geometry::NodeTag;

namespace {

// Neighbour order: E, W, N, S, NE, SW, NW, SE. Opposites are paired (k ^ 1).
constexpr std::array<int, 8> kDi = {1, -1, 0, 0, 1, -1, -1, 1};
constexpr std::array<int, 8> kDj = {0, 0, 1, -1, 1, -1, 1, -1};

// Value at neighbour k written as an affine function of the unknowns:
//   u_k = w_opp * u[opp] + w_self * u_C + constant.
struct Link {
    std::uint32_t idx = 0;  // neighbour (real) or opposite neighbour (ghost)
    bool ghost = false;
    double w_far = 0.0;
    double w_self = 0.0;
    double constant = 0.0;
};

struct Row {
    std::uint32_t node = 0;
    std::array<Link, 8> links{};
};

struct Entry {
    std::uint32_t idx;
    double w;
};

Solution policy_solve_from(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid,
                           const SolverConfig& config, const GridField* initial) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    problem.params.validate(false);
    domain.validate();
    if (problem.params.n != 2) throw ConfigError("the grid solver works in dimension n = 2");

    const double h = grid.h;
    const auto cls = geometry::classify_grid(domain, grid, config.epsilon(h));
    GridField u(grid, cls.tags, 0.0);
    for (std::size_t k = 0; k < u.values.size(); ++k)
        if (cls.tags[k] == NodeTag::exterior) u.values[k] = problem.g(cls.nearest[k]);
    if (initial) prolongate(*initial, u);

    // Shortley-Weller ghosts: an exterior neighbour is replaced by the quadratic
    // through the opposite neighbour, the node and the boundary crossing
    // (linear when the opposite neighbour is exterior as well).
    std::vector<Row> rows;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            if (cls.tags[k] == NodeTag::exterior) continue;
            Row row;
            row.node = static_cast<std::uint32_t>(k);
            const Vec2 x = grid.node(i, j);
            for (int d = 0; d < 8; ++d) {
                const int ni = i + kDi[static_cast<std::size_t>(d)];
                const int nj = j + kDj[static_cast<std::size_t>(d)];
                if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny)
                    throw CoverageError("policy stencil leaves the grid");
                const std::size_t nk = grid.index(ni, nj);
                Link& link = row.links[static_cast<std::size_t>(d)];
                if (cls.tags[nk] != NodeTag::exterior) {
                    link.idx = static_cast<std::uint32_t>(nk);
                    link.w_far = 1.0;
                    continue;
                }
                link.ghost = true;
                const Vec2 step = grid.node(ni, nj) - x;
                double t = geometry::ray_exit(domain, x, step);
                if (!std::isfinite(t)) t = 1.0;
                t = std::clamp(t, 1e-6, 1.0);
                const double gb = problem.g(x + step * t);
                const int oi = i - kDi[static_cast<std::size_t>(d)];
                const int oj = j - kDj[static_cast<std::size_t>(d)];
                const bool opp_real = oi >= 0 && oj >= 0 && oi < grid.nx && oj < grid.ny &&
                                      cls.tags[grid.index(oi, oj)] != NodeTag::exterior;
                if (opp_real) {
                    link.idx = static_cast<std::uint32_t>(grid.index(oi, oj));
                    link.w_far = (1.0 - t) / (1.0 + t);
                    link.w_self = -2.0 * (1.0 - t) / t;
                    link.constant = 2.0 / (t * (1.0 + t)) * gb;
                } else {
                    link.idx = static_cast<std::uint32_t>(k);
                    link.w_far = 0.0;
                    link.w_self = 1.0 - 1.0 / t;
                    link.constant = gb / t;
                }
            }
            rows.push_back(row);
        }
    }
    const int n_rows = static_cast<int>(rows.size());

    const double tw = problem.params.trace_weight();
    const double dw = problem.params.direction_weight();
    const double floor = config.resolved_grad_floor(h);
    const double h2f = h * h * problem.rhs;

    // Frozen linear operator, one row per unknown: diag * u_C + sum w u = rhs_c.
    std::vector<double> diag(rows.size()), rhs(rows.size());
    std::vector<std::array<Entry, 8>> entries(rows.size());

    auto freeze = [&](const std::vector<double>& v) {
        parallel_for(0, n_rows, [&](int r) {
            const Row& row = rows[static_cast<std::size_t>(r)];
            auto value = [&](int d) {
                const Link& l = row.links[static_cast<std::size_t>(d)];
                if (!l.ghost) return v[l.idx];
                return l.w_far * v[l.idx] + l.w_self * v[row.node] + l.constant;
            };
            const double gx = (value(0) - value(1)) / (2.0 * h);
            const double gy = (value(2) - value(3)) / (2.0 * h);
            const double gn = std::hypot(gx, gy);
            // Below the floor q q^T is blended towards I/2 with weight (|g|/floor)^2
            // so the frozen coefficients stay continuous in u; a hard switch lets
            // nodes near a critical point flip between refreshes indefinitely.
            double a = tw + 0.5 * dw, b = a, c = 0.0;
            if (gn > 0.0) {
                const double wq = gn >= floor ? 1.0 : (gn / floor) * (gn / floor);
                const double qx = gx / gn, qy = gy / gn;
                a = tw + dw * (wq * qx * qx + 0.5 * (1.0 - wq));
                b = tw + dw * (wq * qy * qy + 0.5 * (1.0 - wq));
                c = dw * wq * qx * qy;
            }
            // -(a u_xx + b u_yy + 2 c u_xy) with the mixed term on the diagonal
            // pair aligned with sign(c), which keeps off-diagonals non-positive
            // whenever min(a, b) >= |c|.
            const double ac = std::abs(c);
            std::array<double, 8> s = {-(a - ac), -(a - ac), -(b - ac), -(b - ac), 0.0, 0.0, 0.0, 0.0};
            if (c > 0.0) s[4] = s[5] = -ac;
            else s[6] = s[7] = -ac;
            double dg = 2.0 * a + 2.0 * b - 2.0 * ac;
            double rc = h2f;
            auto& e = entries[static_cast<std::size_t>(r)];
            for (int d = 0; d < 8; ++d) {
                const Link& l = row.links[static_cast<std::size_t>(d)];
                const double sd = s[static_cast<std::size_t>(d)];
                e[static_cast<std::size_t>(d)] = {l.idx, sd * l.w_far};
                if (l.ghost) {
                    dg += sd * l.w_self;
                    rc -= sd * l.constant;
                }
            }
            diag[static_cast<std::size_t>(r)] = dg;
            rhs[static_cast<std::size_t>(r)] = rc;
        });
    };

    const double omega = config.jacobi_damping;
    std::vector<double> next = u.values;
    auto sweep = [&]() {
        const std::vector<double>& cur = u.values;
        parallel_for(0, n_rows, [&](int r) {
            const auto rr = static_cast<std::size_t>(r);
            const auto node = rows[rr].node;
            double acc = rhs[rr];
            for (const Entry& e : entries[rr]) acc -= e.w * cur[e.idx];
            const double target = acc / diag[rr];
            next[node] = (1.0 - omega) * cur[node] + omega * target;
        });
        double sup = 0.0;
        for (const Row& row : rows) sup = std::max(sup, std::abs(next[row.node] - u.values[row.node]));
        std::swap(u.values, next);
        return sup;
    };

    Solution sol;
    sol.report.scheme = to_string(Scheme::policy_iteration);
    int sweeps = 0;
    while (sweeps < config.max_iterations) {
        freeze(u.values);
        for (int inner = 0; inner < config.inner_sweeps && sweeps < config.max_iterations; ++inner) {
            const double upd = sweep();
            ++sweeps;
            sol.report.final_update = upd;
            // Converged when the first sweep after a direction refresh barely moves.
            if (inner == 0 && upd < config.tolerance) {
                sol.report.converged = true;
                break;
            }
        }
        if (sol.report.converged) break;
    }
    sol.report.iterations = sweeps;
    const auto res = residual(u, problem, floor);
    sol.report.residual = res.sup_residual;
    sol.report.masked_fraction = res.masked_fraction;
    sol.field = std::move(u);
    sol.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

}  // namespace

Solution policy_solve(const ProblemSpec& problem, const DomainSpec& domain, const Grid& grid, const SolverConfig& config) {
    if (config.nested_levels <= 0) return policy_solve_from(problem, domain, grid, config, nullptr);
    SolverConfig coarse_cfg = config;
    coarse_cfg.nested_levels = config.nested_levels - 1;
    const Solution coarse = policy_solve(problem, domain, solver_grid(domain, 2.0 * grid.h, coarse_cfg), coarse_cfg);
    Solution sol = policy_solve_from(problem, domain, grid, config, &coarse.field);
    sol.report.coarse_iterations = coarse.report.iterations + coarse.report.coarse_iterations;
    return sol;
}

}  // namespace pnlab::solver
