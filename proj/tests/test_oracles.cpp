// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "pnlab/errors.hpp"
#include "pnlab/operators.hpp"
#include "pnlab/oracles.hpp"

using namespace pnlab;
using namespace pnlab::oracles;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("radial solution values", "[oracles]") {
    CHECK_THAT(radial_ball(2, 2, 1, 0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(radial_ball(3, 3, 2, 2), WithinAbs(0.0, 1e-15));
    CHECK_THAT(radial_ball(4, 2, 1, 0.5), WithinAbs(0.375, 1e-15));
    CHECK_THROWS_AS(radial_ball(2, 2, 1, 1.5), DomainError);
    CHECK_THROWS_AS(radial_ball(2, 2, 1, -0.1), DomainError);
    CHECK_THROWS_AS(radial_ball(1.0, 2, 1, 0.0), ParameterError);
}

TEST_CASE("radial solution satisfies the radial ODE", "[oracles][property]") {
    for (double p : {1.2, 1.5, 2.0, 3.0, 4.0, 7.5})
        for (int n : {2, 3}) {
            const RadialSolution v(p, n, 1.3);
            for (double r : {0.05, 0.3, 0.9, 1.3}) {
                CHECK(std::abs(v.ode_residual(r)) < 1e-13);
                // Finite-difference check of the derivative formulas.
                const double e = 1e-5;
                const double r0 = std::min(r, 1.3 - e);
                CHECK_THAT(v.derivative(r0), WithinAbs((v.value(r0 + e) - v.value(r0 - e)) / (2 * e), 1e-8));
            }
            CHECK_THAT(v.value(1.3), WithinAbs(0.0, 1e-15));
        }
}

TEST_CASE("Hopf constant", "[oracles]") {
    CHECK_THAT(hopf_constant(2, 2, 1), WithinAbs(1.0, 1e-15));
    CHECK_THAT(hopf_constant(3, 3, 2), WithinAbs(1.5, 1e-15));
    for (double p : {1.5, 2.0, 3.0})
        CHECK_THAT(hopf_constant(p, 2, 1.7), WithinAbs(-RadialSolution(p, 2, 1.7).derivative(1.7), 1e-14));
}

TEST_CASE("infinity annulus profile", "[oracles]") {
    CHECK_THAT(infty_annulus(1, 2, 1.5), WithinAbs(0.125, 1e-15));
    CHECK_THAT(infty_annulus(1, 2, 1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(infty_annulus(1, 2, 2.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(infty_annulus_derivative(1, 2, 1.0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(infty_annulus_derivative(1, 2, 2.0), WithinAbs(-0.5, 1e-15));
    CHECK_THROWS_AS(infty_annulus(1, 2, 2.5), DomainError);
}

TEST_CASE("p = 1 ball radius", "[oracles]") {
    CHECK_THAT(p1_ball_radius(2, -0.5), WithinAbs(0.5, 1e-15));
    CHECK_THAT(p1_ball_radius(3, -1), WithinAbs(2.0, 1e-15));
    CHECK_THROWS_AS(p1_ball_radius(2, 0.5), ParameterError);
}

TEST_CASE("mean-value weights", "[oracles]") {
    auto w = dpp_weights(2, 2);
    CHECK(w.alpha == 0.0);
    CHECK(w.beta == 1.0);
    CHECK_THAT(w.source_coeff, WithinAbs(0.5, 1e-15));
    w = dpp_weights(4, 2);
    CHECK_THAT(w.alpha, WithinAbs(0.5, 1e-15));
    CHECK_THAT(w.beta, WithinAbs(0.5, 1e-15));
    CHECK_THAT(w.source_coeff, WithinAbs(0.5, 1e-15));
    for (double p : {1.5, 2.5, 6.0})
        for (int n : {2, 3}) {
            w = dpp_weights(p, n);
            CHECK_THAT(w.alpha + w.beta, WithinAbs(1.0, 1e-15));
        }
}

TEST_CASE("mean-value weights reproduce the operator on quadratics", "[oracles][property]") {
    // For u = <Ax,x>/2 + <q,x> the scheme expansion is exact at second order
    // once max/min over the circle is taken along the gradient for small eps.
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1, 1), up(2.0, 8.0);
    for (int k = 0; k < 200; ++k) {
        const double p = up(rng);
        const double a = u(rng), b = u(rng), c = u(rng);
        const double qx = 1 + u(rng) * 0.5, qy = u(rng) * 0.5;
        auto f = [&](double x, double y) { return 0.5 * (a * x * x + 2 * b * x * y + c * y * y) + qx * x + qy * y; };
        const double eps = 1e-3;
        double mean = 0, mx = -1e300, mn = 1e300;
        const int m = 20000;
        for (int t = 0; t < m; ++t) {
            const double th = 2 * std::numbers::pi * t / m;
            const double v = f(eps * std::cos(th), eps * std::sin(th));
            mean += v / m;
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        const auto w = dpp_weights(p, 2);
        const double s = w.beta * mean + 0.5 * w.alpha * (mx + mn);
        const double lap = operators::normalized_laplacian(
            {p, 2}, operators::Jet{linalg::VecN{2, {qx, qy, 0}}, linalg::SymMatrix::from_2x2(a, b, c)});
        CHECK_THAT(s / (eps * eps / 2) * (2 + p - 2) / p, WithinAbs(lap, 5e-3));
    }
}

TEST_CASE("brute-force envelopes agree with the closed form", "[oracles]") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-2, 2), up(1.05, 8.0);
    for (int k = 0; k < 200; ++k) {
        const operators::PParams pp{up(rng), 2};
        const auto x = linalg::SymMatrix::from_2x2(u(rng), u(rng), u(rng));
        const auto exact = operators::envelopes(pp, x);
        const auto r = envelope_bruteforce_refined(pp, x, 720);
        CHECK_THAT(r.inf, WithinAbs(exact.lower, 1e-9));
        CHECK_THAT(r.sup, WithinAbs(exact.upper, 1e-9));
        const auto raw = envelope_bruteforce(pp, x, 720);
        CHECK(raw.inf >= exact.lower - 1e-12);
        CHECK(raw.sup <= exact.upper + 1e-12);
        CHECK(raw.sup - exact.upper > -1e-4);
    }
    CHECK_THROWS_AS(envelope_bruteforce({2.0, 2}, linalg::SymMatrix::identity(2), 10), ParameterError);
}

TEST_CASE("3d brute force stays inside the closed form", "[oracles]") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 50; ++k) {
        linalg::SymMatrix x(3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) x.set(i, j, u(rng));
        const operators::PParams pp{3.0, 3};
        const auto exact = operators::envelopes(pp, x);
        const auto r = envelope_bruteforce(pp, x, 4000);
        CHECK(r.inf >= exact.lower - 1e-12);
        CHECK(r.sup <= exact.upper + 1e-12);
        CHECK(r.inf - exact.lower < 0.05);
        CHECK(exact.upper - r.sup < 0.05);
    }
}
