// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "pnlab/linalg.hpp"

using namespace pnlab::linalg;
using Catch::Matchers::WithinAbs;

TEST_CASE("2x2 eigenvalues", "[linalg]") {
    auto e = sym_eigs(SymMatrix::diagonal({2.0, -1.0}));
    CHECK(e[0] == -1.0);
    CHECK(e[1] == 2.0);
    e = sym_eigs(SymMatrix::from_rows(2, {0, 1, 1, 0}));
    CHECK_THAT(e[0], WithinAbs(-1.0, 1e-15));
    CHECK_THAT(e[1], WithinAbs(1.0, 1e-15));
    e = sym_eigs(SymMatrix::identity(2, 3.0));
    CHECK(e.min() == 3.0);
    CHECK(e.max() == 3.0);
}

TEST_CASE("from_rows rejects an asymmetric matrix", "[linalg]") {
    CHECK_THROWS(SymMatrix::from_rows(2, {0, 1, 2, 0}));
    CHECK_THROWS(SymMatrix(4));
}

TEST_CASE("3x3 eigenvalues against the trigonometric cubic formula", "[linalg]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 300; ++k) {
        SymMatrix x(3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) x.set(i, j, u(rng));
        // Closed form for real symmetric 3x3 (Smith 1961).
        const double q = x.trace() / 3.0;
        const double p1 = x(0, 1) * x(0, 1) + x(0, 2) * x(0, 2) + x(1, 2) * x(1, 2);
        const double p2 = (x(0, 0) - q) * (x(0, 0) - q) + (x(1, 1) - q) * (x(1, 1) - q) +
                          (x(2, 2) - q) * (x(2, 2) - q) + 2 * p1;
        const double p = std::sqrt(p2 / 6.0);
        SymMatrix b = x - SymMatrix::identity(3, q);
        b *= 1.0 / p;
        const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(1, 2)) -
                            b(0, 1) * (b(0, 1) * b(2, 2) - b(1, 2) * b(0, 2)) +
                            b(0, 2) * (b(0, 1) * b(1, 2) - b(1, 1) * b(0, 2));
        const double r = std::clamp(detb / 2.0, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        const double l3 = q + 2 * p * std::cos(phi);
        const double l1 = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
        const double l2 = 3 * q - l1 - l3;
        const auto e = sym_eigs(x);
        CHECK_THAT(e[0], WithinAbs(l1, 1e-10));
        CHECK_THAT(e[1], WithinAbs(l2, 1e-10));
        CHECK_THAT(e[2], WithinAbs(l3, 1e-10));
        for (int i = 0; i < 3; ++i) CHECK(std::abs(shifted_determinant(x, e[i])) < 1e-9 * (1 + x.frobenius() * x.frobenius() * x.frobenius()));
    }
}

TEST_CASE("eigenvalues are ordered and sum to the trace", "[linalg]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 1000; ++k) {
        const int n = 2 + k % 2;
        SymMatrix x(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) x.set(i, j, u(rng));
        const auto e = sym_eigs(x);
        for (int i = 1; i < n; ++i) CHECK(e[i - 1] <= e[i]);
        CHECK_THAT(e.sum(), WithinAbs(x.trace(), 1e-12));
        // Rayleigh quotient stays in [min, max].
        VecN v{n, {u(rng), u(rng), u(rng)}};
        if (n == 2) v[2] = 0.0;
        const double rq = x.quadratic_form(v) / v.norm2();
        CHECK(rq >= e.min() - 1e-12);
        CHECK(rq <= e.max() + 1e-12);
    }
}

TEST_CASE("matrix arithmetic", "[linalg]") {
    const auto a = SymMatrix::from_2x2(1, 2, 3);
    const auto b = SymMatrix::identity(2);
    const auto c = 2.0 * a - b;
    CHECK(c(0, 0) == 1.0);
    CHECK(c(1, 0) == 4.0);
    CHECK(c(1, 1) == 5.0);
    CHECK(a.quadratic_form(VecN{2, {1, 1, 0}}) == 8.0);
    CHECK_THAT(a.frobenius(), WithinAbs(std::sqrt(1 + 8 + 9.0), 1e-15));
}
