// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace pnlab::linalg {

/// Small vector of dimension 2 or 3.
struct VecN {
    int n = 2;
    std::array<double, 3> v{};

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
    double norm2() const;
    std::span<const double> values() const { return {v.data(), static_cast<std::size_t>(n)}; }
};

/// Symmetric n x n matrix (n = 2 or 3). Only the upper triangle is stored, so
/// symmetry holds by construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n);

    /// Row-major full matrix; the lower triangle must mirror the upper one.
    static SymMatrix from_rows(int n, std::initializer_list<double> rows);
    static SymMatrix diagonal(std::initializer_list<double> diag);
    static SymMatrix identity(int n, double scale = 1.0);
    static SymMatrix from_2x2(double xx, double xy, double yy);

    int dim() const { return n_; }
    double operator()(int i, int j) const { return data_[slot(i, j)]; }
    void set(int i, int j, double value) { data_[slot(i, j)] = value; }

    double trace() const;
    double frobenius() const;
    /// <X q, q>
    double quadratic_form(const VecN& q) const;

    SymMatrix& operator+=(const SymMatrix& o);
    SymMatrix& operator-=(const SymMatrix& o);
    SymMatrix& operator*=(double s);
    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

private:
    static std::size_t slot(int i, int j);
    int n_ = 2;
    std::array<double, 6> data_{};  // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
};

/// Ascending eigenvalues; only the first `n` entries are meaningful.
struct Eigenvalues {
    int n = 2;
    std::array<double, 3> values{};

    double min() const { return values[0]; }
    double max() const { return values[static_cast<std::size_t>(n) - 1]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    double sum() const;
    std::span<const double> span() const { return {values.data(), static_cast<std::size_t>(n)}; }
};

/// Closed form for 2x2, cyclic Jacobi rotations for 3x3.
Eigenvalues sym_eigs(const SymMatrix& x);

/// det(X - lambda I), used to verify eigenvalues.
double shifted_determinant(const SymMatrix& x, double lambda);

}  // namespace pnlab::linalg
