// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "pnlab/errors.hpp"

namespace pnlab::linalg {

double VecN::norm2() const {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    return acc;
}

SymMatrix::SymMatrix(int n) : n_(n) {
    if (n < 2 || n > 3) throw ParameterError("SymMatrix supports n = 2 or 3");
}

std::size_t SymMatrix::slot(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr std::size_t table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[i][j];
}

SymMatrix SymMatrix::from_rows(int n, std::initializer_list<double> rows) {
    SymMatrix m(n);
    if (rows.size() != static_cast<std::size_t>(n * n)) throw ParameterError("from_rows: expected n*n entries");
    const double* r = rows.begin();
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double upper = r[i * n + j];
            const double lower = r[j * n + i];
            if (std::abs(upper - lower) > 1e-14 * (1.0 + std::abs(upper)))
                throw ParameterError("from_rows: matrix is not symmetric");
            m.set(i, j, upper);
        }
    }
    return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
    SymMatrix m(static_cast<int>(diag.size()));
    int i = 0;
    for (double d : diag) {
        m.set(i, i, d);
        ++i;
    }
    return m;
}

SymMatrix SymMatrix::identity(int n, double scale) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, scale);
    return m;
}

SymMatrix SymMatrix::from_2x2(double xx, double xy, double yy) {
    SymMatrix m(2);
    m.set(0, 0, xx);
    m.set(0, 1, xy);
    m.set(1, 1, yy);
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::frobenius() const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) acc += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(acc);
}

double SymMatrix::quadratic_form(const VecN& q) const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) acc += q[i] * (*this)(i, j) * q[j];
    return acc;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
    if (o.n_ != n_) throw ParameterError("SymMatrix dimension mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
    if (o.n_ != n_) throw ParameterError("SymMatrix dimension mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
    for (double& d : data_) d *= s;
    return *this;
}

double Eigenvalues::sum() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += values[static_cast<std::size_t>(i)];
    return s;
}

namespace {

Eigenvalues eigs_2x2(const SymMatrix& x) {
    const double a = x(0, 0);
    const double b = x(0, 1);
    const double c = x(1, 1);
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    Eigenvalues e;
    e.n = 2;
    e.values = {mean - rad, mean + rad, 0.0};
    return e;
}

Eigenvalues eigs_3x3_jacobi(const SymMatrix& x) {
    double a[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = x(i, j);

    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if (off <= 1e-34 * diag || off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const double apq = a[p][q];
                if (apq == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J^T A J with J the (p, q) rotation.
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = a[q][p] = 0.0;
            }
        }
    }
    Eigenvalues e;
    e.n = 3;
    e.values = {a[0][0], a[1][1], a[2][2]};
    std::sort(e.values.begin(), e.values.end());
    return e;
}

}  // namespace

Eigenvalues sym_eigs(const SymMatrix& x) {
    return x.dim() == 2 ? eigs_2x2(x) : eigs_3x3_jacobi(x);
}

double shifted_determinant(const SymMatrix& x, double lambda) {
    if (x.dim() == 2) return (x(0, 0) - lambda) * (x(1, 1) - lambda) - x(0, 1) * x(0, 1);
    const double a = x(0, 0) - lambda, b = x(0, 1), c = x(0, 2);
    const double d = x(1, 1) - lambda, e = x(1, 2), f = x(2, 2) - lambda;
    return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

}  // namespace pnlab::linalg
