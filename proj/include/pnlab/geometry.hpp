// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Analytic planar domains: signed distance, boundary frames, grid
// classification and reflections across lines.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace pnlab::geometry {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise rotation by a quarter turn.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

enum class DomainKind { disk, annulus, ellipse, stadium };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Analytic 2-D domain. Lengths are in grid units.
///
/// Shape parameters by kind:
///   disk     a = radius
///   annulus  a = inner radius, b = outer radius
///   ellipse  a = semi-axis along x, b = semi-axis along y
///   stadium  a = half-length of the straight segment, b = cap radius
struct DomainSpec {
    DomainKind kind = DomainKind::disk;
    Vec2 center{};
    double a = 1.0;
    double b = 0.0;

    static DomainSpec disk(double radius, Vec2 center = {});
    static DomainSpec annulus(double inner, double outer, Vec2 center = {});
    static DomainSpec ellipse(double semi_x, double semi_y, Vec2 center = {});
    static DomainSpec stadium(double half_length, double radius, Vec2 center = {});

    /// Throws ParameterError for non-positive lengths or inner >= outer.
    void validate() const;

    /// Number of boundary components (2 for the annulus, 1 otherwise).
    int component_count() const { return kind == DomainKind::annulus ? 2 : 1; }

    /// Radius of the largest inscribed disk.
    double inradius() const;

    friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

struct BoundingBox {
    Vec2 lo{};
    Vec2 hi{};
};

BoundingBox bounding_box(const DomainSpec& domain);

/// Closest boundary point with its outward normal and curvature.
struct BoundaryPoint {
    Vec2 point{};
    Vec2 normal{};
    double curvature = 0.0;
    int component = 0;
};

/// Signed distance: negative inside, zero on the boundary, positive outside.
double sdf_eval(const DomainSpec& domain, const Vec2& x);

/// Nearest point on the boundary. Ellipses use a damped Newton projection
/// (tolerance 1e-12, at most 50 iterations).
BoundaryPoint nearest_boundary_point(const DomainSpec& domain, const Vec2& x);

/// Smallest t > 0 at which the ray x + t d leaves the domain; `d` need not be
/// normalized (t is measured in units of |d|). `x` must lie inside.
/// Returns +inf when the ray never meets the boundary.
double ray_exit(const DomainSpec& domain, const Vec2& x, const Vec2& d);

struct BoundarySample {
    Vec2 point{};
    Vec2 normal{};   // outward unit normal
    Vec2 tangent{};  // perp(normal)
    double curvature = 0.0;
    double s = 0.0;  // cumulative arclength over all components
    int component = 0;
};

/// `m` samples spread over the boundary, each component receiving a share
/// proportional to its length, uniformly spaced in arclength and ordered by s.
/// Convention: curvature is positive on convex parts (1/R on a disk).
std::vector<BoundarySample> boundary_probe(const DomainSpec& domain, int m);

/// Total boundary length of one component.
double component_length(const DomainSpec& domain, int component);

/// Uniform node grid; node (i, j) sits at origin + h (i, j), row-major with
/// index j * nx + i.
struct Grid {
    Vec2 origin{};
    double h = 0.0;
    int nx = 0;
    int ny = 0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    Vec2 node(int i, int j) const { return {origin.x + h * i, origin.y + h * j}; }
    Vec2 node(std::size_t k) const {
        return node(static_cast<int>(k % static_cast<std::size_t>(nx)), static_cast<int>(k / static_cast<std::size_t>(nx)));
    }
    Vec2 upper() const { return node(nx - 1, ny - 1); }

    /// Grid symmetric about the domain center (which becomes a node), covering
    /// the bounding box plus `margin` on every side.
    static Grid covering(const DomainSpec& domain, double h, double margin);

    friend bool operator==(const Grid&, const Grid&) = default;
};

enum class NodeTag : unsigned char { interior, band, exterior };

/// Node classification with respect to an epsilon-neighbourhood of the boundary.
struct Classification {
    double epsilon = 0.0;
    std::vector<NodeTag> tags;
    std::vector<double> sd;        // signed distance per node
    std::vector<Vec2> nearest;     // nearest boundary point per node

    std::size_t count(NodeTag tag) const;
};

/// interior: sd <= -eps; band: -eps < sd < 0; exterior: sd >= 0.
/// Requires eps >= 2h; throws CoverageError when the grid misses part of the domain.
Classification classify_grid(const DomainSpec& domain, const Grid& grid, double epsilon);

/// Line {x : <x, e> = offset} with unit direction e.
struct Hyperplane {
    Vec2 direction{1.0, 0.0};
    double offset = 0.0;
};

Vec2 reflect(const Vec2& x, const Hyperplane& plane);

}  // namespace pnlab::geometry
