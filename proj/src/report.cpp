// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pnlab/io.hpp"

namespace pnlab::report {

namespace {

// Non-finite numbers are written as null so the output stays valid JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

json to_json(const solver::ConvergenceReport& r) {
    return {{"scheme", r.scheme},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"coarse_iterations", r.coarse_iterations},
            {"final_update", num(r.final_update)},
            {"residual", num(r.residual)},
            {"masked_fraction", num(r.masked_fraction)},
            {"wall_seconds", num(r.wall_seconds)}};
}

json to_json(const diagnostics::ConstancyScore& s) {
    return {{"spread", num(s.spread)}, {"mean", num(s.mean)}, {"defined", s.defined}};
}

json to_json(const diagnostics::BoundaryIdentity& r) {
    return {{"samples", r.residuals.size()}, {"dropped", r.dropped}, {"max_abs_residual", num(r.max_abs())}};
}

json to_json(const diagnostics::MovingPlaneResult& r) {
    return {{"direction", {r.direction.x, r.direction.y}},
            {"offset", r.offset},
            {"min_w", num(r.min_w)},
            {"argmin", {r.argmin.x, r.argmin.y}},
            {"nodes", r.nodes},
            {"empty", r.empty}};
}

json to_json(const diagnostics::SymmetryReport& r) {
    json j;
    j["samples"] = r.trace.values.size();
    j["dropped"] = r.trace.dropped;
    j["probe_spacing"] = r.trace.spacing;
    j["score"] = to_json(r.score);
    j["component_means"] = r.component_means;
    j["boundary_identity"] = to_json(r.identity);
    json mp = json::array();
    for (const auto& m : r.moving_plane) mp.push_back(to_json(m));
    j["moving_plane"] = mp;
    return j;
}

json to_json(const diagnostics::ViscosityReport& r) {
    return {{"tau", r.tau},
            {"evaluated", r.evaluated},
            {"skipped", r.skipped},
            {"worst_subsolution_violation", num(r.worst_sub)},
            {"worst_supersolution_violation", num(r.worst_super)},
            {"violating_nodes", r.violating_nodes},
            {"passed", r.passed()}};
}

json to_json(const diagnostics::PucciReport& r) {
    return {{"tau", r.tau},
            {"evaluated", r.evaluated},
            {"violations", r.violations},
            {"fraction", num(r.fraction())},
            {"worst", num(r.worst)}};
}

json to_json(const diagnostics::PFunctionField& r) {
    return {{"variant", diagnostics::to_string(r.variant)},
            {"min", num(r.min)},
            {"max", num(r.max)},
            {"score", to_json(r.score)}};
}

void write_json(const std::filesystem::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) { io::write_atomic(path, text); }

std::string trace_csv(const diagnostics::NeumannTrace& t) {
    std::string out = "s,component,x,y,normal_x,normal_y,curvature,u_nu\n";
    for (std::size_t k = 0; k < t.values.size(); ++k) {
        const auto& s = t.samples[k];
        out += fmt(s.s) + "," + std::to_string(s.component) + "," + fmt(s.point.x) + "," + fmt(s.point.y) + "," +
               fmt(s.normal.x) + "," + fmt(s.normal.y) + "," + fmt(s.curvature) + "," + fmt(t.values[k]) + "\n";
    }
    return out;
}

std::string identity_csv(const diagnostics::BoundaryIdentity& b) {
    std::string out = "s,component,x,y,curvature,u_nu,u_nunu,residual\n";
    for (std::size_t k = 0; k < b.residuals.size(); ++k) {
        const auto& s = b.samples[k];
        out += fmt(s.s) + "," + std::to_string(s.component) + "," + fmt(s.point.x) + "," + fmt(s.point.y) + "," +
               fmt(s.curvature) + "," + fmt(b.u_nu[k]) + "," + fmt(b.u_nunu[k]) + "," + fmt(b.residuals[k]) + "\n";
    }
    return out;
}

std::string moving_plane_csv(const std::vector<diagnostics::MovingPlaneResult>& rows) {
    std::string out = "direction_x,direction_y,offset,min_w,argmin_x,argmin_y,nodes\n";
    for (const auto& r : rows)
        out += fmt(r.direction.x) + "," + fmt(r.direction.y) + "," + fmt(r.offset) + "," + fmt(r.min_w) + "," +
               fmt(r.argmin.x) + "," + fmt(r.argmin.y) + "," + std::to_string(r.nodes) + "\n";
    return out;
}

std::string colormap(double t) {
    // Viridis, sampled at five stops and interpolated linearly.
    static constexpr std::array<std::array<double, 3>, 5> stops = {{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
    }};
    if (!std::isfinite(t)) t = 0.0;
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(static_cast<int>(t), 3);
    const double f = t - k;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(stops[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] * (1.0 - f) +
                                              stops[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(c)] * f));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_heatmap(const GridField& field, const std::vector<std::uint8_t>& mask, const HeatmapOptions& opt) {
    const auto& g = field.grid;
    auto on = [&](std::size_t k) { return mask.empty() || mask[k] != 0; };
    double lo = opt.lo, hi = opt.hi;
    if (!opt.fixed_range) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!on(k) || !std::isfinite(field.values[k])) continue;
            lo = std::min(lo, field.values[k]);
            hi = std::max(hi, field.values[k]);
        }
        if (!std::isfinite(lo)) lo = hi = 0.0;
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const int stride = std::max(1, (std::max(g.nx, g.ny) + opt.max_cells - 1) / std::max(opt.max_cells, 1));
    const int cols = (g.nx + stride - 1) / stride, rows = (g.ny + stride - 1) / stride;
    const int cell = std::max(1, 480 / std::max(cols, rows));
    const int width = cols * cell, height = rows * cell;
    const int bar = 16, pad = 8, top = 24;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 3 * pad + bar + 80 << "\" height=\""
      << height + top + pad << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << pad << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(opt.title) << "</text>\n";
    s << "<g shape-rendering=\"crispEdges\">\n";
    for (int r = 0; r < rows; ++r) {
        const int j = r * stride;
        for (int c = 0; c < cols; ++c) {
            const int i = c * stride;
            const std::size_t k = g.index(i, j);
            if (!on(k)) continue;
            // Row 0 is the bottom of the domain.
            s << "<rect x=\"" << pad + c * cell << "\" y=\"" << top + (rows - 1 - r) * cell << "\" width=\"" << cell
              << "\" height=\"" << cell << "\" fill=\"" << colormap((field.values[k] - lo) / span) << "\"/>\n";
        }
    }
    s << "</g>\n";
    const int bx = 2 * pad + width;
    for (int q = 0; q < 64; ++q) {
        const double t = 1.0 - (q + 0.5) / 64.0;
        s << "<rect x=\"" << bx << "\" y=\"" << top + q * height / 64.0 << "\" width=\"" << bar << "\" height=\""
          << height / 64.0 + 0.5 << "\" fill=\"" << colormap(t) << "\"/>\n";
    }
    s << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_short(hi) << "</text>\n";
    s << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + height << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_short(lo) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace pnlab::report
