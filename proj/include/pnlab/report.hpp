// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
//
// Serialization of solver and diagnostic results: JSON summaries, CSV traces
// and SVG heatmaps with a fixed colour map.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnlab/diagnostics.hpp"
#include "pnlab/solver.hpp"

namespace pnlab::report {

using nlohmann::json;

json to_json(const solver::ConvergenceReport& r);
json to_json(const diagnostics::ConstancyScore& s);
json to_json(const diagnostics::SymmetryReport& r);
json to_json(const diagnostics::ViscosityReport& r);
json to_json(const diagnostics::PucciReport& r);
json to_json(const diagnostics::PFunctionField& r);
json to_json(const diagnostics::MovingPlaneResult& r);
json to_json(const diagnostics::BoundaryIdentity& r);

/// Pretty-printed, written atomically.
void write_json(const std::filesystem::path& path, const json& j);

/// s,component,x,y,normal_x,normal_y,curvature,u_nu
std::string trace_csv(const diagnostics::NeumannTrace& t);
/// s,component,x,y,curvature,u_nu,u_nunu,residual
std::string identity_csv(const diagnostics::BoundaryIdentity& b);
/// direction_x,direction_y,offset,min_w,argmin_x,argmin_y,nodes
std::string moving_plane_csv(const std::vector<diagnostics::MovingPlaneResult>& rows);

/// Heatmap of `values` over the nodes where `mask` is non-zero (all nodes
/// when `mask` is empty). Colour limits default to the masked min/max.
/// At most `max_cells` cells per axis are drawn (nodes are subsampled).
struct HeatmapOptions {
    std::string title;
    bool fixed_range = false;
    double lo = 0.0;
    double hi = 1.0;
    int max_cells = 200;
};

std::string svg_heatmap(const GridField& field, const std::vector<std::uint8_t>& mask, const HeatmapOptions& opt);

/// Colour of t in [0, 1] (clamped), "#rrggbb".
std::string colormap(double t);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pnlab::report
