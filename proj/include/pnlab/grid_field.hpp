// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pnlab/geometry.hpp"

namespace pnlab {

/// Scalar field sampled on a uniform grid together with the node tags it was
/// computed against. Exterior nodes hold the Dirichlet extension.
struct GridField {
    geometry::Grid grid;
    std::vector<double> values;
    std::vector<geometry::NodeTag> tags;

    GridField() = default;
    GridField(const geometry::Grid& g, std::vector<geometry::NodeTag> node_tags, double fill = 0.0);

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
    geometry::NodeTag tag(int i, int j) const { return tags[grid.index(i, j)]; }
    bool inside(std::size_t k) const { return tags[k] != geometry::NodeTag::exterior; }

    /// Samples `fn` at interior and band nodes and `dirichlet` (evaluated at
    /// the nearest boundary point) at exterior nodes.
    static GridField sample(const geometry::Grid& g, const geometry::Classification& cls,
                            const std::function<double(const geometry::Vec2&)>& fn,
                            const std::function<double(const geometry::Vec2&)>& dirichlet);

    /// Samples `fn` at every node; all nodes are tagged interior.
    static GridField sample_everywhere(const geometry::Grid& g, const std::function<double(const geometry::Vec2&)>& fn);
};

}  // namespace pnlab
