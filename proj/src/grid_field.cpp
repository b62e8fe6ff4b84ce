// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/grid_field.hpp"

#include "pnlab/errors.hpp"

namespace pnlab {

using geometry::NodeTag;

GridField::GridField(const geometry::Grid& g, std::vector<NodeTag> node_tags, double fill)
    : grid(g), values(g.size(), fill), tags(std::move(node_tags)) {
    if (tags.size() != grid.size()) throw ParameterError("GridField: tag count does not match grid size");
}

GridField GridField::sample(const geometry::Grid& g, const geometry::Classification& cls,
                            const std::function<double(const geometry::Vec2&)>& fn,
                            const std::function<double(const geometry::Vec2&)>& dirichlet) {
    GridField f(g, cls.tags);
    for (std::size_t k = 0; k < g.size(); ++k) {
        f.values[k] = cls.tags[k] == NodeTag::exterior ? dirichlet(cls.nearest[k]) : fn(g.node(k));
    }
    return f;
}

GridField GridField::sample_everywhere(const geometry::Grid& g, const std::function<double(const geometry::Vec2&)>& fn) {
    GridField f(g, std::vector<NodeTag>(g.size(), NodeTag::interior));
    for (std::size_t k = 0; k < g.size(); ++k) f.values[k] = fn(g.node(k));
    return f;
}

}  // namespace pnlab
