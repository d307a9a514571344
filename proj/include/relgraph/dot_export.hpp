#pragma once

#include "relgraph/adjacency.hpp"
#include "relgraph/scene.hpp"

#include <string>

namespace relgraph {

/// Graphviz DOT of the fused graph. Nodes are filled by class label; an edge is solid when
/// both graphs contain it and dashed when only one does.
[[nodiscard]] std::string export_dot(const Scene& scene, const Adjacency& semantic,
                                     const Adjacency& spatial);

}  // namespace relgraph
