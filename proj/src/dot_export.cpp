#include "relgraph/dot_export.hpp"

#include "relgraph/error.hpp"
#include "relgraph/report.hpp"

#include <array>
#include <sstream>

namespace relgraph {

namespace {

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string export_dot(const Scene& scene, const Adjacency& semantic, const Adjacency& spatial) {
  if (semantic.size() != scene.size() || spatial.size() != scene.size()) {
    throw DimensionError("graphs do not match the scene size");
  }
  const Adjacency fused = fuse_graphs(semantic, spatial);
  std::ostringstream out;
  out << "graph relations {\n";
  out << "  graph [overlap=false, splines=true];\n";
  out << "  node [shape=circle, style=filled, fontsize=8];\n";
  for (Index i = 0; i < scene.size(); ++i) {
    const Region& r = scene.regions[static_cast<std::size_t>(i)];
    out << "  n" << i << " [label=\"" << i << "\", fillcolor=\""
        << kPalette[static_cast<std::size_t>(r.label) % kPalette.size()] << "\", class=" << r.label
        << ", pos=\"" << format_double(r.box.x) << "," << format_double(-r.box.y) << "\""
        << (r.ambiguous ? ", penwidth=2.5" : "") << "];\n";
  }
  for (const auto& [i, j] : fused.edges()) {
    const bool both = semantic.has_edge(i, j) && spatial.has_edge(i, j);
    const char* source = both ? "both" : (semantic.has_edge(i, j) ? "semantic" : "spatial");
    out << "  n" << i << " -- n" << j << " [style=" << (both ? "solid" : "dashed")
        << ", relation=" << source << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace relgraph
