#pragma once

#include <string>

#include "adrec/graph/hetero_graph.hpp"

namespace adrec::graph {

/// Writes users.csv / ads.csv / platforms.csv (id + feature columns) and
/// edges.csv (kind, endpoints, weight, timestamp, 12 attrs) into `dir`.
/// Doubles are written with 17 significant digits so a reload is bit-exact.
void save_graph(const HeteroGraph& graph, const std::string& dir);

HeteroGraph load_graph(const std::string& dir);

}  // namespace adrec::graph
