#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "nav/world.hpp"

namespace sw {

// Undirected graph whose edge weights are the Euclidean distances between
// their endpoints.
class WaypointGraph {
 public:
  struct Edge {
    std::size_t to;
    double weight;
  };

  std::size_t add_node(Vec2 position);
  // Rejects self loops and duplicate edges.
  void add_edge(std::size_t a, std::size_t b);
  bool has_edge(std::size_t a, std::size_t b) const;

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_; }
  Vec2 node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Edge>& neighbors(std::size_t i) const { return adj_.at(i); }

  std::size_t nearest_node(Vec2 p) const;
  // Number of nodes reachable from `start`, including itself.
  std::size_t component_size(std::size_t start) const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::vector<Edge>> adj_;
  std::size_t edges_ = 0;
};

struct GraphOptions {
  double spacing_m = 4.0;
  double node_clearance_m = 1.5;
  double edge_clearance_m = 1.2;
  double border_m = 2.0;
};

// Lattice nodes in free space joined to their 8 neighbours when the segment
// keeps `edge_clearance_m` from every static obstacle.
WaypointGraph build_waypoint_graph(const World& world, const GraphOptions& options = {});

// Minimum clearance between a segment and the static obstacles.
double segment_clearance(const World& world, Vec2 a, Vec2 b);

struct PlanResult {
  std::vector<std::size_t> nodes;
  double cost = 0.0;
};

// A* with the Euclidean heuristic; among equal f the smaller node id is
// expanded first. Throws NoPathError with the size of the start component.
PlanResult astar_plan(const WaypointGraph& graph, std::size_t start, std::size_t goal);

std::vector<Vec2> route_positions(const WaypointGraph& graph, const PlanResult& plan);

}  // namespace sw
