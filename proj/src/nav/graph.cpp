#include "nav/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "common/error.hpp"

namespace sw {

std::size_t WaypointGraph::add_node(Vec2 position) {
  nodes_.push_back(position);
  adj_.emplace_back();
  return nodes_.size() - 1;
}

void WaypointGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw ValidationError("edge", "node index out of range");
  if (a == b) throw ValidationError("edge", "self loop on node " + std::to_string(a));
  if (has_edge(a, b)) throw ValidationError("edge", "duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
  const double w = distance(nodes_[a], nodes_[b]);
  adj_[a].push_back({b, w});
  adj_[b].push_back({a, w});
  ++edges_;
}

bool WaypointGraph::has_edge(std::size_t a, std::size_t b) const {
  return std::any_of(adj_.at(a).begin(), adj_.at(a).end(), [b](const Edge& e) { return e.to == b; });
}

std::size_t WaypointGraph::nearest_node(Vec2 p) const {
  if (nodes_.empty()) throw EmptySetError("graph has no nodes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (distance(nodes_[i], p) < distance(nodes_[best], p)) best = i;
  }
  return best;
}

std::size_t WaypointGraph::component_size(std::size_t start) const {
  std::vector<bool> seen(size(), false);
  std::vector<std::size_t> stack{start};
  seen.at(start) = true;
  std::size_t count = 0;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    ++count;
    for (const Edge& e : adj_[n]) {
      if (!seen[e.to]) {
        seen[e.to] = true;
        stack.push_back(e.to);
      }
    }
  }
  return count;
}

double segment_clearance(const World& world, Vec2 a, Vec2 b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Polygon& poly : world.obstacles) best = std::min(best, segment_polygon_distance(a, b, poly));
  return best;
}

WaypointGraph build_waypoint_graph(const World& world, const GraphOptions& options) {
  WaypointGraph g;
  const Rect& b = world.bounds;
  const double s = options.spacing_m;
  const auto nx = static_cast<std::size_t>(std::floor((b.max.x - b.min.x - 2 * options.border_m) / s)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor((b.max.y - b.min.y - 2 * options.border_m) / s)) + 1;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> id(nx * ny, kNone);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec2 p{b.min.x + options.border_m + static_cast<double>(ix) * s,
                   b.min.y + options.border_m + static_cast<double>(iy) * s};
      if (segment_clearance(world, p, p) >= options.node_clearance_m) id[iy * nx + ix] = g.add_node(p);
    }
  }
  const int offsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t a = id[iy * nx + ix];
      if (a == kNone) continue;
      for (const auto& o : offsets) {
        const auto jx = static_cast<std::ptrdiff_t>(ix) + o[0];
        const auto jy = static_cast<std::ptrdiff_t>(iy) + o[1];
        if (jx < 0 || jy < 0 || jx >= static_cast<std::ptrdiff_t>(nx) || jy >= static_cast<std::ptrdiff_t>(ny)) continue;
        const std::size_t c = id[static_cast<std::size_t>(jy) * nx + static_cast<std::size_t>(jx)];
        if (c == kNone) continue;
        if (segment_clearance(world, g.node(a), g.node(c)) >= options.edge_clearance_m) g.add_edge(a, c);
      }
    }
  }
  return g;
}

PlanResult astar_plan(const WaypointGraph& graph, std::size_t start, std::size_t goal) {
  if (start >= graph.size()) throw ValidationError("start_node", "not in graph");
  if (goal >= graph.size()) throw ValidationError("goal_node", "not in graph");
  const double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> g(graph.size(), inf);
  std::vector<std::size_t> parent(graph.size(), kNone);
  using Entry = std::pair<double, std::size_t>;  // (f, node); greater<> pops smallest f, then smallest id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const Vec2 target = graph.node(goal);
  g[start] = 0.0;
  open.push({distance(graph.node(start), target), start});
  while (!open.empty()) {
    const auto [f, n] = open.top();
    open.pop();
    if (f > g[n] + distance(graph.node(n), target)) continue;  // stale entry
    if (n == goal) break;
    for (const WaypointGraph::Edge& e : graph.neighbors(n)) {
      const double cand = g[n] + e.weight;
      if (cand < g[e.to]) {
        g[e.to] = cand;
        parent[e.to] = n;
        open.push({cand + distance(graph.node(e.to), target), e.to});
      }
    }
  }
  if (g[goal] == inf) {
    throw NoPathError("no path from node " + std::to_string(start) + " to node " + std::to_string(goal),
                      graph.component_size(start));
  }
  PlanResult out;
  out.cost = g[goal];
  for (std::size_t n = goal; n != kNone; n = parent[n]) out.nodes.push_back(n);
  std::reverse(out.nodes.begin(), out.nodes.end());
  return out;
}

std::vector<Vec2> route_positions(const WaypointGraph& graph, const PlanResult& plan) {
  std::vector<Vec2> out;
  out.reserve(plan.nodes.size());
  for (std::size_t n : plan.nodes) out.push_back(graph.node(n));
  return out;
}

}  // namespace sw
