#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "crowdforge/citygen/semantic_city.hpp"

namespace crowdforge::navgraph {

// A concrete walk through the city: straight segments between waypoints.
struct Path {
    std::vector<Vec2> points;
    double length = 0.0;

    // Position after walking `dist` meters from the start, clamped to the
    // endpoints.
    Vec2 at(double dist) const;
};

// Street-centerline walking network with connector stubs for building
// entrances, zone entry points and tagged objects. Objects inside a zone are
// reachable only through the zone's entry points.
class NavGraph {
  public:
    // Throws std::runtime_error when any entrance, zone entry or object is
    // unreachable from the street network.
    static NavGraph build(const citygen::SemanticCity& city);

    // Shortest path between two positions. Anchor positions snap to their
    // graph node; free positions project onto the nearest street centerline.
    Path route(const Vec2& from, const Vec2& to) const;
    double distance(const Vec2& from, const Vec2& to) const;

    // Primary entrance of a building (its first declared entrance).
    Vec2 buildingAnchor(int buildingId) const;
    Vec2 objectAnchor(int objectId) const;
    const std::vector<Vec2>& zoneEntries(int zoneId) const;
    // The zone entry with the shortest walk from `from`; ties keep the first.
    Vec2 nearestZoneEntry(int zoneId, const Vec2& from) const;

    std::size_t nodeCount() const { return nodes_.size(); }
    std::size_t edgeCount() const { return edges_.size(); }

  private:
    struct Edge {
        int a = -1;
        int b = -1;
        double length = 0.0;
        bool onStreet = false;  // free positions may only snap to street edges
    };
    struct Snap {
        int node = -1;   // exact node hit, or
        int edge = -1;   // street edge projection
        Vec2 point;      // on-graph position
        double offset = 0.0;  // straight-line hop from the query point
    };

    int nodeAt(const Vec2& p);  // find-or-create (build time)
    int findNode(const Vec2& p) const;
    void addEdge(int a, int b, bool onStreet);
    Snap snapPoint(const Vec2& p) const;
    std::vector<double> dijkstra(const std::vector<std::pair<int, double>>& sources,
                                 std::vector<int>* pred) const;

    std::vector<Vec2> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, int>>> adj_;  // node -> (edge, other)
    // Positions quantized to 1e-9 m; coincident points share one node.
    std::map<std::pair<std::int64_t, std::int64_t>, int> nodeByKey_;

    std::vector<Vec2> buildingAnchors_;
    std::vector<Vec2> objectAnchors_;
    std::vector<std::vector<Vec2>> zoneEntries_;
};

}  // namespace crowdforge::navgraph
