#include <cmath>
#include <string>

#include "crowdforge/citygen/interpreter.hpp"
#include "crowdforge/citygen/layout.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/navgraph/navgraph.hpp"
#include "crowdforge/rulelang/loader.hpp"
#include "doctest.h"

namespace cg = crowdforge::citygen;
namespace nav = crowdforge::navgraph;
namespace rl = crowdforge::rulelang;
using crowdforge::IncidentLog;
using crowdforge::Vec2;

namespace {

std::string assetPath(const std::string& rel) {
    return std::string(CROWDFORGE_ASSET_DIR) + "/" + rel;
}

const cg::SemanticCity& listingCity() {
    static cg::SemanticCity city = [] {
        auto rules = rl::loadRuleFile(assetPath("rules/building.cga"));
        IncidentLog log;
        return cg::generateCity(cg::generateLayout(cg::LayoutConfig{}), rules, 42, log);
    }();
    return city;
}

const nav::NavGraph& listingGraph() {
    static nav::NavGraph g = nav::NavGraph::build(listingCity());
    return g;
}

bool near2(const Vec2& a, const Vec2& b, double eps = 1e-9) {
    return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps;
}

}  // namespace

TEST_CASE("navgraph: builds a connected network over the listing city") {
    const auto& g = listingGraph();
    CHECK(g.nodeCount() > 0);
    CHECK(g.edgeCount() >= g.nodeCount() - 1);
}

TEST_CASE("navgraph: neighbor shops are one street-hop apart") {
    const auto& g = listingGraph();
    // Entrances at (10,6) and (22,6), both with 3m stubs onto the y=3
    // centerline: 3 + 12 + 3.
    Vec2 a = g.buildingAnchor(0);
    Vec2 b = g.buildingAnchor(1);
    CHECK(near2(a, {10, 6}, 1e-6));
    CHECK(near2(b, {22, 6}, 1e-6));
    CHECK(g.distance(a, b) == doctest::Approx(18.0));
    CHECK(g.distance(b, a) == doctest::Approx(18.0));
    CHECK(g.distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("navgraph: cross-block route follows the street grid") {
    const auto& g = listingGraph();
    // Building 4 fronts the middle horizontal street: entrance (14,30),
    // stub to (14,33). Route: 3 down + 7 west + 30 north + 11 east + 3.
    Vec2 a = g.buildingAnchor(0);
    Vec2 b = g.buildingAnchor(4);
    CHECK(near2(b, {14, 30}, 1e-6));
    CHECK(g.distance(a, b) == doctest::Approx(54.0));
}

TEST_CASE("navgraph: objects in zones route through the zone entry") {
    const auto& g = listingGraph();
    Vec2 a = g.buildingAnchor(0);
    Vec2 bench = g.objectAnchor(0);
    CHECK(near2(bench, {17.8, 7}, 1e-6));
    // 3 + 6 + 3 along streets and stubs, then entry (16,6) -> bench.
    double hop = std::sqrt(1.8 * 1.8 + 1.0);
    CHECK(g.distance(a, bench) == doctest::Approx(12.0 + hop));

    // Bench to bench across lots: out through one entry, in through the
    // other.
    Vec2 other = g.objectAnchor(3);  // first bench of lot 1
    CHECK(near2(other, {29.8, 7}, 1e-6));
    CHECK(g.distance(bench, other) == doctest::Approx(18.0 + 2.0 * hop));
}

TEST_CASE("navgraph: path interpolation walks waypoints and clamps") {
    const auto& g = listingGraph();
    auto path = g.route(g.buildingAnchor(0), g.buildingAnchor(1));
    CHECK(path.length == doctest::Approx(18.0));
    CHECK(near2(path.at(0.0), {10, 6}, 1e-9));
    CHECK(near2(path.at(3.0), {10, 3}, 1e-6));
    CHECK(near2(path.at(4.5), {11.5, 3}, 1e-6));
    CHECK(near2(path.at(15.0), {22, 3}, 1e-6));
    CHECK(near2(path.at(18.0), {22, 6}, 1e-9));
    CHECK(near2(path.at(999.0), {22, 6}, 1e-9));
    CHECK(near2(path.at(-1.0), {10, 6}, 1e-9));

    nav::Path empty;
    CHECK(near2(empty.at(5.0), {0, 0}));
}

TEST_CASE("navgraph: free points snap to the street centerlines") {
    const auto& g = listingGraph();
    // Both points project onto the same y=3 centerline span.
    auto path = g.route({11, 4}, {13, 5});
    CHECK(path.length == doctest::Approx(1.0 + 2.0 + 2.0));
    REQUIRE(path.points.size() == 4);
    CHECK(near2(path.points[1], {11, 3}, 1e-9));
    CHECK(near2(path.points[2], {13, 3}, 1e-9));
}

TEST_CASE("navgraph: distances are symmetric and satisfy the triangle inequality") {
    const auto& g = listingGraph();
    std::vector<Vec2> anchors;
    for (int i = 0; i < 8; ++i) anchors.push_back(g.buildingAnchor(i));
    anchors.push_back(g.objectAnchor(0));
    anchors.push_back(g.objectAnchor(5));
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < anchors.size(); ++j) {
            double dij = g.distance(anchors[i], anchors[j]);
            CHECK(g.distance(anchors[j], anchors[i]) == doctest::Approx(dij));
            for (std::size_t k = 0; k < anchors.size(); ++k) {
                double dik = g.distance(anchors[i], anchors[k]);
                double dkj = g.distance(anchors[k], anchors[j]);
                CHECK(dij <= dik + dkj + 1e-6);
            }
        }
    }
}

TEST_CASE("navgraph: zone entry helpers") {
    const auto& g = listingGraph();
    const auto& city = listingCity();
    int parkZone = city.zonesOfType("park")[0];
    REQUIRE(g.zoneEntries(parkZone).size() == 1);
    CHECK(near2(g.zoneEntries(parkZone)[0], {16, 6}, 1e-6));
    CHECK(near2(g.nearestZoneEntry(parkZone, g.buildingAnchor(0)), {16, 6}, 1e-6));
}

TEST_CASE("navgraph: stranded anchors fail the build") {
    cg::SemanticCity city;
    city.config = cg::LayoutConfig{};
    city.lots.push_back({0, {{0, 0}, {12, 12}}, 0, 0, {0, -1}, 0, true});
    cg::Building a;
    a.id = 0;
    a.lotId = 0;
    a.entrances.push_back({"shop", {3, 0}});
    cg::Building b;
    b.id = 1;
    b.lotId = 0;
    b.entrances.push_back({"shop", {9, 0}});
    city.buildings = {a, b};
    city.buildIndexes();
    // No streets at all: each entrance is its own island.
    CHECK_THROWS_WITH_AS(nav::NavGraph::build(city), doctest::Contains("not connected"),
                         std::runtime_error);
}

TEST_CASE("navgraph: determinism across rebuilds") {
    const auto& city = listingCity();
    auto g1 = nav::NavGraph::build(city);
    auto g2 = nav::NavGraph::build(city);
    CHECK(g1.nodeCount() == g2.nodeCount());
    CHECK(g1.edgeCount() == g2.edgeCount());
    auto p1 = g1.route(g1.buildingAnchor(0), g1.buildingAnchor(7));
    auto p2 = g2.route(g2.buildingAnchor(0), g2.buildingAnchor(7));
    REQUIRE(p1.points.size() == p2.points.size());
    for (std::size_t i = 0; i < p1.points.size(); ++i) CHECK(near2(p1.points[i], p2.points[i]));
}
