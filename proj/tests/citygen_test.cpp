#include <cmath>
#include <string>
#include <vector>

#include "crowdforge/citygen/city_io.hpp"
#include "crowdforge/citygen/interpreter.hpp"
#include "crowdforge/citygen/layout.hpp"
#include "crowdforge/citygen/scope.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/rulelang/loader.hpp"
#include "doctest.h"

namespace cg = crowdforge::citygen;
namespace rl = crowdforge::rulelang;
using crowdforge::IncidentLog;
using crowdforge::Vec2;
using crowdforge::Vec3;

namespace {

std::string assetPath(const std::string& rel) {
    return std::string(CROWDFORGE_ASSET_DIR) + "/" + rel;
}

cg::SemanticCity generate(const std::string& rulesSrc, const cg::LayoutConfig& cfg,
                          std::uint64_t seed, IncidentLog& log) {
    auto rules = rl::loadRuleFileFromSource(rulesSrc, "test.cga");
    auto layout = cg::generateLayout(cfg);
    return cg::generateCity(layout, rules, seed, log);
}

cg::LayoutConfig oneLotConfig() {
    cg::LayoutConfig cfg;
    cfg.blocksX = 1;
    cfg.blocksY = 1;
    cfg.lotsPerBlockX = 1;
    cfg.lotsPerBlockY = 1;
    return cfg;
}

bool near2(const Vec2& a, const Vec2& b, double eps = 1e-9) {
    return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps;
}

bool near3(const Vec3& a, const Vec3& b, double eps = 1e-9) {
    return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps && std::abs(a.z - b.z) <= eps;
}

}  // namespace

TEST_CASE("layout: default config grid") {
    cg::LayoutConfig cfg;  // 2x2 blocks, 4x2 lots, 12m lots, 6m streets
    auto layout = cg::generateLayout(cfg);

    CHECK(layout.lots.size() == 32);
    CHECK(layout.streets.size() == 6);  // 3 vertical + 3 horizontal
    CHECK(layout.bounds.lo.x == 0.0);
    CHECK(layout.bounds.hi.x == doctest::Approx(114.0));  // 2*48 + 3*6
    CHECK(layout.bounds.hi.y == doctest::Approx(66.0));   // 2*24 + 3*6

    // Vertical streets at x0 = 0, 54, 108; horizontals at y0 = 0, 30, 60.
    CHECK(layout.streets[0].vertical);
    CHECK(layout.streets[0].center == doctest::Approx(3.0));
    CHECK(layout.streets[1].center == doctest::Approx(57.0));
    CHECK_FALSE(layout.streets[3].vertical);
    CHECK(layout.streets[4].center == doctest::Approx(33.0));

    // Lot 0: south-west lot of block (0,0), fronting the south street.
    const auto& lot0 = layout.lots[0];
    CHECK(lot0.rect.lo.x == doctest::Approx(6.0));
    CHECK(lot0.rect.lo.y == doctest::Approx(6.0));
    CHECK(lot0.rect.hi.x == doctest::Approx(18.0));
    CHECK(lot0.rect.hi.y == doctest::Approx(18.0));
    CHECK(near2(lot0.frontDir, {0, -1}));
    CHECK(lot0.frontStreet == 3);
    CHECK(lot0.streetAdjacent);

    // Lot 7 (i=3, j=1 of block 0,0): east and north edges tie on length;
    // east wins by priority order.
    const auto& lot7 = layout.lots[7];
    CHECK(near2(lot7.frontDir, {1, 0}));
    CHECK(lot7.frontStreet == 1);

    // Lot 5 (i=1, j=1): north row, interior column -> north.
    CHECK(near2(layout.lots[5].frontDir, {0, 1}));
    CHECK(layout.lots[5].frontStreet == 4);

    // All ids dense and in-bounds lots.
    for (std::size_t i = 0; i < layout.lots.size(); ++i) {
        CHECK(layout.lots[i].id == static_cast<int>(i));
        CHECK(layout.lots[i].rect.lo.x >= 0.0);
        CHECK(layout.lots[i].rect.hi.y <= layout.bounds.hi.y);
    }
}

TEST_CASE("layout: interior lots face the nearer block edge") {
    cg::LayoutConfig cfg;
    cfg.blocksX = 1;
    cfg.blocksY = 1;
    cfg.lotsPerBlockX = 3;
    cfg.lotsPerBlockY = 3;
    auto layout = cg::generateLayout(cfg);
    REQUIRE(layout.lots.size() == 9);
    const auto& center = layout.lots[4];  // i=1, j=1
    CHECK_FALSE(center.streetAdjacent);
    CHECK(near2(center.frontDir, {0, -1}));  // equal gaps -> south
}

TEST_CASE("layout config: parsing and validation") {
    auto cfg = cg::parseLayoutConfig("blocks_x = 3 # comment\nlot_width = 10.5\n\n");
    CHECK(cfg.blocksX == 3);
    CHECK(cfg.lotWidth == doctest::Approx(10.5));
    CHECK(cfg.blocksY == 2);  // default untouched

    CHECK_THROWS_WITH_AS(cg::parseLayoutConfig("bogus = 1\n"),
                         doctest::Contains("unknown key"), std::runtime_error);
    CHECK_THROWS_WITH_AS(cg::parseLayoutConfig("blocks_x 3\n"),
                         doctest::Contains("expected 'key = value'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(cg::parseLayoutConfig("blocks_x = -1\n"),
                         doctest::Contains("blocks_x"), std::runtime_error);
    CHECK_THROWS_WITH_AS(cg::parseLayoutConfig("street_width = 0\n"),
                         doctest::Contains("street_width"), std::runtime_error);
}

TEST_CASE("scope: scopeFromRect orients local z against the front") {
    // South-facing lot: az points north (away from street), ax east.
    auto s = cg::scopeFromRect({{6, 6}, {18, 18}}, {0, -1});
    CHECK(near3(s.origin, {6, 0, 6}));
    CHECK(near3(s.ax, {1, 0, 0}));
    CHECK(near3(s.az, {0, 0, 1}));
    CHECK(near3(s.size, {12, 0, 12}));

    // East-facing lot: az points west, ax = ay x az = north(+z).
    auto e = cg::scopeFromRect({{42, 18}, {54, 30}}, {1, 0});
    CHECK(near3(e.origin, {54, 0, 18}));
    CHECK(near3(e.ax, {0, 0, 1}));
    CHECK(near3(e.az, {-1, 0, 0}));
    CHECK(near3(e.size, {12, 0, 12}));
}

TEST_CASE("scope: extractFaces classifies against the street direction") {
    cg::Scope box;
    box.origin = {0, 0, 0};
    box.size = {2, 3, 4};
    auto faces = cg::extractFaces(box, {0, -1});
    REQUIRE(faces.size() == 6);

    int fronts = 0, backs = 0, sides = 0, tops = 0, bottoms = 0;
    for (const auto& f : faces) {
        switch (f.kind) {
            case cg::FaceKind::Front: ++fronts; break;
            case cg::FaceKind::Back: ++backs; break;
            case cg::FaceKind::Side: ++sides; break;
            case cg::FaceKind::Top: ++tops; break;
            case cg::FaceKind::Bottom: ++bottoms; break;
        }
    }
    CHECK(fronts == 1);
    CHECK(backs == 1);
    CHECK(sides == 2);
    CHECK(tops == 1);
    CHECK(bottoms == 1);

    for (const auto& f : faces) {
        if (f.kind != cg::FaceKind::Front) continue;
        // Front face lies in the z=0 plane, spans 2 x 3, outward normal -z,
        // origin at the max-x corner so the face is right-handed.
        CHECK(near3(f.scope.az, {0, 0, -1}));
        CHECK(near3(f.scope.ax, {-1, 0, 0}));
        CHECK(near3(f.scope.origin, {2, 0, 0}));
        CHECK(near3(f.scope.size, {2, 3, 0}));
    }
    // A 2D scope classifies itself.
    cg::Scope flat;
    flat.size = {2, 3, 0};
    flat.az = {0, 0, -1};
    flat.ax = {-1, 0, 0};
    auto self = cg::extractFaces(flat, {0, -1});
    REQUIRE(self.size() == 1);
    CHECK(self[0].kind == cg::FaceKind::Front);
}

TEST_CASE("citygen: split sizes, absolute + relative") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> split(x) { 8: A | ~1: B }\n"
        "A -> extrude(1)\n"
        "B ->\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.leaves.size() == 2);
    CHECK(near3(city.leaves[0].scope.origin, {6, 0, 6}));
    CHECK(near3(city.leaves[0].scope.size, {8, 1, 12}));
    CHECK(near3(city.leaves[1].scope.origin, {14, 0, 6}));
    CHECK(near3(city.leaves[1].scope.size, {4, 0, 12}));
    CHECK(log.entries().empty());
}

TEST_CASE("citygen: relative shares split the remainder proportionally") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> split(x) { ~1: P | 4: Q | ~3: P }\n"
        "P ->\n"
        "Q ->\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.leaves.size() == 3);
    CHECK(city.leaves[0].scope.size.x == doctest::Approx(2.0));
    CHECK(city.leaves[1].scope.size.x == doctest::Approx(4.0));
    CHECK(city.leaves[2].scope.size.x == doctest::Approx(6.0));
}

TEST_CASE("citygen: oversized absolute split scales down with a warning") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> split(x) { 8: A | 8: A }\n"
        "A ->\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.leaves.size() == 2);
    CHECK(city.leaves[0].scope.size.x == doctest::Approx(6.0));
    CHECK(city.leaves[1].scope.size.x == doctest::Approx(6.0));
    REQUIRE(log.entries().size() == 1);
    CHECK(log.entries()[0].severity == crowdforge::Incident::Severity::Warning);
    CHECK(log.errorCount() == 0);
}

TEST_CASE("citygen: repeat split tiles and rescales to fit") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> split(z) { 5: T }*\n"
        "T ->\n",
        oneLotConfig(), 1, log);
    // 12 / 5 rounds to 2 repetitions, each rescaled to 6.
    REQUIRE(city.leaves.size() == 2);
    CHECK(city.leaves[0].scope.size.z == doctest::Approx(6.0));
    CHECK(city.leaves[1].scope.size.z == doctest::Approx(6.0));
    CHECK(near3(city.leaves[1].scope.origin, {6, 0, 12}));
}

TEST_CASE("citygen: split slice sizes always sum to the extent") {
    // Property over a few irrational-ish patterns.
    for (const char* src : {
             "@StartRule\nLot -> split(x) { 3.3: A | ~1: A | 0.77: A | ~2.5: A }\nA ->\n",
             "@StartRule\nLot -> split(z) { 1.7: A | 2.9: A }*\nA ->\n",
             "@StartRule\nLot -> split(x) { ~0.1: A | ~0.9: A }\nA ->\n",
         }) {
        IncidentLog log;
        auto city = generate(src, oneLotConfig(), 7, log);
        double sum = 0;
        for (const auto& leaf : city.leaves) {
            int axis = src[24] == 'x' ? 0 : 2;
            sum += leaf.scope.extent(axis);
        }
        CHECK(sum == doctest::Approx(12.0));
    }
}

TEST_CASE("citygen: negative extrusion insets the scope") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> extrude(-0.5)\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.leaves.size() == 1);
    CHECK(near3(city.leaves[0].scope.origin, {6, -0.5, 6}));
    CHECK(city.leaves[0].scope.size.y == doctest::Approx(0.5));
}

TEST_CASE("citygen: listing rules produce the expected semantic city") {
    auto rules = rl::loadRuleFile(assetPath("rules/building.cga"));
    auto layout = cg::generateLayout(cg::LayoutConfig{});
    IncidentLog log;
    auto city = cg::generateCity(layout, rules, 42, log);

    CHECK(log.entries().empty());
    CHECK(city.buildings.size() == 32);
    CHECK(city.zones.size() == 32);
    CHECK(city.objects.size() == 96);
    CHECK(city.leaves.size() == 512);  // 16 per lot

    // Lot 0: shop door centered on the 1.5m door strip -> x = 10 on the
    // south lot edge y = 6.
    const auto* b0 = city.buildingOnLot(0);
    REQUIRE(b0 != nullptr);
    REQUIRE(b0->entrances.size() == 1);
    CHECK(b0->entrances[0].type == "shop");
    CHECK(near2(b0->entrances[0].position, {10, 6}, 1e-6));
    CHECK(b0->floors == 2);  // 5m tall walls / 3m floor height, rounded
    CHECK(b0->residentialCapacity == 0);
    CHECK(b0->hasEntranceType("shop"));
    CHECK_FALSE(b0->hasEntranceType("house"));

    // Park zone on lot 0: 4m strip at the east side, entry on the south
    // street edge, volume extruded to the configured zone height.
    const auto& parks = city.zonesOfType("park");
    CHECK(parks.size() == 32);
    const auto& z0 = city.zones[parks[0]];
    CHECK(z0.lotId == 0);
    CHECK(z0.volume.size.y == doctest::Approx(3.0));
    REQUIRE(z0.entryPoints.size() == 1);
    CHECK(near2(z0.entryPoints[0], {16, 6}, 1e-6));

    // Three benches per lot, sitting inside the park zone.
    std::vector<Vec2> expect{{17.8, 7}, {17.8, 11}, {17.8, 15}};
    for (int i = 0; i < 3; ++i) {
        const auto& o = city.objects[i];
        CHECK(o.lotId == 0);
        CHECK(o.type == "bench");
        CHECK(near2(o.position, expect[i], 1e-6));
        CHECK(o.zoneId == z0.id);
        REQUIRE(o.interactions.size() == 1);
        CHECK(o.interactions[0] == "sit");
        CHECK(o.capacity == 1);
    }

    // Radius query: from the first bench, 5m reaches only the next one.
    auto nearBenches = city.objectsOfTypeNear("bench", {17.8, 7}, 5.0);
    CHECK(nearBenches == std::vector<int>{0, 1});
    CHECK(city.objectsOfTypeNear("tree", {17.8, 7}, 5.0).empty());

    CHECK(city.buildingsWithEntranceType("shop").size() == 32);
    CHECK(city.buildingsWithEntranceType("house").empty());
}

TEST_CASE("citygen: expansion is deterministic and seed-sensitive") {
    cg::LayoutConfig cfg;
    const std::string src =
        "@StartRule\n"
        "Lot -> extrude(rand(3, 9))\n";
    IncidentLog log;
    auto a = generate(src, cfg, 7, log);
    auto b = generate(src, cfg, 7, log);
    auto c = generate(src, cfg, 8, log);
    CHECK(cg::cityToJson(a) == cg::cityToJson(b));
    CHECK(cg::cityToJson(a) != cg::cityToJson(c));
    // Lots draw from independent substreams: heights differ across lots.
    CHECK(a.leaves[0].scope.size.y != doctest::Approx(a.leaves[1].scope.size.y));
}

TEST_CASE("citygen: house entrances yield residential capacity") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> extrude(9) comp(f) { front: Door | all: Wall }\n"
        "Door -> entrance(\"house\")\n"
        "Wall ->\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.buildings.size() == 1);
    CHECK(city.buildings[0].floors == 3);
    CHECK(city.buildings[0].residentialCapacity == 6);  // 3 floors x 2 apartments
}

TEST_CASE("citygen: lots without entrances produce no building") {
    IncidentLog log;
    auto city = generate("@StartRule\nLot -> extrude(4)\n", oneLotConfig(), 1, log);
    CHECK(city.buildings.empty());
    CHECK(city.leaves.size() == 1);
}

TEST_CASE("citygen: zone away from any street falls back to nearest boundary") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> split(x) { ~1: NIL | 4: Inner | ~1: NIL }\n"
        "Inner -> split(z) { ~1: NIL | 4: Core | ~1: NIL }\n"
        "Core -> zone(\"garden\")\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.zones.size() == 1);
    REQUIRE(city.zones[0].entryPoints.size() == 1);
    // Zone spans [10,14]^2; nearest street point is (3,12) on the west
    // street centerline, so the entry is the west edge midpoint.
    CHECK(near2(city.zones[0].entryPoints[0], {10, 12}, 1e-6));
}

TEST_CASE("citygen: hard rule errors throw") {
    IncidentLog log;
    CHECK_THROWS_WITH_AS(generate("@StartRule\nLot -> Missing\n", oneLotConfig(), 1, log),
                         doctest::Contains("unknown rule or operation"), std::runtime_error);
    CHECK_THROWS_WITH_AS(generate("@StartRule\nLot -> entrance(\"\")\n", oneLotConfig(), 1, log),
                         doctest::Contains("entrance"), std::runtime_error);
    CHECK_THROWS_WITH_AS(generate("@StartRule\nLot -> zone(3)\n", oneLotConfig(), 1, log),
                         doctest::Contains("zone"), std::runtime_error);
    CHECK_THROWS_WITH_AS(generate("@StartRule\nLot -> split(w) { 1: NIL }\n", oneLotConfig(), 1,
                                  log),
                         doctest::Contains("split axis"), std::runtime_error);
    CHECK_THROWS_WITH_AS(generate("@StartRule\nLot -> split(x) { -1: NIL }\n", oneLotConfig(), 1,
                                  log),
                         doctest::Contains("non-negative"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        generate("@StartRule\nLot -> A(1)\nA ->\n", oneLotConfig(), 1, log),
        doctest::Contains("expects 0 arguments"), std::runtime_error);
    CHECK_THROWS_WITH_AS(generate("Lot -> NIL\n", oneLotConfig(), 1, log),
                         doctest::Contains("no @StartRule"), std::runtime_error);
}

TEST_CASE("citygen: runaway recursion aborts the lot, not the run") {
    cg::LayoutConfig cfg;
    cfg.blocksX = 1;
    cfg.blocksY = 1;
    cfg.lotsPerBlockX = 2;
    cfg.lotsPerBlockY = 1;
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> case lot.id == 0: Loop else: extrude(2)\n"
        "Loop -> Loop\n",
        cfg, 1, log);
    // Lot 0 aborted and rolled back; lot 1 expanded normally.
    CHECK(log.errorCount() == 1);
    REQUIRE(city.leaves.size() == 1);
    CHECK(city.leaves[0].lotId == 1);
}

TEST_CASE("citygen: rule parameters and lot variables") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> Box(lot.width / 4)\n"
        "Box(h) -> extrude(h)\n",
        oneLotConfig(), 1, log);
    REQUIRE(city.leaves.size() == 1);
    CHECK(city.leaves[0].scope.size.y == doctest::Approx(3.0));
}

TEST_CASE("citygen: group brackets restore the scope") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> [ t(2, 0, 0) entrance(\"shop\") ] extrude(1)\n",
        oneLotConfig(), 1, log);
    // Entrance recorded from the translated scope; the trunk extrusion uses
    // the restored origin.
    REQUIRE(city.buildings.size() == 1);
    CHECK(near2(city.buildings[0].entrances[0].position, {8, 6}, 1e-9));
    REQUIRE(city.leaves.size() == 1);
    CHECK(near3(city.leaves[0].scope.origin, {6, 0, 6}));
    CHECK(city.leaves[0].scope.size.y == doctest::Approx(1.0));
}

TEST_CASE("citygen: a rule spawned inside brackets makes the trunk interior") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> [ t(2, 0, 0) Inner ] extrude(1)\n"
        "Inner -> extrude(0.25)\n",
        oneLotConfig(), 1, log);
    // The shape tree has Inner as a child of the lot shape, so only Inner's
    // geometry is a leaf; the trunk never duplicates overlapping geometry.
    REQUIRE(city.leaves.size() == 1);
    CHECK(near3(city.leaves[0].scope.origin, {8, 0, 6}));
    CHECK(city.leaves[0].scope.size.y == doctest::Approx(0.25));
}

TEST_CASE("citygen: items after a consumed shape warn and are skipped") {
    IncidentLog log;
    auto city = generate(
        "@StartRule\n"
        "Lot -> NIL extrude(5)\n",
        oneLotConfig(), 1, log);
    CHECK(city.leaves.empty());
    REQUIRE(log.entries().size() == 1);
    CHECK(log.entries()[0].severity == crowdforge::Incident::Severity::Warning);
}

TEST_CASE("citygen: attributes evaluate once, overridable via defines") {
    const std::string src =
        "height = 6\n"
        "@StartRule\n"
        "Lot -> extrude(height)\n";
    IncidentLog layoutLog;
    auto city = generate(src, oneLotConfig(), 1, layoutLog);
    CHECK(city.leaves[0].scope.size.y == doctest::Approx(6.0));

    rl::LoadOptions opts;
    opts.defines["height"] = "2.5";
    auto rules = rl::loadRuleFileFromSource(src, "test.cga", {}, opts);
    IncidentLog log;
    auto city2 = cg::generateCity(cg::generateLayout(oneLotConfig()), rules, 1, log);
    CHECK(city2.leaves[0].scope.size.y == doctest::Approx(2.5));
}

TEST_CASE("city_io: json round-trip is byte-stable") {
    auto rules = rl::loadRuleFile(assetPath("rules/building.cga"));
    IncidentLog log;
    auto city = cg::generateCity(cg::generateLayout(cg::LayoutConfig{}), rules, 42, log);
    city.inputDigests["rules"] = "0123456789abcdef";

    std::string once = cg::cityToJson(city);
    auto reloaded = cg::cityFromJson(once);
    CHECK(cg::cityToJson(reloaded) == once);

    CHECK(reloaded.buildings.size() == city.buildings.size());
    CHECK(reloaded.inputDigests.at("rules") == "0123456789abcdef");
    // Indexes rebuilt after load.
    CHECK(reloaded.buildingsWithEntranceType("shop").size() == 32);
    REQUIRE(reloaded.buildingOnLot(0) != nullptr);
    CHECK(reloaded.buildingOnLot(0)->entrances[0].type == "shop");
    CHECK_NOTHROW(reloaded.validate());
}

TEST_CASE("citygen: two same-shaped lots expand to congruent local geometry") {
    cg::LayoutConfig cfg;
    cfg.blocksX = 1;
    cfg.blocksY = 1;
    cfg.lotsPerBlockX = 2;
    cfg.lotsPerBlockY = 1;
    auto rules = rl::loadRuleFile(assetPath("rules/building.cga"));
    IncidentLog log;
    auto city = cg::generateCity(cg::generateLayout(cfg), rules, 3, log);
    REQUIRE(city.buildings.size() == 2);
    // Both lots front the south street; entrances differ by the lot pitch.
    auto e0 = city.buildings[0].entrances[0].position;
    auto e1 = city.buildings[1].entrances[0].position;
    CHECK(e1.x - e0.x == doctest::Approx(12.0));
    CHECK(e1.y == doctest::Approx(e0.y));
}
