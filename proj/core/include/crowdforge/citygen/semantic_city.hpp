#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crowdforge/citygen/layout.hpp"
#include "crowdforge/citygen/scope.hpp"

namespace crowdforge::citygen {

struct Entrance {
    std::string type;  // "house", "shop", "workplace", "school", ...
    Vec2 position;
};

struct Building {
    int id = -1;
    int lotId = -1;
    std::vector<Entrance> entrances;
    int floors = 1;
    int residentialCapacity = 0;

    bool hasEntranceType(const std::string& type) const {
        for (const auto& e : entrances)
            if (e.type == type) return true;
        return false;
    }
    // First registered entrance; used for spawning/routing.
    const Entrance& primaryEntrance() const { return entrances.front(); }
};

struct Zone {
    int id = -1;
    int lotId = -1;
    std::string type;
    Scope volume;
    std::vector<Vec2> entryPoints;

    bool containsGround(const Vec2& p, double eps = 1e-9) const;
};

struct CityObject {
    int id = -1;
    int lotId = -1;
    int zoneId = -1;  // containing zone, -1 if none
    std::string type;
    Vec2 position;
    Rect2 bbox;
    std::vector<std::string> interactions;
    int capacity = 1;
};

// A terminal shape kept for geometry dumps and floor derivation.
struct LeafShape {
    int lotId = -1;
    int objectId = -1;  // owning tagged object, -1 for plain building geometry
    Scope scope;
    Vec3 color{0.8, 0.8, 0.8};
};

struct SemanticCity {
    LayoutConfig config;
    std::uint64_t seed = 0;
    Rect2 bounds;
    std::vector<LotFootprint> lots;
    std::vector<Street> streets;
    std::vector<Building> buildings;
    std::vector<Zone> zones;
    std::vector<CityObject> objects;
    std::vector<LeafShape> leaves;
    std::map<std::string, std::string> inputDigests;  // artifact meta

    // Lookup structures; call after populating/loading.
    void buildIndexes();

    const Building* buildingOnLot(int lotId) const;
    const std::vector<int>& buildingsWithEntranceType(const std::string& type) const;
    const std::vector<int>& zonesOfType(const std::string& type) const;
    // Objects of a type within `radius` of `center`, ids ascending.
    std::vector<int> objectsOfTypeNear(const std::string& type, const Vec2& center,
                                       double radius) const;

    // Throws std::runtime_error with all violations when invalid.
    void validate() const;

  private:
    std::map<int, int> lotBuilding_;
    std::map<std::string, std::vector<int>> entranceTypeIndex_;
    std::map<std::string, std::vector<int>> zoneTypeIndex_;
    // Uniform grid over bounds for object radius queries.
    double cellSize_ = 16.0;
    std::map<std::pair<int, int>, std::vector<int>> objectGrid_;
};

}  // namespace crowdforge::citygen
