#include "crowdforge/citygen/semantic_city.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace crowdforge::citygen {

bool Zone::containsGround(const Vec2& p, double eps) const {
    // Ground quad is axis-aligned in scope-local coordinates.
    Vec3 d3{p.x - volume.origin.x, 0, p.y - volume.origin.z};
    double u = d3.dot(volume.ax);
    double w = d3.dot(volume.az);
    return u >= -eps && u <= volume.size.x + eps && w >= -eps && w <= volume.size.z + eps;
}

void SemanticCity::buildIndexes() {
    lotBuilding_.clear();
    entranceTypeIndex_.clear();
    zoneTypeIndex_.clear();
    objectGrid_.clear();
    for (const auto& b : buildings) {
        lotBuilding_[b.lotId] = b.id;
        std::set<std::string> seen;
        for (const auto& e : b.entrances)
            if (seen.insert(e.type).second) entranceTypeIndex_[e.type].push_back(b.id);
    }
    for (const auto& z : zones) zoneTypeIndex_[z.type].push_back(z.id);
    for (const auto& o : objects) {
        int cx = static_cast<int>(std::floor(o.position.x / cellSize_));
        int cy = static_cast<int>(std::floor(o.position.y / cellSize_));
        objectGrid_[{cx, cy}].push_back(o.id);
    }
}

const Building* SemanticCity::buildingOnLot(int lotId) const {
    auto it = lotBuilding_.find(lotId);
    return it == lotBuilding_.end() ? nullptr : &buildings[it->second];
}

const std::vector<int>& SemanticCity::buildingsWithEntranceType(const std::string& type) const {
    static const std::vector<int> kEmpty;
    auto it = entranceTypeIndex_.find(type);
    return it == entranceTypeIndex_.end() ? kEmpty : it->second;
}

const std::vector<int>& SemanticCity::zonesOfType(const std::string& type) const {
    static const std::vector<int> kEmpty;
    auto it = zoneTypeIndex_.find(type);
    return it == zoneTypeIndex_.end() ? kEmpty : it->second;
}

std::vector<int> SemanticCity::objectsOfTypeNear(const std::string& type, const Vec2& center,
                                                 double radius) const {
    std::vector<int> out;
    int cx0 = static_cast<int>(std::floor((center.x - radius) / cellSize_));
    int cx1 = static_cast<int>(std::floor((center.x + radius) / cellSize_));
    int cy0 = static_cast<int>(std::floor((center.y - radius) / cellSize_));
    int cy1 = static_cast<int>(std::floor((center.y + radius) / cellSize_));
    for (int cy = cy0; cy <= cy1; ++cy) {
        for (int cx = cx0; cx <= cx1; ++cx) {
            auto it = objectGrid_.find({cx, cy});
            if (it == objectGrid_.end()) continue;
            for (int id : it->second) {
                const CityObject& o = objects[id];
                if (o.type == type && distance(o.position, center) <= radius) out.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double distToRectBoundary(const Rect2& r, const Vec2& p) {
    std::array<std::pair<Vec2, Vec2>, 4> edges{{
        {{r.lo.x, r.lo.y}, {r.hi.x, r.lo.y}},
        {{r.hi.x, r.lo.y}, {r.hi.x, r.hi.y}},
        {{r.hi.x, r.hi.y}, {r.lo.x, r.hi.y}},
        {{r.lo.x, r.hi.y}, {r.lo.x, r.lo.y}},
    }};
    double best = 1e18;
    for (const auto& [a, b] : edges)
        best = std::min(best, distance(closestPointOnSegment(a, b, p), p));
    return best;
}

double distToRect(const Rect2& r, const Vec2& p) {
    if (r.contains(p)) return 0.0;
    return distToRectBoundary(r, p);
}

}  // namespace

void SemanticCity::validate() const {
    std::ostringstream errs;
    auto err = [&](const std::string& m) { errs << m << "\n"; };

    for (std::size_t i = 0; i < buildings.size(); ++i) {
        const Building& b = buildings[i];
        if (b.id != static_cast<int>(i)) err("building ids not dense");
        if (b.entrances.empty()) err("building " + std::to_string(b.id) + " has no entrance");
        bool house = b.hasEntranceType("house");
        if (house && b.residentialCapacity <= 0)
            err("building " + std::to_string(b.id) + ": house without residential capacity");
        if (!house && b.residentialCapacity != 0)
            err("building " + std::to_string(b.id) + ": capacity on non-house");
        for (const auto& e : b.entrances) {
            if (e.type.empty())
                err("building " + std::to_string(b.id) + ": entrance with empty type");
            if (b.lotId < 0 || b.lotId >= static_cast<int>(lots.size())) {
                err("building " + std::to_string(b.id) + ": bad lot id");
                continue;
            }
            const Rect2& lr = lots[b.lotId].rect;
            if (distToRectBoundary(lr, e.position) > 1e-6)
                err("building " + std::to_string(b.id) + ": entrance (" +
                    std::to_string(e.position.x) + ", " + std::to_string(e.position.y) +
                    ") not on lot boundary");
            double streetDist = 1e18;
            for (const auto& s : streets) streetDist = std::min(streetDist, distToRect(s.rect, e.position));
            if (streetDist > config.streetWidth)
                err("building " + std::to_string(b.id) + ": entrance farther than a street width "
                    "from any street");
        }
    }
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const Zone& z = zones[i];
        if (z.id != static_cast<int>(i)) err("zone ids not dense");
        if (z.type.empty()) err("zone " + std::to_string(z.id) + ": empty type");
        if (z.entryPoints.empty()) err("zone " + std::to_string(z.id) + ": no entry points");
        for (const auto& p : z.entryPoints) {
            if (!z.containsGround(p, 1e-6))
                err("zone " + std::to_string(z.id) + ": entry point outside zone");
        }
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const CityObject& o = objects[i];
        if (o.id != static_cast<int>(i)) err("object ids not dense");
        if (o.capacity < 1) err("object " + std::to_string(o.id) + ": capacity < 1");
        bool placed = false;
        if (o.lotId >= 0 && o.lotId < static_cast<int>(lots.size()) &&
            lots[o.lotId].rect.contains(o.position, 1e-6))
            placed = true;
        if (!placed && o.zoneId >= 0 && o.zoneId < static_cast<int>(zones.size()) &&
            zones[o.zoneId].containsGround(o.position, 1e-6))
            placed = true;
        if (!placed)
            err("object " + std::to_string(o.id) + ": position outside its lot and zone");
    }
    std::string all = errs.str();
    if (!all.empty()) throw std::runtime_error("semantic city validation failed:\n" + all);
}

}  // namespace crowdforge::citygen
