#pragma once

#include <string>
#include <vector>

#include "crowdforge/common/geom.hpp"

namespace crowdforge::citygen {

struct LayoutConfig {
    int blocksX = 2;
    int blocksY = 2;
    int lotsPerBlockX = 4;
    int lotsPerBlockY = 2;
    double lotWidth = 12.0;
    double lotDepth = 12.0;
    double streetWidth = 6.0;
    double floorHeight = 3.0;
    int apartmentsPerFloor = 2;
    int objectCapacity = 1;
    double zoneHeight = 3.0;

    void validate() const;  // throws std::runtime_error
};

// Parses a "key = value" config file ('#' comments). Unknown keys are errors.
LayoutConfig parseLayoutConfig(const std::string& text, const std::string& file = "");
LayoutConfig loadLayoutConfig(const std::string& path);

struct LotFootprint {
    int id = -1;
    Rect2 rect;
    int blockX = 0;
    int blockY = 0;
    Vec2 frontDir;       // unit vector from the lot toward its front street
    int frontStreet = -1;
    bool streetAdjacent = false;
};

struct Street {
    int id = -1;
    bool vertical = false;  // vertical: constant x, spans city in y
    double center = 0.0;
    double width = 0.0;
    Rect2 rect;

    Vec2 centerlineA() const {
        return vertical ? Vec2{center, rect.lo.y} : Vec2{rect.lo.x, center};
    }
    Vec2 centerlineB() const {
        return vertical ? Vec2{center, rect.hi.y} : Vec2{rect.hi.x, center};
    }
};

struct Layout {
    LayoutConfig config;
    std::vector<LotFootprint> lots;
    std::vector<Street> streets;
    Rect2 bounds;
};

// Grid of blocks separated by streets, each block a grid of lots. Fully
// deterministic for a given config.
Layout generateLayout(const LayoutConfig& config);

}  // namespace crowdforge::citygen
