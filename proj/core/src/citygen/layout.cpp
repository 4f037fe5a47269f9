#include "crowdforge/citygen/layout.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "crowdforge/common/digest.hpp"

namespace crowdforge::citygen {

void LayoutConfig::validate() const {
    auto bad = [](const std::string& msg) { throw std::runtime_error("layout config: " + msg); };
    if (blocksX < 1 || blocksY < 1) bad("blocks_x/blocks_y must be >= 1");
    if (lotsPerBlockX < 1 || lotsPerBlockY < 1) bad("lots_per_block must be >= 1");
    if (lotWidth <= 0 || lotDepth <= 0) bad("lot dimensions must be positive");
    if (streetWidth <= 0) bad("street_width must be positive");
    if (floorHeight <= 0) bad("floor_height must be positive");
    if (apartmentsPerFloor < 1) bad("apartments_per_floor must be >= 1");
    if (objectCapacity < 1) bad("object_capacity must be >= 1");
    if (zoneHeight <= 0) bad("zone_height must be positive");
}

LayoutConfig parseLayoutConfig(const std::string& text, const std::string& file) {
    LayoutConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    auto bad = [&](const std::string& msg) {
        throw std::runtime_error((file.empty() ? "layout config" : file) + ":" +
                                 std::to_string(lineNo) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key)) continue;
        if (!(ls >> eq >> value) || eq != "=") bad("expected 'key = value'");
        try {
            if (key == "blocks_x") cfg.blocksX = std::stoi(value);
            else if (key == "blocks_y") cfg.blocksY = std::stoi(value);
            else if (key == "lots_per_block_x") cfg.lotsPerBlockX = std::stoi(value);
            else if (key == "lots_per_block_y") cfg.lotsPerBlockY = std::stoi(value);
            else if (key == "lot_width") cfg.lotWidth = std::stod(value);
            else if (key == "lot_depth") cfg.lotDepth = std::stod(value);
            else if (key == "street_width") cfg.streetWidth = std::stod(value);
            else if (key == "floor_height") cfg.floorHeight = std::stod(value);
            else if (key == "apartments_per_floor") cfg.apartmentsPerFloor = std::stoi(value);
            else if (key == "object_capacity") cfg.objectCapacity = std::stoi(value);
            else if (key == "zone_height") cfg.zoneHeight = std::stod(value);
            else bad("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            bad("bad value for '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

LayoutConfig loadLayoutConfig(const std::string& path) {
    return parseLayoutConfig(readFileText(path), path);
}

Layout generateLayout(const LayoutConfig& config) {
    config.validate();
    Layout out;
    out.config = config;

    const double bw = config.lotsPerBlockX * config.lotWidth;
    const double bd = config.lotsPerBlockY * config.lotDepth;
    const double sw = config.streetWidth;
    const double cityW = config.blocksX * bw + (config.blocksX + 1) * sw;
    const double cityH = config.blocksY * bd + (config.blocksY + 1) * sw;
    out.bounds = {{0, 0}, {cityW, cityH}};

    for (int i = 0; i <= config.blocksX; ++i) {
        Street s;
        s.id = static_cast<int>(out.streets.size());
        s.vertical = true;
        double x0 = i * (bw + sw);
        s.rect = {{x0, 0}, {x0 + sw, cityH}};
        s.center = x0 + sw * 0.5;
        s.width = sw;
        out.streets.push_back(s);
    }
    for (int j = 0; j <= config.blocksY; ++j) {
        Street s;
        s.id = static_cast<int>(out.streets.size());
        s.vertical = false;
        double y0 = j * (bd + sw);
        s.rect = {{0, y0}, {cityW, y0 + sw}};
        s.center = y0 + sw * 0.5;
        s.width = sw;
        out.streets.push_back(s);
    }

    for (int by = 0; by < config.blocksY; ++by) {
        for (int bx = 0; bx < config.blocksX; ++bx) {
            double ox = sw + bx * (bw + sw);
            double oy = sw + by * (bd + sw);
            for (int j = 0; j < config.lotsPerBlockY; ++j) {
                for (int i = 0; i < config.lotsPerBlockX; ++i) {
                    LotFootprint lot;
                    lot.id = static_cast<int>(out.lots.size());
                    lot.blockX = bx;
                    lot.blockY = by;
                    lot.rect = {{ox + i * config.lotWidth, oy + j * config.lotDepth},
                                {ox + (i + 1) * config.lotWidth, oy + (j + 1) * config.lotDepth}};

                    // Street-adjacent edges, with their lengths; ties and
                    // priority resolved in south, east, north, west order.
                    struct Cand { Vec2 dir; double len; };
                    std::vector<Cand> cands;
                    if (j == 0) cands.push_back({{0, -1}, lot.rect.width()});
                    if (i == config.lotsPerBlockX - 1) cands.push_back({{1, 0}, lot.rect.depth()});
                    if (j == config.lotsPerBlockY - 1) cands.push_back({{0, 1}, lot.rect.width()});
                    if (i == 0) cands.push_back({{-1, 0}, lot.rect.depth()});

                    if (!cands.empty()) {
                        lot.streetAdjacent = true;
                        const Cand* best = &cands[0];
                        for (const auto& c : cands)
                            if (c.len > best->len) best = &c;
                        lot.frontDir = best->dir;
                    } else {
                        // Interior lot: face the nearest bounding street of
                        // the block (south or north half).
                        lot.streetAdjacent = false;
                        double southGap = lot.rect.lo.y - oy;
                        double northGap = (oy + bd) - lot.rect.hi.y;
                        lot.frontDir = southGap <= northGap ? Vec2{0, -1} : Vec2{0, 1};
                    }

                    // Owning front street id: the street whose rect touches
                    // the front edge (nearest by center distance otherwise).
                    Vec2 probe = lot.rect.center() +
                                 lot.frontDir * (0.5 * (lot.frontDir.x != 0 ? lot.rect.width()
                                                                            : lot.rect.depth()) +
                                                 0.1);
                    double bestDist = 1e18;
                    for (const auto& s : out.streets) {
                        Vec2 cl = closestPointOnSegment(s.centerlineA(), s.centerlineB(), probe);
                        double d = distance(cl, probe);
                        if (d < bestDist) {
                            bestDist = d;
                            lot.frontStreet = s.id;
                        }
                    }
                    out.lots.push_back(lot);
                }
            }
        }
    }
    return out;
}

}  // namespace crowdforge::citygen
