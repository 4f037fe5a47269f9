#include "crowdforge/citygen/city_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crowdforge/common/digest.hpp"
#include "crowdforge/common/version.hpp"

namespace crowdforge::citygen {
namespace {

using Json = nlohmann::ordered_json;

Json toJson(const Vec2& v) { return Json::array({v.x, v.y}); }
Json toJson(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Json toJson(const Rect2& r) { return Json::array({r.lo.x, r.lo.y, r.hi.x, r.hi.y}); }

Json toJson(const Scope& s) {
    Json j;
    j["origin"] = toJson(s.origin);
    j["ax"] = toJson(s.ax);
    j["ay"] = toJson(s.ay);
    j["az"] = toJson(s.az);
    j["size"] = toJson(s.size);
    return j;
}

Vec2 vec2From(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
Vec3 vec3From(const Json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}
Rect2 rectFrom(const Json& j) {
    return {{j.at(0).get<double>(), j.at(1).get<double>()},
            {j.at(2).get<double>(), j.at(3).get<double>()}};
}

Scope scopeFrom(const Json& j) {
    Scope s;
    s.origin = vec3From(j.at("origin"));
    s.ax = vec3From(j.at("ax"));
    s.ay = vec3From(j.at("ay"));
    s.az = vec3From(j.at("az"));
    s.size = vec3From(j.at("size"));
    return s;
}

Json configToJson(const LayoutConfig& c) {
    Json j;
    j["blocks_x"] = c.blocksX;
    j["blocks_y"] = c.blocksY;
    j["lots_per_block_x"] = c.lotsPerBlockX;
    j["lots_per_block_y"] = c.lotsPerBlockY;
    j["lot_width"] = c.lotWidth;
    j["lot_depth"] = c.lotDepth;
    j["street_width"] = c.streetWidth;
    j["floor_height"] = c.floorHeight;
    j["apartments_per_floor"] = c.apartmentsPerFloor;
    j["object_capacity"] = c.objectCapacity;
    j["zone_height"] = c.zoneHeight;
    return j;
}

LayoutConfig configFrom(const Json& j) {
    LayoutConfig c;
    c.blocksX = j.at("blocks_x").get<int>();
    c.blocksY = j.at("blocks_y").get<int>();
    c.lotsPerBlockX = j.at("lots_per_block_x").get<int>();
    c.lotsPerBlockY = j.at("lots_per_block_y").get<int>();
    c.lotWidth = j.at("lot_width").get<double>();
    c.lotDepth = j.at("lot_depth").get<double>();
    c.streetWidth = j.at("street_width").get<double>();
    c.floorHeight = j.at("floor_height").get<double>();
    c.apartmentsPerFloor = j.at("apartments_per_floor").get<int>();
    c.objectCapacity = j.at("object_capacity").get<int>();
    c.zoneHeight = j.at("zone_height").get<double>();
    return c;
}

}  // namespace

std::string cityToJson(const SemanticCity& city) {
    Json j;
    j["meta"]["seed"] = city.seed;
    j["meta"]["version"] = kVersion;
    j["meta"]["inputs"] = Json::object();
    for (const auto& [name, digest] : city.inputDigests) j["meta"]["inputs"][name] = digest;
    j["config"] = configToJson(city.config);
    j["bounds"] = toJson(city.bounds);

    j["lots"] = Json::array();
    for (const auto& lot : city.lots) {
        Json l;
        l["id"] = lot.id;
        l["rect"] = toJson(lot.rect);
        l["block_x"] = lot.blockX;
        l["block_y"] = lot.blockY;
        l["front_dir"] = toJson(lot.frontDir);
        l["front_street"] = lot.frontStreet;
        l["street_adjacent"] = lot.streetAdjacent;
        j["lots"].push_back(std::move(l));
    }

    j["streets"] = Json::array();
    for (const auto& st : city.streets) {
        Json s;
        s["id"] = st.id;
        s["vertical"] = st.vertical;
        s["center"] = st.center;
        s["width"] = st.width;
        s["rect"] = toJson(st.rect);
        j["streets"].push_back(std::move(s));
    }

    j["buildings"] = Json::array();
    for (const auto& b : city.buildings) {
        Json bj;
        bj["id"] = b.id;
        bj["lot"] = b.lotId;
        bj["floors"] = b.floors;
        bj["residential_capacity"] = b.residentialCapacity;
        bj["entrances"] = Json::array();
        for (const auto& e : b.entrances) {
            Json ej;
            ej["type"] = e.type;
            ej["position"] = toJson(e.position);
            bj["entrances"].push_back(std::move(ej));
        }
        j["buildings"].push_back(std::move(bj));
    }

    j["zones"] = Json::array();
    for (const auto& z : city.zones) {
        Json zj;
        zj["id"] = z.id;
        zj["lot"] = z.lotId;
        zj["type"] = z.type;
        zj["volume"] = toJson(z.volume);
        zj["entries"] = Json::array();
        for (const auto& p : z.entryPoints) zj["entries"].push_back(toJson(p));
        j["zones"].push_back(std::move(zj));
    }

    j["objects"] = Json::array();
    for (const auto& o : city.objects) {
        Json oj;
        oj["id"] = o.id;
        oj["lot"] = o.lotId;
        oj["zone"] = o.zoneId;
        oj["type"] = o.type;
        oj["position"] = toJson(o.position);
        oj["bbox"] = toJson(o.bbox);
        oj["interactions"] = o.interactions;
        oj["capacity"] = o.capacity;
        j["objects"].push_back(std::move(oj));
    }

    j["leaves"] = Json::array();
    for (const auto& leaf : city.leaves) {
        Json lj;
        lj["lot"] = leaf.lotId;
        lj["object"] = leaf.objectId;
        lj["scope"] = toJson(leaf.scope);
        lj["color"] = toJson(leaf.color);
        j["leaves"].push_back(std::move(lj));
    }

    return j.dump(2) + "\n";
}

SemanticCity cityFromJson(const std::string& text) {
    Json j = Json::parse(text);
    SemanticCity city;
    city.seed = j.at("meta").at("seed").get<std::uint64_t>();
    if (j.at("meta").contains("inputs")) {
        for (auto it = j["meta"]["inputs"].begin(); it != j["meta"]["inputs"].end(); ++it)
            city.inputDigests[it.key()] = it.value().get<std::string>();
    }
    city.config = configFrom(j.at("config"));
    city.bounds = rectFrom(j.at("bounds"));

    for (const auto& l : j.at("lots")) {
        LotFootprint lot;
        lot.id = l.at("id").get<int>();
        lot.rect = rectFrom(l.at("rect"));
        lot.blockX = l.at("block_x").get<int>();
        lot.blockY = l.at("block_y").get<int>();
        lot.frontDir = vec2From(l.at("front_dir"));
        lot.frontStreet = l.at("front_street").get<int>();
        lot.streetAdjacent = l.at("street_adjacent").get<bool>();
        city.lots.push_back(std::move(lot));
    }

    for (const auto& s : j.at("streets")) {
        Street st;
        st.id = s.at("id").get<int>();
        st.vertical = s.at("vertical").get<bool>();
        st.center = s.at("center").get<double>();
        st.width = s.at("width").get<double>();
        st.rect = rectFrom(s.at("rect"));
        city.streets.push_back(std::move(st));
    }

    for (const auto& b : j.at("buildings")) {
        Building bd;
        bd.id = b.at("id").get<int>();
        bd.lotId = b.at("lot").get<int>();
        bd.floors = b.at("floors").get<int>();
        bd.residentialCapacity = b.at("residential_capacity").get<int>();
        for (const auto& e : b.at("entrances"))
            bd.entrances.push_back({e.at("type").get<std::string>(), vec2From(e.at("position"))});
        city.buildings.push_back(std::move(bd));
    }

    for (const auto& z : j.at("zones")) {
        Zone zn;
        zn.id = z.at("id").get<int>();
        zn.lotId = z.at("lot").get<int>();
        zn.type = z.at("type").get<std::string>();
        zn.volume = scopeFrom(z.at("volume"));
        for (const auto& p : z.at("entries")) zn.entryPoints.push_back(vec2From(p));
        city.zones.push_back(std::move(zn));
    }

    for (const auto& o : j.at("objects")) {
        CityObject ob;
        ob.id = o.at("id").get<int>();
        ob.lotId = o.at("lot").get<int>();
        ob.zoneId = o.at("zone").get<int>();
        ob.type = o.at("type").get<std::string>();
        ob.position = vec2From(o.at("position"));
        ob.bbox = rectFrom(o.at("bbox"));
        ob.interactions = o.at("interactions").get<std::vector<std::string>>();
        ob.capacity = o.at("capacity").get<int>();
        city.objects.push_back(std::move(ob));
    }

    for (const auto& l : j.at("leaves")) {
        LeafShape leaf;
        leaf.lotId = l.at("lot").get<int>();
        leaf.objectId = l.at("object").get<int>();
        leaf.scope = scopeFrom(l.at("scope"));
        leaf.color = vec3From(l.at("color"));
        city.leaves.push_back(std::move(leaf));
    }

    city.buildIndexes();
    return city;
}

void saveCityJson(const SemanticCity& city, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << cityToJson(city);
}

SemanticCity loadCityJson(const std::filesystem::path& path) {
    return cityFromJson(readFileText(path));
}

void saveCityObj(const SemanticCity& city, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# crowdforge city geometry\n";
    std::size_t base = 1;
    for (std::size_t i = 0; i < city.leaves.size(); ++i) {
        const LeafShape& leaf = city.leaves[i];
        const Scope& s = leaf.scope;
        out << "o leaf_" << i << "\n";
        int flat = s.normalAxis();
        if (flat >= 0) {
            // Planar leaf: one quad spanning the two non-degenerate axes.
            int u = (flat + 1) % 3, v = (flat + 2) % 3;
            Vec3 p0 = s.origin;
            Vec3 p1 = p0 + s.axis(u) * s.extent(u);
            Vec3 p2 = p1 + s.axis(v) * s.extent(v);
            Vec3 p3 = p0 + s.axis(v) * s.extent(v);
            for (const Vec3& p : {p0, p1, p2, p3})
                out << "v " << p.x << " " << p.y << " " << p.z << "\n";
            out << "f " << base << " " << base + 1 << " " << base + 2 << " " << base + 3
                << "\n";
            base += 4;
        } else {
            Vec3 c[8];
            for (int k = 0; k < 8; ++k) {
                c[k] = s.origin;
                if (k & 1) c[k] = c[k] + s.ax * s.size.x;
                if (k & 2) c[k] = c[k] + s.ay * s.size.y;
                if (k & 4) c[k] = c[k] + s.az * s.size.z;
            }
            for (const Vec3& p : c) out << "v " << p.x << " " << p.y << " " << p.z << "\n";
            static const int faces[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                            {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
            for (const auto& f : faces)
                out << "f " << base + f[0] << " " << base + f[1] << " " << base + f[2] << " "
                    << base + f[3] << "\n";
            base += 8;
        }
    }
}

}  // namespace crowdforge::citygen
