#pragma once

#include <cstdint>
#include <string>

namespace crowdforge {

enum class EntityKind : std::uint8_t {
    Invalid = 0,
    Lot,
    Building,
    Zone,
    Object,
    Person,
    Household,
};

const char* entityKindName(EntityKind k);

// Dense non-negative id, unique per entity class.
struct EntityId {
    EntityKind kind = EntityKind::Invalid;
    std::int32_t index = -1;

    bool valid() const { return kind != EntityKind::Invalid && index >= 0; }
    bool operator==(const EntityId& o) const {
        if (!valid() && !o.valid()) return true;
        return kind == o.kind && index == o.index;
    }
    bool operator!=(const EntityId& o) const { return !(*this == o); }

    static EntityId invalid() { return {}; }
    static EntityId building(std::int32_t i) { return {EntityKind::Building, i}; }
    static EntityId zone(std::int32_t i) { return {EntityKind::Zone, i}; }
    static EntityId object(std::int32_t i) { return {EntityKind::Object, i}; }
    static EntityId person(std::int32_t i) { return {EntityKind::Person, i}; }
    static EntityId household(std::int32_t i) { return {EntityKind::Household, i}; }
    static EntityId lot(std::int32_t i) { return {EntityKind::Lot, i}; }
};

inline const char* entityKindName(EntityKind k) {
    switch (k) {
        case EntityKind::Lot: return "lot";
        case EntityKind::Building: return "building";
        case EntityKind::Zone: return "zone";
        case EntityKind::Object: return "object";
        case EntityKind::Person: return "person";
        case EntityKind::Household: return "household";
        default: return "invalid";
    }
}

inline std::string toString(const EntityId& id) {
    if (!id.valid()) return "invalid";
    return std::string(entityKindName(id.kind)) + ":" + std::to_string(id.index);
}

}  // namespace crowdforge
