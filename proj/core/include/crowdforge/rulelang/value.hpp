#pragma once

#include <string>

#include "crowdforge/common/id.hpp"

namespace crowdforge::rulelang {

// Runtime value of the rule language. `Invalid` is the result of failed
// lookups (e.g. findBuilding with no match); it compares equal only to
// itself and unequal to every other value.
struct Value {
    enum class Kind { Invalid, Number, Bool, Text, Entity };
    Kind kind = Kind::Invalid;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    EntityId entity;

    static Value invalid() { return {}; }
    static Value makeNumber(double v) {
        Value x;
        x.kind = Kind::Number;
        x.number = v;
        return x;
    }
    static Value makeBool(bool b) {
        Value x;
        x.kind = Kind::Bool;
        x.boolean = b;
        return x;
    }
    static Value makeText(std::string s) {
        Value x;
        x.kind = Kind::Text;
        x.text = std::move(s);
        return x;
    }
    static Value makeEntity(EntityId id) {
        if (!id.valid()) return invalid();
        Value x;
        x.kind = Kind::Entity;
        x.entity = id;
        return x;
    }

    bool isInvalid() const { return kind == Kind::Invalid; }
    bool isNumber() const { return kind == Kind::Number; }
    bool isBool() const { return kind == Kind::Bool; }
    bool isText() const { return kind == Kind::Text; }
    bool isEntity() const { return kind == Kind::Entity; }

    bool equals(const Value& o) const;
    std::string toString() const;
    const char* kindName() const;
};

}  // namespace crowdforge::rulelang
