#include "crowdforge/rulelang/value.hpp"

#include "crowdforge/rulelang/printer.hpp"

namespace crowdforge::rulelang {

bool Value::equals(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::Invalid: return true;
        case Kind::Number: return number == o.number;
        case Kind::Bool: return boolean == o.boolean;
        case Kind::Text: return text == o.text;
        case Kind::Entity: return entity == o.entity;
    }
    return false;
}

const char* Value::kindName() const {
    switch (kind) {
        case Kind::Invalid: return "invalid";
        case Kind::Number: return "number";
        case Kind::Bool: return "bool";
        case Kind::Text: return "text";
        case Kind::Entity: return "entity";
    }
    return "?";
}

std::string Value::toString() const {
    switch (kind) {
        case Kind::Invalid: return "invalid";
        case Kind::Number: return formatDouble(number);
        case Kind::Bool: return boolean ? "true" : "false";
        case Kind::Text: return "\"" + text + "\"";
        case Kind::Entity: return crowdforge::toString(entity);
    }
    return "?";
}

}  // namespace crowdforge::rulelang
