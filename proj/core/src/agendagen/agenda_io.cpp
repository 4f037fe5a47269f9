#include <fstream>
#include <stdexcept>

#include "crowdforge/agendagen/agendagen.hpp"
#include "crowdforge/common/version.hpp"
#include "crowdforge/rulelang/loader.hpp"
#include "crowdforge/rulelang/printer.hpp"
#include "json.hpp"

namespace crowdforge::agendagen {

namespace {

using Json = nlohmann::ordered_json;
namespace rl = rulelang;

Json valueToJson(const rl::Value& v) {
    switch (v.kind) {
        case rl::Value::Kind::Invalid: return nullptr;
        case rl::Value::Kind::Number: return v.number;
        case rl::Value::Kind::Bool: return v.boolean;
        case rl::Value::Kind::Text: return v.text;
        case rl::Value::Kind::Entity:
            return Json{{"entity", entityKindName(v.entity.kind)}, {"index", v.entity.index}};
    }
    return nullptr;
}

EntityKind entityKindFromName(const std::string& name) {
    for (EntityKind k : {EntityKind::Lot, EntityKind::Building, EntityKind::Zone,
                         EntityKind::Object, EntityKind::Person, EntityKind::Household})
        if (name == entityKindName(k)) return k;
    throw std::runtime_error("agendas: unknown entity kind '" + name + "'");
}

rl::Value valueFromJson(const Json& j) {
    if (j.is_null()) return rl::Value::invalid();
    if (j.is_boolean()) return rl::Value::makeBool(j.get<bool>());
    if (j.is_number()) return rl::Value::makeNumber(j.get<double>());
    if (j.is_string()) return rl::Value::makeText(j.get<std::string>());
    if (j.is_object() && j.contains("entity"))
        return rl::Value::makeEntity(
            {entityKindFromName(j.at("entity").get<std::string>()), j.at("index").get<int>()});
    throw std::runtime_error("agendas: bad variable value");
}

Json varsToJson(const std::map<std::string, rl::Value>& vars) {
    Json out = Json::object();
    for (const auto& [name, value] : vars) out[name] = valueToJson(value);
    return out;
}

std::map<std::string, rl::Value> varsFromJson(const Json& j) {
    std::map<std::string, rl::Value> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = valueFromJson(it.value());
    return out;
}

Json taskToJson(const AgendaTask& t) {
    Json out;
    out["kind"] = taskKindName(t.kind);
    out["t0"] = t.t0;
    out["t1"] = t.t1;
    switch (t.kind) {
        case TaskKind::StayInside:
        case TaskKind::GoToBuilding: out["building"] = t.building; break;
        case TaskKind::DelayedRule:
            out["rule"] = t.ruleName;
            out["vars"] = varsToJson(t.vars);
            break;
        case TaskKind::FloatingSlot: break;
        case TaskKind::GroupAccompany:
            out["building"] = t.building;
            out["leader"] = t.leaderId;
            out["members"] = t.memberIds;
            break;
    }
    if (t.groupId != -1) out["group"] = t.groupId;
    return out;
}

AgendaTask taskFromJson(const Json& j) {
    AgendaTask t;
    t.t0 = j.at("t0").get<double>();
    t.t1 = j.at("t1").get<double>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "stay_inside") t.kind = TaskKind::StayInside;
    else if (kind == "go_to_building") t.kind = TaskKind::GoToBuilding;
    else if (kind == "delayed_rule") t.kind = TaskKind::DelayedRule;
    else if (kind == "floating_slot") t.kind = TaskKind::FloatingSlot;
    else if (kind == "group_accompany") t.kind = TaskKind::GroupAccompany;
    else throw std::runtime_error("agendas: unknown task kind '" + kind + "'");
    if (j.contains("building")) t.building = j.at("building").get<int>();
    if (j.contains("rule")) t.ruleName = j.at("rule").get<std::string>();
    if (j.contains("vars")) t.vars = varsFromJson(j.at("vars"));
    if (j.contains("group")) t.groupId = j.at("group").get<int>();
    if (j.contains("leader")) t.leaderId = j.at("leader").get<int>();
    if (j.contains("members")) t.memberIds = j.at("members").get<std::vector<int>>();
    return t;
}

}  // namespace

std::string agendasToJson(const AgendaSet& set) {
    Json root;
    root["meta"]["seed"] = set.seed;
    root["meta"]["version"] = kVersion;
    root["meta"]["inputs"] = set.inputDigests;
    root["rules"] = rl::printRuleFile(set.rules);
    root["attributes"] = varsToJson(set.attributes);
    root["group_count"] = set.groupCount;
    Json persons = Json::array();
    for (std::size_t p = 0; p < set.agendas.size(); ++p) {
        Json entry;
        entry["person"] = static_cast<int>(p);
        Json tasks = Json::array();
        for (const auto& t : set.agendas[p].tasks) tasks.push_back(taskToJson(t));
        entry["tasks"] = std::move(tasks);
        Json pool = Json::array();
        for (const auto& f : set.pools[p])
            pool.push_back(Json{{"rule", f.ruleName},
                                {"max_duration", f.maxDuration},
                                {"priority", f.priority},
                                {"vars", varsToJson(f.vars)}});
        entry["floating"] = std::move(pool);
        persons.push_back(std::move(entry));
    }
    root["persons"] = std::move(persons);
    return root.dump(2) + "\n";
}

AgendaSet agendasFromJson(const std::string& text) {
    Json root = Json::parse(text);
    AgendaSet set;
    set.seed = root.at("meta").at("seed").get<std::uint64_t>();
    if (root.at("meta").contains("inputs"))
        set.inputDigests =
            root.at("meta").at("inputs").get<std::map<std::string, std::string>>();
    std::string rulesText = root.at("rules").get<std::string>();
    if (!rulesText.empty()) set.rules = rl::loadRuleFileFromSource(rulesText, "agendas.rules");
    for (auto it = root.at("attributes").begin(); it != root.at("attributes").end(); ++it)
        set.attributes[it.key()] = valueFromJson(it.value());
    set.groupCount = root.at("group_count").get<int>();
    const Json& persons = root.at("persons");
    set.agendas.resize(persons.size());
    set.pools.resize(persons.size());
    for (std::size_t p = 0; p < persons.size(); ++p) {
        const Json& entry = persons[p];
        if (entry.at("person").get<int>() != static_cast<int>(p))
            throw std::runtime_error("agendas: persons out of order");
        Agenda& agenda = set.agendas[p];
        agenda.ownerPersonId = static_cast<int>(p);
        for (const Json& tj : entry.at("tasks")) agenda.tasks.push_back(taskFromJson(tj));
        for (const Json& fj : entry.at("floating")) {
            FloatingTaskEntry f;
            f.ownerPersonId = static_cast<int>(p);
            f.ruleName = fj.at("rule").get<std::string>();
            f.maxDuration = fj.at("max_duration").get<double>();
            f.priority = fj.at("priority").get<double>();
            f.vars = varsFromJson(fj.at("vars"));
            set.pools[p].push_back(std::move(f));
        }
    }
    return set;
}

void saveAgendasJson(const AgendaSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << agendasToJson(set);
}

AgendaSet loadAgendasJson(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return agendasFromJson(text);
}

}  // namespace crowdforge::agendagen
