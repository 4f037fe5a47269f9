#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crowdforge/agendagen/agenda.hpp"
#include "crowdforge/citygen/semantic_city.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/navgraph/navgraph.hpp"
#include "crowdforge/population/population.hpp"
#include "crowdforge/rulelang/ast.hpp"

namespace crowdforge::agendagen {

struct GenOptions {
    int maxDepth = 64;
};

// Agendas plus everything the simulation needs to run them: the rule file
// (delayed and floating rules execute at simulation time) and the evaluated
// attribute snapshot, so attribute rand() draws are not re-rolled on load.
struct AgendaSet {
    std::uint64_t seed = 0;
    rulelang::RuleFile rules;
    std::map<std::string, rulelang::Value> attributes;
    std::vector<Agenda> agendas;                        // indexed by person id
    std::vector<std::vector<FloatingTaskEntry>> pools;  // indexed by person id
    int groupCount = 0;
    std::map<std::string, std::string> inputDigests;
};

// Runs the start rule once per household (Algorithm-1 style interpretation),
// then finalizes every agenda gap-free. Rule errors abort the offending
// household (its members fall back to all-day stay-at-home) and are logged;
// other households are unaffected. Per-household RNG substream = f(seed, id).
AgendaSet generateAllAgendas(const rulelang::RuleFile& rules, const population::Population& pop,
                             const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
                             std::uint64_t seed, IncidentLog& incidents,
                             const GenOptions& options = {});

std::string agendasToJson(const AgendaSet& set);
AgendaSet agendasFromJson(const std::string& text);
void saveAgendasJson(const AgendaSet& set, const std::filesystem::path& path);
AgendaSet loadAgendasJson(const std::filesystem::path& path);

}  // namespace crowdforge::agendagen
