#include "crowdforge/harness/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crowdforge/agendagen/agenda.hpp"
#include "crowdforge/citygen/city_io.hpp"
#include "crowdforge/citygen/interpreter.hpp"
#include "crowdforge/citygen/layout.hpp"
#include "crowdforge/common/digest.hpp"
#include "crowdforge/common/timefmt.hpp"
#include "crowdforge/common/version.hpp"
#include "crowdforge/rulelang/loader.hpp"
#include "crowdforge/rulelang/parser.hpp"

namespace crowdforge::harness {

namespace ag = agendagen;
namespace cg = citygen;
namespace rl = rulelang;

// --- Heatmaps ------------------------------------------------------------------

HeatmapGrid HeatmapGrid::forBounds(const Rect2& bounds, double cellSize) {
    if (cellSize <= 0.0) throw std::invalid_argument("heatmap cell size must be positive");
    HeatmapGrid g;
    g.cellSize = cellSize;
    g.origin = bounds.lo;
    g.width = std::max(1, static_cast<int>(std::ceil(bounds.width() / cellSize)));
    g.height = std::max(1, static_cast<int>(std::ceil(bounds.depth() / cellSize)));
    g.counts.assign(static_cast<std::size_t>(g.width) * g.height, 0);
    return g;
}

void HeatmapGrid::record(const Vec2& p) {
    int col = static_cast<int>(std::floor((p.x - origin.x) / cellSize));
    int row = static_cast<int>(std::floor((p.y - origin.y) / cellSize));
    col = std::clamp(col, 0, width - 1);
    row = std::clamp(row, 0, height - 1);
    ++counts[static_cast<std::size_t>(row) * width + col];
}

std::uint64_t HeatmapGrid::total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t c : counts) sum += c;
    return sum;
}

void recordSample(HeatmapGrid& grid, const sim::World& world) {
    world.forEachAgent([&](const sim::Agent& a) { grid.record(a.position); });
}

void recordSample(HeatmapGrid& grid, const sim::World& world,
                  const population::Population& people, int ageLo, int ageHi) {
    world.forEachAgent([&](const sim::Agent& a) {
        int age = people.persons[a.personId].age;
        if (age >= ageLo && age < ageHi) grid.record(a.position);
    });
}

std::string heatmapCsv(const HeatmapGrid& grid) {
    std::string out;
    for (int row = 0; row < grid.height; ++row)
        for (int col = 0; col < grid.width; ++col) {
            std::uint64_t c = grid.at(row, col);
            if (c == 0) continue;
            out += std::to_string(row);
            out += ',';
            out += std::to_string(col);
            out += ',';
            out += std::to_string(c);
            out += '\n';
        }
    return out;
}

std::string heatmapPgm(const HeatmapGrid& grid) {
    std::uint64_t maxCount = 0;
    for (std::uint64_t c : grid.counts) maxCount = std::max(maxCount, c);
    std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) +
                      "\n65535\n";
    out.reserve(out.size() + grid.counts.size() * 2);
    for (std::uint64_t c : grid.counts) {
        std::uint64_t v = maxCount == 0 ? 0 : c * 65535 / maxCount;
        out += static_cast<char>((v >> 8) & 0xff);  // big-endian per Netpbm
        out += static_cast<char>(v & 0xff);
    }
    return out;
}

// --- Inspection ----------------------------------------------------------------

namespace {

std::string buildingLabel(const cg::SemanticCity& city, int id) {
    if (id < 0 || id >= static_cast<int>(city.buildings.size())) return "none";
    std::string label = "building " + std::to_string(id);
    const auto& b = city.buildings[id];
    if (!b.entrances.empty()) label += " (" + b.primaryEntrance().type + ")";
    return label;
}

std::string taskTarget(const cg::SemanticCity& city, const ag::AgendaTask& t) {
    switch (t.kind) {
        case ag::TaskKind::StayInside:
        case ag::TaskKind::GoToBuilding: return buildingLabel(city, t.building);
        case ag::TaskKind::DelayedRule: {
            std::string s = "rule " + t.ruleName;
            if (!t.vars.empty()) {
                s += " (";
                bool first = true;
                for (const auto& [name, value] : t.vars) {
                    if (!first) s += ", ";
                    first = false;
                    s += name + "=" + value.toString();
                }
                s += ")";
            }
            return s;
        }
        case ag::TaskKind::FloatingSlot: return "(filled at simulation time)";
        case ag::TaskKind::GroupAccompany: {
            std::string s = buildingLabel(city, t.building) + "  group " +
                            std::to_string(t.groupId) + ", leader " +
                            std::to_string(t.leaderId);
            if (!t.memberIds.empty()) {
                s += ", members";
                for (int m : t.memberIds) s += " " + std::to_string(m);
            }
            return s;
        }
    }
    return "?";
}

const char* genderName(population::Gender g) {
    return g == population::Gender::Male ? "male" : "female";
}

const char* ageGroupName(population::AgeGroup g) {
    switch (g) {
        case population::AgeGroup::Child: return "child";
        case population::AgeGroup::Adult: return "adult";
        case population::AgeGroup::Elder: return "elder";
    }
    return "?";
}

}  // namespace

std::string inspectPerson(const population::Population& people,
                          const agendagen::AgendaSet& agendas,
                          const citygen::SemanticCity& city, int personId) {
    if (personId < 0 || personId >= static_cast<int>(people.persons.size()))
        throw std::out_of_range("unknown person id " + std::to_string(personId));
    const auto& p = people.persons[personId];
    char buf[160];
    std::string out;
    out += "person " + std::to_string(p.id) + "\n";
    out += "  household:  " + std::to_string(p.household) + "\n";
    std::snprintf(buf, sizeof(buf), "  age:        %d (%s)\n", p.age,
                  ageGroupName(p.group()));
    out += buf;
    out += std::string("  gender:     ") + genderName(p.gender) + "\n";
    out += "  home:       " + buildingLabel(city, p.homeBuilding) + "\n";
    std::snprintf(buf, sizeof(buf), "  walk speed: %.2f m/s\n", p.walkSpeed());
    out += buf;

    out += "\nagenda\n";
    if (personId >= static_cast<int>(agendas.agendas.size()) ||
        agendas.agendas[personId].tasks.empty()) {
        out += "  (empty)\n";
    } else {
        for (const auto& t : agendas.agendas[personId].tasks) {
            std::snprintf(buf, sizeof(buf), "  %s - %s  %-15s  ", formatHMS(t.t0).c_str(),
                          formatHMS(t.t1).c_str(), ag::taskKindName(t.kind));
            out += buf;
            out += taskTarget(city, t);
            out += '\n';
        }
    }

    out += "\nfloating pool\n";
    const bool hasPool = personId < static_cast<int>(agendas.pools.size()) &&
                         !agendas.pools[personId].empty();
    if (!hasPool) {
        out += "  (empty)\n";
    } else {
        for (const auto& e : agendas.pools[personId]) {
            std::snprintf(buf, sizeof(buf), "  %-15s  max %s  priority %g\n",
                          e.ruleName.c_str(), formatHMS(e.maxDuration).c_str(), e.priority);
            out += buf;
        }
    }
    return out;
}

// --- Simulation artifacts ------------------------------------------------------

SimArtifacts simulateRun(const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
                         const population::Population& people,
                         const agendagen::AgendaSet& agendas, const RunConfig& cfg,
                         IncidentLog& log) {
    sim::SimConfig sc;
    sc.dt = cfg.dt;
    sc.sampleInterval = cfg.sampleInterval;
    sim::World world(city, graph, people, agendas, cfg.seed, log, sc);

    SimArtifacts out;
    out.heatmap = HeatmapGrid::forBounds(city.bounds, cfg.heatmapCell);
    for (std::size_t i = 0; i < cfg.ageBands.size(); ++i)
        out.ageHeatmaps.push_back(HeatmapGrid::forBounds(city.bounds, cfg.heatmapCell));

    world.setSampleHook([&](const sim::World& w) {
        recordSample(out.heatmap, w);
        for (std::size_t i = 0; i < cfg.ageBands.size(); ++i)
            recordSample(out.ageHeatmaps[i], w, people, cfg.ageBands[i].lo, cfg.ageBands[i].hi);
        char line[256];
        w.forEachAgent([&](const sim::Agent& a) {
            const auto* task = w.currentTask(a.personId);
            std::snprintf(line, sizeof(line),
                          "{\"tick\":%llu,\"time\":%.2f,\"personId\":%d,\"x\":%.6f,"
                          "\"y\":%.6f,\"state\":\"%s\",\"taskKind\":\"%s\"}\n",
                          static_cast<unsigned long long>(w.tick()), w.time(), a.personId,
                          a.position.x, a.position.y, sim::personModeName(w.modeOf(a.personId)),
                          task ? ag::taskKindName(task->kind) : "none");
            out.trajectories += line;
        });
        ++out.samples;
    });

    world.initialize(cfg.from);
    if (cfg.jumpTo) {
        double delta = *cfg.jumpTo - cfg.from;
        while (delta <= 0.0) delta += ag::kDayLength;
        world.timeJump(delta);
    }
    world.run(cfg.to);
    return out;
}

// --- Defines -------------------------------------------------------------------

void applyDefines(rl::RuleFile& rules, const std::map<std::string, std::string>& defines,
                  std::vector<std::string>* unmatched) {
    for (const auto& [name, text] : defines) {
        bool found = false;
        for (auto& attr : rules.attributes)
            if (attr.name == name) {
                attr.value = rl::parseExpression(text, "--define " + name);
                found = true;
            }
        if (!found && unmatched) unmatched->push_back(name);
    }
}

// --- Pipeline ------------------------------------------------------------------

namespace {

void writeText(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

[[noreturn]] void stageError(const std::string& stage, const std::exception& err) {
    throw std::runtime_error(stage + " stage: " + err.what());
}

std::string metaComment(std::uint64_t seed, const std::map<std::string, std::string>& inputs) {
    std::string s = "# seed=" + std::to_string(seed) + " version=" + kVersion;
    for (const auto& [name, digest] : inputs) s += " " + name + "=" + digest;
    s += "\n";
    return s;
}

std::string metaJsonLine(std::uint64_t seed, const std::map<std::string, std::string>& inputs) {
    std::string s = "{\"meta\":{\"seed\":" + std::to_string(seed) + ",\"version\":\"" +
                    kVersion + "\",\"inputs\":{";
    bool first = true;
    for (const auto& [name, digest] : inputs) {
        if (!first) s += ',';
        first = false;
        s += "\"" + name + "\":\"" + digest + "\"";
    }
    s += "}}}\n";
    return s;
}

// PGM comments go between the magic number and the dimensions.
std::string pgmWithComment(const std::string& pgm, const std::string& comment) {
    return "P5\n" + comment + pgm.substr(3);
}

std::filesystem::path resolve(const std::filesystem::path& explicitPath,
                              const std::filesystem::path& outDir, const char* name) {
    if (!explicitPath.empty()) return explicitPath;
    if (!outDir.empty()) return outDir / name;
    return {};
}

std::filesystem::path required(const std::filesystem::path& explicitPath,
                               const std::filesystem::path& outDir, const char* name,
                               const char* stage) {
    auto p = resolve(explicitPath, outDir, name);
    if (p.empty())
        throw std::runtime_error(std::string(stage) + " stage: no path for " + name +
                                 " (set outDir or the artifact path)");
    return p;
}

void ensureParentDir(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

}  // namespace

std::filesystem::path runCityStage(const RunConfig& cfg, IncidentLog& log) {
    auto out = required(cfg.cityArtifact, cfg.outDir, "city.json", "city");
    try {
        auto layout = cg::loadLayoutConfig(cfg.layoutFile.string());
        auto rules = rl::loadRuleFile(cfg.cityRulesFile.string());
        applyDefines(rules, cfg.defines);
        auto city = cg::generateCity(cg::generateLayout(layout), rules, cfg.seed, log);
        city.inputDigests["layout"] = digestHex(fileDigest(cfg.layoutFile.string()));
        city.inputDigests["city_rules"] = digestHex(fileDigest(cfg.cityRulesFile.string()));
        ensureParentDir(out);
        cg::saveCityJson(city, out);
    } catch (const std::runtime_error& e) {
        stageError("city", e);
    }
    return out;
}

std::filesystem::path runPopulationStage(const RunConfig& cfg, IncidentLog& log) {
    (void)log;
    auto cityFile = required(cfg.cityArtifact, cfg.outDir, "city.json", "population");
    auto out = required(cfg.populationArtifact, cfg.outDir, "population.json", "population");
    try {
        auto city = cg::loadCityJson(cityFile);
        auto patterns = population::loadPatterns(cfg.patternsFile);
        auto people = population::samplePopulation(city, patterns, cfg.targetPersons, cfg.seed);
        people.inputDigests["city"] = digestHex(fileDigest(cityFile.string()));
        people.inputDigests["patterns"] = digestHex(fileDigest(cfg.patternsFile.string()));
        ensureParentDir(out);
        population::savePopulationJson(people, out);
    } catch (const std::runtime_error& e) {
        stageError("population", e);
    }
    return out;
}

std::filesystem::path runAgendasStage(const RunConfig& cfg, IncidentLog& log) {
    auto cityFile = required(cfg.cityArtifact, cfg.outDir, "city.json", "agendas");
    auto populationFile =
        required(cfg.populationArtifact, cfg.outDir, "population.json", "agendas");
    auto out = required(cfg.agendasArtifact, cfg.outDir, "agendas.json", "agendas");
    try {
        auto city = cg::loadCityJson(cityFile);
        auto people = population::loadPopulationJson(populationFile);
        auto rules = rl::loadRuleFile(cfg.agendaRulesFile.string());
        std::vector<std::string> unmatched;
        applyDefines(rules, cfg.defines, &unmatched);
        // Overrides may target either rule file; only names matching neither
        // are mistakes. City attributes were checked by the city stage.
        if (!unmatched.empty() && !cfg.cityRulesFile.empty()) {
            auto cityRules = rl::loadRuleFile(cfg.cityRulesFile.string());
            std::vector<std::string> stillUnmatched;
            applyDefines(cityRules, cfg.defines, &stillUnmatched);
            for (const auto& name : unmatched)
                if (std::find(stillUnmatched.begin(), stillUnmatched.end(), name) !=
                    stillUnmatched.end())
                    throw std::runtime_error("unknown attribute override '" + name + "'");
        } else if (!unmatched.empty()) {
            throw std::runtime_error("unknown attribute override '" + unmatched.front() + "'");
        }
        auto graph = navgraph::NavGraph::build(city);
        auto agendas = ag::generateAllAgendas(rules, people, city, graph, cfg.seed, log);
        agendas.inputDigests["city"] = digestHex(fileDigest(cityFile.string()));
        agendas.inputDigests["population"] = digestHex(fileDigest(populationFile.string()));
        agendas.inputDigests["agenda_rules"] =
            digestHex(fileDigest(cfg.agendaRulesFile.string()));
        ensureParentDir(out);
        ag::saveAgendasJson(agendas, out);
    } catch (const std::runtime_error& e) {
        stageError("agendas", e);
    }
    return out;
}

SimStageResult runSimulateStage(const RunConfig& cfg, IncidentLog& log) {
    auto cityFile = required(cfg.cityArtifact, cfg.outDir, "city.json", "simulate");
    auto populationFile =
        required(cfg.populationArtifact, cfg.outDir, "population.json", "simulate");
    auto agendasFile = required(cfg.agendasArtifact, cfg.outDir, "agendas.json", "simulate");
    SimStageResult result;
    try {
        auto city = cg::loadCityJson(cityFile);
        auto people = population::loadPopulationJson(populationFile);
        auto agendas = ag::loadAgendasJson(agendasFile);
        auto graph = navgraph::NavGraph::build(city);
        result.artifacts = simulateRun(city, graph, people, agendas, cfg, log);

        std::map<std::string, std::string> inputs = {
            {"city", digestHex(fileDigest(cityFile.string()))},
            {"population", digestHex(fileDigest(populationFile.string()))},
            {"agendas", digestHex(fileDigest(agendasFile.string()))},
        };
        std::string comment = metaComment(cfg.seed, inputs);

        result.heatmapPgmFile = resolve(cfg.heatmapPgmOut, cfg.outDir, "heatmap.pgm");
        result.heatmapCsvFile = resolve(cfg.heatmapCsvOut, cfg.outDir, "heatmap.csv");
        result.trajectoriesFile =
            resolve(cfg.trajectoriesOut, cfg.outDir, "trajectories.jsonl");
        const auto& arts = result.artifacts;
        if (!result.heatmapPgmFile.empty()) {
            ensureParentDir(result.heatmapPgmFile);
            writeText(result.heatmapPgmFile, pgmWithComment(heatmapPgm(arts.heatmap), comment));
        }
        if (!result.heatmapCsvFile.empty()) {
            ensureParentDir(result.heatmapCsvFile);
            writeText(result.heatmapCsvFile, comment + heatmapCsv(arts.heatmap));
        }
        if (!result.trajectoriesFile.empty()) {
            ensureParentDir(result.trajectoriesFile);
            writeText(result.trajectoriesFile,
                      metaJsonLine(cfg.seed, inputs) + arts.trajectories);
        }
        for (std::size_t i = 0; i < cfg.ageBands.size(); ++i) {
            const auto& band = cfg.ageBands[i];
            if (!band.pgm.empty()) {
                ensureParentDir(band.pgm);
                writeText(band.pgm, pgmWithComment(heatmapPgm(arts.ageHeatmaps[i]), comment));
            }
            if (!band.csv.empty()) {
                ensureParentDir(band.csv);
                writeText(band.csv, comment + heatmapCsv(arts.ageHeatmaps[i]));
            }
        }
    } catch (const std::runtime_error& e) {
        stageError("simulate", e);
    }
    return result;
}

PipelineResult pipeline(const RunConfig& cfg, IncidentLog& log) {
    if (cfg.outDir.empty()) throw std::runtime_error("pipeline: output directory not set");
    std::filesystem::create_directories(cfg.outDir);
    PipelineResult result;
    result.cityFile = runCityStage(cfg, log);
    result.populationFile = runPopulationStage(cfg, log);
    result.agendasFile = runAgendasStage(cfg, log);
    auto simResult = runSimulateStage(cfg, log);
    result.heatmapPgmFile = simResult.heatmapPgmFile;
    result.heatmapCsvFile = simResult.heatmapCsvFile;
    result.trajectoriesFile = simResult.trajectoriesFile;
    return result;
}

}  // namespace crowdforge::harness
