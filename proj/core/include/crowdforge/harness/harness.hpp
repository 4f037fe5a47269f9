#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdforge/agendagen/agendagen.hpp"
#include "crowdforge/citygen/semantic_city.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/navgraph/navgraph.hpp"
#include "crowdforge/population/population.hpp"
#include "crowdforge/sim/world.hpp"

namespace crowdforge::harness {

// Density grid over the city footprint, one cell per cellSize meters.
struct HeatmapGrid {
    double cellSize = 2.0;
    Vec2 origin;
    int width = 0;   // cells along x
    int height = 0;  // cells along y (rows)
    std::vector<std::uint64_t> counts;  // row-major, counts[row * width + col]

    static HeatmapGrid forBounds(const Rect2& bounds, double cellSize = 2.0);
    void record(const Vec2& p);  // points outside clamp to the border cell
    std::uint64_t at(int row, int col) const {
        return counts[static_cast<std::size_t>(row) * width + col];
    }
    std::uint64_t total() const;
};

// Every embodied agent bumps the cell under it; hidden persons contribute
// nothing. The banded variant counts only persons with ageLo <= age < ageHi.
void recordSample(HeatmapGrid& grid, const sim::World& world);
void recordSample(HeatmapGrid& grid, const sim::World& world,
                  const population::Population& people, int ageLo, int ageHi);

std::string heatmapCsv(const HeatmapGrid& grid);  // "row,col,count", nonzero cells only
std::string heatmapPgm(const HeatmapGrid& grid);  // 16-bit P5, linearly scaled by max

// Inspector-style report: person header, the time-ordered agenda with target
// type names, then the floating pool. Throws std::out_of_range on unknown id.
std::string inspectPerson(const population::Population& people,
                          const agendagen::AgendaSet& agendas,
                          const citygen::SemanticCity& city, int personId);

// Extra heatmap restricted to an age band [lo, hi), written next to the
// unfiltered one.
struct AgeBand {
    int lo = 0;
    int hi = 200;
    std::filesystem::path pgm;  // empty path = not written
    std::filesystem::path csv;
};

struct RunConfig {
    std::uint64_t seed = 1;

    // Generation inputs.
    std::filesystem::path layoutFile;
    std::filesystem::path cityRulesFile;
    std::filesystem::path patternsFile;
    int targetPersons = 100;
    std::filesystem::path agendaRulesFile;
    std::map<std::string, std::string> defines;  // attribute overrides, "workStart" -> "9h"

    // Simulation window and outputs.
    double from = 0.0;
    double to = 86400.0;
    double dt = 0.25;
    double sampleInterval = 60.0;
    std::optional<double> jumpTo;  // one time jump right after initialization
    double heatmapCell = 2.0;
    std::vector<AgeBand> ageBands;

    std::filesystem::path outDir;  // pipeline artifacts land here

    // Artifact locations; empty means "<outDir>/<default name>". Simulation
    // outputs additionally allow "no outDir either" = don't write the file.
    std::filesystem::path cityArtifact;        // city.json
    std::filesystem::path populationArtifact;  // population.json
    std::filesystem::path agendasArtifact;     // agendas.json
    std::filesystem::path heatmapPgmOut;       // heatmap.pgm
    std::filesystem::path heatmapCsvOut;       // heatmap.csv
    std::filesystem::path trajectoriesOut;     // trajectories.jsonl
};

struct SimArtifacts {
    HeatmapGrid heatmap;
    std::vector<HeatmapGrid> ageHeatmaps;  // parallel to config.ageBands
    std::string trajectories;              // JSON-lines body
    std::size_t samples = 0;
};

// One simulation pass that feeds every aggregate from the same sample hook.
SimArtifacts simulateRun(const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
                         const population::Population& people,
                         const agendagen::AgendaSet& agendas, const RunConfig& cfg,
                         IncidentLog& log);

// Applies --define overrides to matching attribute declarations; values parse
// as full rule expressions ("9h", "8h + 30m", "true"). Names without a match
// are appended to `unmatched` when given.
void applyDefines(rulelang::RuleFile& rules, const std::map<std::string, std::string>& defines,
                  std::vector<std::string>* unmatched = nullptr);

struct PipelineResult {
    std::filesystem::path cityFile;
    std::filesystem::path populationFile;
    std::filesystem::path agendasFile;
    std::filesystem::path heatmapPgmFile;
    std::filesystem::path heatmapCsvFile;
    std::filesystem::path trajectoriesFile;
};

struct SimStageResult {
    SimArtifacts artifacts;
    std::filesystem::path heatmapPgmFile;  // empty if not written
    std::filesystem::path heatmapCsvFile;
    std::filesystem::path trajectoriesFile;
};

// Individual pipeline stages. Each one reads its upstream artifacts from disk
// (so hand-edited intermediates are respected) and writes its own artifact.
// Bad inputs throw std::runtime_error naming the stage; semantic problems go
// to the incident log.
std::filesystem::path runCityStage(const RunConfig& cfg, IncidentLog& log);
std::filesystem::path runPopulationStage(const RunConfig& cfg, IncidentLog& log);
std::filesystem::path runAgendasStage(const RunConfig& cfg, IncidentLog& log);
SimStageResult runSimulateStage(const RunConfig& cfg, IncidentLog& log);

// city -> population -> agendas -> simulate, all into cfg.outDir.
PipelineResult pipeline(const RunConfig& cfg, IncidentLog& log);

}  // namespace crowdforge::harness
