#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "crowdforge/agendagen/agendagen.hpp"
#include "crowdforge/citygen/semantic_city.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/common/rng.hpp"
#include "crowdforge/navgraph/navgraph.hpp"
#include "crowdforge/population/population.hpp"

namespace crowdforge::sim {

struct SimConfig {
    double dt = 0.25;              // seconds per tick
    double sampleInterval = 60.0;  // seconds between sample-hook calls
    double interactionRange = 1.5; // meters for interact()
    int maxOpsPerTick = 10000;     // runaway-rule guard inside one context tick
};

enum class PersonMode { Hidden, Idle, Walking, Grouped, Interacting };

const char* personModeName(PersonMode mode);  // "hidden", "idle", ...

// Embodied person. Exists only while the person is out in the world.
struct Agent {
    int personId = -1;
    Vec2 position;
    navgraph::Path path;     // active walk, empty when standing
    double progress = 0.0;   // meters along path
    bool walking = false;
    bool toBuilding = false; // walk ends by entering targetBuilding
    int targetBuilding = -1;
    int groupId = -1;        // -1 = moving alone
    int interactingWith = -1;  // object id while seated/engaged
};

struct Event {
    enum class Kind { Enter, Exit, InteractStart, InteractStop };
    Kind kind;
    double time = 0.0;
    int personId = -1;
    int targetId = -1;  // building for Enter/Exit, object for Interact*
};

// Entry/exit pairing check over an event trace: counts building exits that
// have no prior unmatched entry by the same person at the same building.
int coherenceViolations(const std::vector<Event>& events);

// Fixed-timestep daily simulation over generated (or hand-edited) artifacts.
class World {
  public:
    World(const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
          const population::Population& people, const agendagen::AgendaSet& agendas,
          std::uint64_t seed, IncidentLog& log, SimConfig config = {});
    ~World();
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    // Algorithm-2 style placement at time-of-day t: mid-walk persons get an
    // agent at the interpolated path position, everyone else is hidden inside
    // the task's building (falling back to home).
    void initialize(double t);

    void step();               // one dt tick
    void run(double until);    // steps while time() < until
    void timeJump(double deltaT);  // deltaT > 0; re-initializes at (t+dT) mod day

    double time() const;
    std::uint64_t tick() const { return tick_; }
    const SimConfig& config() const { return config_; }

    PersonMode modeOf(int personId) const;
    int insideBuilding(int personId) const;     // -1 when embodied
    const Agent* agentOf(int personId) const;   // nullptr when hidden
    void forEachAgent(const std::function<void(const Agent&)>& fn) const;
    std::size_t agentCount() const;

    int occupants(int objectId) const;        // holders
    int reservations(int objectId) const;     // soft reservations
    const std::vector<agendagen::FloatingTaskEntry>& poolOf(int personId) const;
    const agendagen::AgendaTask* currentTask(int personId) const;

    const std::vector<Event>& events() const { return events_; }

    // Called after every sampleInterval of simulated time (and once at
    // initialize).
    void setSampleHook(std::function<void(const World&)> hook);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint64_t tick_ = 0;
    SimConfig config_;
    std::vector<Event> events_;
};

// Agenda-free crowd mimic: persons pop out of random buildings, walk to other
// random buildings and disappear inside. Produces per-person traces with
// incoherent entry/exit pairings, unlike the agenda-driven World.
std::vector<Event> runRandomBaseline(const citygen::SemanticCity& city,
                                     const navgraph::NavGraph& graph,
                                     const population::Population& people, std::uint64_t seed,
                                     double from, double until);

}  // namespace crowdforge::sim
