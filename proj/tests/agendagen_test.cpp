#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "crowdforge/agendagen/agendagen.hpp"
#include "crowdforge/citygen/interpreter.hpp"
#include "crowdforge/citygen/layout.hpp"
#include "crowdforge/common/incidents.hpp"
#include "crowdforge/common/rng.hpp"
#include "crowdforge/navgraph/navgraph.hpp"
#include "crowdforge/population/population.hpp"
#include "crowdforge/rulelang/loader.hpp"
#include "doctest.h"

namespace ag = crowdforge::agendagen;
namespace cg = crowdforge::citygen;
namespace nav = crowdforge::navgraph;
namespace pop = crowdforge::population;
namespace rl = crowdforge::rulelang;
using crowdforge::EntityId;
using crowdforge::IncidentLog;
using crowdforge::Rng;

namespace {

std::string assetPath(const std::string& rel) {
    return std::string(CROWDFORGE_ASSET_DIR) + "/" + rel;
}

// 2x2 town: house (b0), school (b1), workplace (b2) and a park with benches.
const char* kTownRules = R"(
@StartRule
Lot ->
    case lot.blockX == 0 && lot.blockY == 0: House
    case lot.blockX == 1 && lot.blockY == 0: School
    case lot.blockX == 0 && lot.blockY == 1: Work
    else: ParkLot

House -> Build("house")
School -> Build("school")
Work -> Build("workplace")

Build(kind) -> extrude(6) comp(f) { front: Door(kind) | all: Wall }
Door(kind) -> t('0.5, 0, 0) entrance(kind)
Wall ->

ParkLot -> zone("park")
           split(x) { ~1: NIL | 0.4: Benches }
Benches -> split(z) { ~2: Bench | ~2: NIL }*

@Object("bench")
Bench -> extrude(0.5)
)";

const cg::SemanticCity& townCity() {
    static cg::SemanticCity city = [] {
        cg::LayoutConfig cfg;
        cfg.blocksX = 2;
        cfg.blocksY = 2;
        cfg.lotsPerBlockX = 1;
        cfg.lotsPerBlockY = 1;
        IncidentLog log;
        return cg::generateCity(cg::generateLayout(cfg),
                                rl::loadRuleFileFromSource(kTownRules, "town.cga"), 1, log);
    }();
    return city;
}

const nav::NavGraph& townGraph() {
    static nav::NavGraph graph = nav::NavGraph::build(townCity());
    return graph;
}

struct MemberSpec {
    int age;
    pop::Gender gender = pop::Gender::Male;
};

pop::Population makePeople(const std::vector<std::vector<MemberSpec>>& households, int home = 0) {
    pop::Population people;
    people.seed = 7;
    int pid = 0;
    for (std::size_t h = 0; h < households.size(); ++h) {
        pop::Household hh;
        hh.id = static_cast<int>(h);
        hh.homeBuilding = home;
        for (const auto& m : households[h]) {
            pop::Person p;
            p.id = pid;
            p.household = hh.id;
            p.age = m.age;
            p.gender = m.gender;
            p.homeBuilding = home;
            hh.members.push_back(pid++);
            people.persons.push_back(p);
        }
        people.households.push_back(std::move(hh));
    }
    return people;
}

// Town population used by most cases: one family, one elder couple, all in b0.
pop::Population townPeople() {
    return makePeople({{{40, pop::Gender::Male},
                        {35, pop::Gender::Female},
                        {7, pop::Gender::Male},
                        {9, pop::Gender::Female}},
                       {{70, pop::Gender::Male}, {72, pop::Gender::Female}}});
}

ag::AgendaSet gen(const std::string& rulesSrc, const pop::Population& people, IncidentLog& log,
                  std::uint64_t seed = 7) {
    auto rules = rl::loadRuleFileFromSource(rulesSrc, "test.pcg");
    return ag::generateAllAgendas(rules, people, townCity(), townGraph(), seed, log);
}

ag::AgendaTask stay(double t0, double t1, int building) {
    ag::AgendaTask t;
    t.t0 = t0;
    t.t1 = t1;
    t.kind = ag::TaskKind::StayInside;
    t.building = building;
    return t;
}

bool partitionsDay(const ag::Agenda& a) {
    double cursor = 0.0;
    for (const auto& t : a.tasks) {
        if (t.t0 != cursor || t.t1 <= t.t0) return false;
        cursor = t.t1;
    }
    return cursor == ag::kDayLength;
}

std::size_t warningCount(const IncidentLog& log) {
    return log.entries().size() - log.errorCount();
}

}  // namespace

TEST_CASE("agenda: insert splits, trims and replaces") {
    ag::Agenda a;
    a.insert(stay(0, 86400, 0));
    a.insert(stay(28800, 57600, 1));  // splits the all-day task
    REQUIRE(a.tasks.size() == 3);
    CHECK(a.tasks[0].t1 == 28800);
    CHECK(a.tasks[0].building == 0);
    CHECK(a.tasks[1].building == 1);
    CHECK(a.tasks[2].t0 == 57600);
    CHECK(a.tasks[2].t1 == 86400);
    CHECK(a.tasks[2].building == 0);

    a.insert(stay(21600, 32400, 2));  // trims both neighbours
    REQUIRE(a.tasks.size() == 4);
    CHECK(a.tasks[0].t1 == 21600);
    CHECK(a.tasks[1].t0 == 21600);
    CHECK(a.tasks[1].t1 == 32400);
    CHECK(a.tasks[1].building == 2);
    CHECK(a.tasks[2].t0 == 32400);
    CHECK(a.tasks[2].building == 1);

    a.insert(stay(0, 86400, 3));  // swallows everything
    REQUIRE(a.tasks.size() == 1);
    CHECK(a.tasks[0].building == 3);
}

TEST_CASE("agenda: adjacent tasks keep exact boundaries") {
    ag::Agenda a;
    a.insert(stay(28800, 57600, 0));
    a.insert(stay(57600, 72000, 1));  // shares one endpoint, no overlap
    a.insert(stay(14400, 28800, 2));
    REQUIRE(a.tasks.size() == 3);
    CHECK(a.tasks[0].building == 2);
    CHECK(a.tasks[1].building == 0);
    CHECK(a.tasks[1].t0 == 28800);
    CHECK(a.tasks[1].t1 == 57600);
    CHECK(a.tasks[2].building == 1);
    CHECK(a.indexAt(57600) == 2);  // half-open intervals
    CHECK(a.indexAt(57599.5) == 1);
    CHECK(a.indexAt(80000) == -1);
}

TEST_CASE("agenda: finalize fills every gap with home") {
    ag::Agenda a;
    a.insert(stay(28800, 57600, 4));
    a.finalize(9);
    REQUIRE(a.tasks.size() == 3);
    CHECK(a.tasks[0].t0 == 0);
    CHECK(a.tasks[0].t1 == 28800);
    CHECK(a.tasks[0].building == 9);
    CHECK(a.tasks[0].kind == ag::TaskKind::StayInside);
    CHECK(a.tasks[2].t0 == 57600);
    CHECK(a.tasks[2].t1 == 86400);
    CHECK(partitionsDay(a));

    ag::Agenda empty;
    empty.finalize(3);
    REQUIRE(empty.tasks.size() == 1);
    CHECK(empty.tasks[0].t0 == 0);
    CHECK(empty.tasks[0].t1 == 86400);
    CHECK(partitionsDay(empty));

    ag::Agenda full;
    full.insert(stay(0, 86400, 2));
    full.finalize(3);
    REQUIRE(full.tasks.size() == 1);
    CHECK(full.tasks[0].building == 2);
}

TEST_CASE("agenda: random insertions match a minute-resolution oracle") {
    // Brute force: a minute array where each slot holds the index of the
    // insertion owning that minute (-1 = gap). Newest always wins.
    constexpr int kMinutes = 1440;
    Rng rng(0x1236u);
    for (int trial = 0; trial < 200; ++trial) {
        ag::Agenda a;
        std::vector<int> owner(kMinutes, -1);
        int inserts = 1 + rng.uniformInt(25);
        for (int i = 0; i < inserts; ++i) {
            int m0 = rng.uniformInt(kMinutes);
            int m1 = m0 + 1 + rng.uniformInt(kMinutes - m0);
            a.insert(stay(m0 * 60.0, m1 * 60.0, i));
            std::fill(owner.begin() + m0, owner.begin() + m1, i);
        }
        // Reconstruct the expected task list from the minute array.
        std::vector<ag::AgendaTask> expected;
        for (int m = 0; m < kMinutes;) {
            int who = owner[m];
            int end = m;
            while (end < kMinutes && owner[end] == who) ++end;
            if (who >= 0) expected.push_back(stay(m * 60.0, end * 60.0, who));
            m = end;
        }
        REQUIRE(a.tasks.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(a.tasks[i].t0 == expected[i].t0);
            CHECK(a.tasks[i].t1 == expected[i].t1);
            CHECK(a.tasks[i].building == expected[i].building);
        }
    }
}

TEST_CASE("agendagen: baseline keeps everyone home") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n",
                   townPeople(), log);
    CHECK(log.entries().empty());
    REQUIRE(set.agendas.size() == 6);
    for (const auto& a : set.agendas) {
        REQUIRE(a.tasks.size() == 1);
        CHECK(a.tasks[0].t0 == 0);
        CHECK(a.tasks[0].t1 == 86400);
        CHECK(a.tasks[0].kind == ag::TaskKind::StayInside);
        CHECK(a.tasks[0].building == 0);
        CHECK(a.tasks.front().groupId == -1);
        CHECK(set.pools[a.ownerPersonId].empty());
    }
    CHECK(set.groupCount == 0);
}

TEST_CASE("agendagen: member selectors dispatch by age, first match only") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ age < 18: stayInside(1h, 2h, home)\n"
                   "                     | age < 65: stayInside(2h, 3h, home)\n"
                   "                     | true:     stayInside(3h, 4h, home) }\n",
                   townPeople(), log);
    CHECK(log.entries().empty());
    auto windowOf = [&](int person) {
        const auto& tasks = set.agendas[person].tasks;
        REQUIRE(tasks.size() == 3);
        return std::pair<double, double>{tasks[1].t0, tasks[1].t1};
    };
    CHECK(windowOf(0) == std::pair<double, double>{7200, 10800});   // adult
    CHECK(windowOf(1) == std::pair<double, double>{7200, 10800});
    CHECK(windowOf(2) == std::pair<double, double>{3600, 7200});    // child
    CHECK(windowOf(3) == std::pair<double, double>{3600, 7200});
    CHECK(windowOf(4) == std::pair<double, double>{10800, 14400});  // elder
    CHECK(windowOf(5) == std::pair<double, double>{10800, 14400});
}

TEST_CASE("agendagen: variables are scoped to the rule that set them") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ true: Outer }\n"
                   "Outer --> set(x, 1h)\n"
                   "          Inner\n"
                   "          stayInside(0h, x, home)\n"  // Inner's set must not leak up
                   "          set(y, 5h)\n"
                   "          Down\n"
                   "Inner --> set(x, 2h)\n"
                   "Down --> stayInside(4h, y, home)\n",  // parent bindings visible below
                   makePeople({{{30}}}), log);
    CHECK(log.entries().empty());
    const auto& tasks = set.agendas[0].tasks;
    REQUIRE(tasks.size() == 4);
    CHECK(tasks[0].t1 == 3600);
    CHECK(tasks[2].t0 == 14400);
    CHECK(tasks[2].t1 == 18000);

    IncidentLog bad;
    auto set2 = gen("@StartRule\n"
                    "Household --> members{ true: stayInside(0h, z, home) }\n",
                    makePeople({{{30}}}), bad);
    CHECK(bad.errorCount() == 1);  // undefined variable aborts the household
    REQUIRE(set2.agendas[0].tasks.size() == 1);
    CHECK(set2.agendas[0].tasks[0].t1 == 86400);
}

TEST_CASE("agendagen: built-in queries resolve against city and household") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ true: Probe }\n"
                   "Probe --> set(s, findNearestBuilding(\"school\", home))\n"
                   "          set(d, getDistance(home, s))\n"
                   "          set(tt, getDistanceInTime(home, s))\n"
                   "          set(n, count())\n"
                   "          set(nk, count(age < 18))\n"
                   "          set(cm, chooseMember(age))\n"
                   "          delayedRule(1h, 2h, Nop)\n"
                   "Nop --> NIL\n",
                   townPeople(), log);
    CHECK(log.entries().empty());
    auto varsOf = [&](int person) {
        const auto* t = set.agendas[person].taskAt(3600);
        REQUIRE(t != nullptr);
        REQUIRE(t->kind == ag::TaskKind::DelayedRule);
        return t->vars;
    };

    auto child = varsOf(2);
    CHECK((child.at("s").entity == EntityId::building(1)));
    CHECK(child.at("d").number == 24.0);
    CHECK(child.at("tt").number == doctest::Approx(24.0 / 1.1).epsilon(1e-12));
    CHECK(child.at("n").number == 4.0);
    CHECK(child.at("nk").number == 2.0);
    CHECK((child.at("cm").entity == EntityId::person(0)));  // oldest in household 0

    auto elder = varsOf(4);
    CHECK(elder.at("tt").number == doctest::Approx(24.0 / 0.9).epsilon(1e-12));
    CHECK(elder.at("n").number == 2.0);
    CHECK(elder.at("nk").number == 0.0);
    CHECK((elder.at("cm").entity == EntityId::person(5)));  // oldest in household 1

    auto adult = varsOf(0);
    CHECK(adult.at("tt").number == doctest::Approx(24.0 / 1.4).epsilon(1e-12));
}

TEST_CASE("agendagen: findBuilding misses yield Invalid and isValid guards them") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ true: Probe }\n"
                   "Probe --> set(b, findBuilding(\"stadium\"))\n"
                   "          case isValid(b): stayInside(1h, 2h, home)\n"
                   "          else: stayInside(3h, 4h, home)\n",
                   makePeople({{{30}}}), log);
    CHECK(log.entries().empty());
    const auto& a = set.agendas[0];
    CHECK(a.indexAt(3600) == 0);  // then-branch window absent
    const auto* t = a.taskAt(10800);
    REQUIRE(t != nullptr);
    CHECK(t->t0 == 10800);
    CHECK(t->t1 == 14400);
}

TEST_CASE("agendagen: nearest-building ties resolve to the lowest id") {
    // Three lots in a row: school, house, school; both schools are 24m away.
    cg::LayoutConfig cfg;
    cfg.blocksX = 3;
    cfg.blocksY = 1;
    cfg.lotsPerBlockX = 1;
    cfg.lotsPerBlockY = 1;
    IncidentLog clog;
    auto city = cg::generateCity(
        cg::generateLayout(cfg),
        rl::loadRuleFileFromSource("@StartRule\n"
                                   "Lot ->\n"
                                   "    case lot.blockX == 1: Build(\"house\")\n"
                                   "    else: Build(\"school\")\n"
                                   "Build(kind) -> extrude(6) comp(f) { front: D(kind) | all: W }\n"
                                   "D(kind) -> t('0.5, 0, 0) entrance(kind)\n"
                                   "W ->\n",
                                   "row.cga"),
        1, clog);
    REQUIRE(city.buildings.size() == 3);
    auto graph = nav::NavGraph::build(city);
    CHECK(graph.distance(graph.buildingAnchor(1), graph.buildingAnchor(0)) ==
          graph.distance(graph.buildingAnchor(1), graph.buildingAnchor(2)));

    auto rules = rl::loadRuleFileFromSource("@StartRule\n"
                                            "Household --> members{ true: Probe }\n"
                                            "Probe --> set(s, findNearestBuilding(\"school\", home))\n"
                                            "          delayedRule(1h, 2h, Nop)\n"
                                            "Nop --> NIL\n",
                                            "tie.pcg");
    IncidentLog log;
    auto set = ag::generateAllAgendas(rules, makePeople({{{30}}}, 1), city, graph, 7, log);
    CHECK(log.entries().empty());
    const auto* t = set.agendas[0].taskAt(3600);
    REQUIRE(t != nullptr);
    CHECK((t->vars.at("s").entity == EntityId::building(0)));
}

TEST_CASE("agendagen: findObject honors the search radius") {
    // Bench distances from the home entrance (12,6): o0 30.45m, o1 33.10m,
    // o2 35.99m.
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: Probe }\n"
                   "Probe --> set(near, findObject(\"bench\", 31))\n"
                   "          set(two, findObject(\"bench\", 34))\n"
                   "          set(none, findObject(\"bench\", 5))\n"
                   "          set(any, findObject(\"bench\"))\n"
                   "          delayedRule(1h, 2h, Nop)\n"
                   "Nop --> NIL\n",
                   makePeople({{{30}}}), log);
    CHECK(log.entries().empty());
    const auto* t = set.agendas[0].taskAt(3600);
    REQUIRE(t != nullptr);
    CHECK((t->vars.at("near").entity == EntityId::object(0)));  // only o0 in range
    const auto& two = t->vars.at("two");
    REQUIRE(two.isEntity());
    CHECK(two.entity.index <= 1);
    CHECK(t->vars.at("none").isInvalid());
    const auto& any = t->vars.at("any");
    REQUIRE(any.isEntity());
    CHECK(any.entity.kind == crowdforge::EntityKind::Object);

    IncidentLog log2;
    auto set2 = gen("@StartRule\n"
                    "Household --> members{ true: Probe }\n"
                    "Probe --> set(near, findObject(\"bench\", 31))\n"
                    "          set(two, findObject(\"bench\", 34))\n"
                    "          set(none, findObject(\"bench\", 5))\n"
                    "          set(any, findObject(\"bench\"))\n"
                    "          delayedRule(1h, 2h, Nop)\n"
                    "Nop --> NIL\n",
                    makePeople({{{30}}}), log2);
    const auto* t2 = set2.agendas[0].taskAt(3600);
    CHECK(t->vars.at("two").equals(t2->vars.at("two")));  // same seed, same pick
    CHECK(t->vars.at("any").equals(t2->vars.at("any")));
}

TEST_CASE("agendagen: chooseMember over booleans picks one candidate per seed") {
    const std::string rules =
        "@StartRule\n"
        "Household --> members{ true: stayInside(0h, 24h, home) }\n"
        "              members{ chooseMember(age >= 18): stayInside(22h, 23h, home) }\n";
    IncidentLog log;
    auto set = gen(rules, makePeople({{{40}, {35}}}), log);
    CHECK(log.entries().empty());
    int marked = 0;
    int who = -1;
    for (int p = 0; p < 2; ++p)
        if (set.agendas[p].indexAt(79200) >= 0 && set.agendas[p].taskAt(79200)->t0 == 79200) {
            ++marked;
            who = p;
        }
    CHECK(marked == 1);

    IncidentLog log2;
    auto set2 = gen(rules, makePeople({{{40}, {35}}}), log2);
    CHECK(set2.agendas[who].taskAt(79200)->t0 == 79200);  // deterministic per seed
}

TEST_CASE("agendagen: delayed rules capture variables by value") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: Elder }\n"
                   "Elder --> set(spot, findNearestBuilding(\"school\", home))\n"
                   "          delayedRule(8h, 9h, Go)\n"
                   "          set(spot, home)\n"  // later mutation must not show up
                   "Go --> NIL\n",
                   makePeople({{{70}}}), log);
    CHECK(log.entries().empty());
    const auto& a = set.agendas[0];
    const auto* t = a.taskAt(28800);
    REQUIRE(t != nullptr);
    CHECK(t->kind == ag::TaskKind::DelayedRule);
    CHECK(t->t1 == 32400);
    CHECK(t->ruleName == "Go");
    CHECK((t->vars.at("spot").entity == EntityId::building(1)));

    IncidentLog unknown;
    gen("@StartRule\n"
        "Household --> members{ true: delayedRule(1h, 2h, Nope) }\n",
        makePeople({{{70}}}), unknown);
    CHECK(unknown.errorCount() == 1);  // rule names are validated eagerly

    IncidentLog zero;
    gen("@StartRule\n"
        "Household --> members{ true: X }\n"
        "X --> delayedRule(2h, 2h, X)\n",
        makePeople({{{70}}}), zero);
    CHECK(zero.errorCount() == 1);
}

TEST_CASE("agendagen: floating slots and tasks land in the pool") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ true: Free }\n"
                   "Free --> floatingSlot(17h, 20h)\n"
                   "         floatingTask(1h, Stroll, 2)\n"
                   "         floatingTask(30m, Stroll)\n"
                   "Stroll --> wait(2)\n",
                   makePeople({{{30}}}), log);
    CHECK(log.entries().empty());  // Stroll body runs at simulation time only
    const auto& a = set.agendas[0];
    const auto* slot = a.taskAt(61200);
    REQUIRE(slot != nullptr);
    CHECK(slot->kind == ag::TaskKind::FloatingSlot);
    CHECK(slot->t0 == 61200);
    CHECK(slot->t1 == 72000);
    REQUIRE(set.pools[0].size() == 2);
    CHECK(set.pools[0][0].maxDuration == 3600);
    CHECK(set.pools[0][0].ruleName == "Stroll");
    CHECK(set.pools[0][0].priority == 2);
    CHECK(set.pools[0][1].maxDuration == 1800);
    CHECK(set.pools[0][1].priority == 0);  // default

    IncidentLog bad;
    gen("@StartRule\n"
        "Household --> members{ true: floatingTask(0h, X) }\n"
        "X --> NIL\n",
        makePeople({{{30}}}), bad);
    CHECK(bad.errorCount() == 1);  // duration must be positive
}

TEST_CASE("agendagen: accompany without matches warns and moves on") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                   "              members{ age >= 65: accompany(6h, age < 18) }\n",
                   makePeople({{{70}, {72}}}), log);
    CHECK(log.errorCount() == 0);
    REQUIRE(warningCount(log) == 2);  // both elders probe an empty member set
    CHECK(log.entries()[0].message.find("accompany") != std::string::npos);
    CHECK(set.groupCount == 0);
    for (const auto& a : set.agendas) CHECK(a.tasks.size() == 1);

    // Matching members exist but never walk anywhere after the probe time.
    IncidentLog log2;
    auto set2 = gen("@StartRule\n"
                    "Household --> members{ true: stayInside(0h, 24h, home) }\n"
                    "              members{ age >= 18: accompany(6h, age < 18) }\n",
                    makePeople({{{40}, {8}}}), log2);
    CHECK(warningCount(log2) == 1);
    CHECK(set2.groupCount == 0);
}

TEST_CASE("agendagen: simulation-time operations are skipped at generation") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: W }\n"
                   "W --> wait(2)\n"
                   "      goToZone(\"park\")\n"
                   "      waitUntilNextTask()\n",
                   makePeople({{{30}}}), log);
    CHECK(log.errorCount() == 0);
    CHECK(warningCount(log) == 3);
    for (const auto& e : log.entries())
        CHECK(e.message.find("simulation-time") != std::string::npos);
    REQUIRE(set.agendas[0].tasks.size() == 1);
    CHECK(set.agendas[0].tasks[0].t1 == 86400);
}

TEST_CASE("agendagen: agenda operations without a focused person are skipped") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> stayInside(1h, 2h, home)\n",
                   makePeople({{{30}}}), log);
    CHECK(log.errorCount() == 0);
    REQUIRE(warningCount(log) == 1);
    CHECK(log.entries()[0].message.find("no focused person") != std::string::npos);
    REQUIRE(set.agendas[0].tasks.size() == 1);  // just the finalize fill
    CHECK(set.agendas[0].tasks[0].t1 == 86400);
}

TEST_CASE("agendagen: windows are clamped to the day") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: M }\n"
                   "M --> stayInside(0h - 1h, 2h, home)\n"
                   "      stayInside(23h, 25h, home)\n",
                   makePeople({{{30}}}), log);
    CHECK(log.errorCount() == 0);
    CHECK(warningCount(log) == 2);
    const auto& tasks = set.agendas[0].tasks;
    REQUIRE(tasks.size() == 3);
    CHECK(tasks[0].t0 == 0);
    CHECK(tasks[0].t1 == 7200);
    CHECK(tasks[2].t0 == 82800);
    CHECK(tasks[2].t1 == 86400);
}

TEST_CASE("agendagen: zero-length windows") {
    IncidentLog silent;
    auto set = gen("@StartRule\n"
                   "Household --> members{ true: goToBuilding(1h, 1h, home) }\n",
                   makePeople({{{30}}}), silent);
    CHECK(silent.entries().empty());  // instant arrival, silently dropped
    CHECK(set.agendas[0].tasks.size() == 1);

    IncidentLog err;
    gen("@StartRule\n"
        "Household --> members{ true: stayInside(1h, 1h, home) }\n",
        makePeople({{{30}}}), err);
    CHECK(err.errorCount() == 1);

    IncidentLog neg;
    gen("@StartRule\n"
        "Household --> members{ true: stayInside(2h, 1h, home) }\n",
        makePeople({{{30}}}), neg);
    CHECK(neg.errorCount() == 1);
}

TEST_CASE("agendagen: a failing household rolls back alone") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household -->\n"
                   "    members{ true: stayInside(0h, 24h, home) }\n"
                   "    case household.id == 0: members{ true: Bad }\n"
                   "    else: members{ true: stayInside(20h, 21h, home) }\n"
                   "Bad --> stayInside(18h, 19h, home)\n"
                   "        stayInside(2h, 1h, home)\n",
                   townPeople(), log);
    CHECK(log.errorCount() == 1);
    for (int p = 0; p <= 3; ++p) {
        REQUIRE(set.agendas[p].tasks.size() == 1);  // marker rolled back too
        CHECK(set.agendas[p].tasks[0].t1 == 86400);
    }
    for (int p = 4; p <= 5; ++p) {
        const auto* t = set.agendas[p].taskAt(72000);
        REQUIRE(t != nullptr);
        CHECK(t->t0 == 72000);
        CHECK(t->t1 == 75600);
    }
}

TEST_CASE("agendagen: group ids are global across households") {
    IncidentLog log;
    auto set = gen("@StartRule\n"
                   "Household -->\n"
                   "    members{ true: stayInside(0h, 24h, home) }\n"
                   "    members{ age < 18: Kid }\n"
                   "    members{ chooseMember(age >= 18): accompany(6h, age < 18) }\n"
                   "Kid --> set(school, findNearestBuilding(\"school\", home))\n"
                   "        set(time, getDistanceInTime(home, school))\n"
                   "        goToBuilding(8h - time, 8h, school)\n"
                   "        stayInside(8h, 16h, school)\n",
                   makePeople({{{40}, {8}}, {{38}, {9}}}), log);
    CHECK(log.entries().empty());
    CHECK(set.groupCount == 2);
    auto groupTaskOf = [&](int person) {
        for (const auto& t : set.agendas[person].tasks)
            if (t.kind == ag::TaskKind::GroupAccompany) return &t;
        return static_cast<const ag::AgendaTask*>(nullptr);
    };
    const auto* g0 = groupTaskOf(0);
    const auto* g1 = groupTaskOf(2);
    REQUIRE(g0 != nullptr);
    REQUIRE(g1 != nullptr);
    CHECK(g0->groupId == 0);
    CHECK(g0->leaderId == 0);
    CHECK(g0->memberIds == std::vector<int>{1});
    CHECK(g1->groupId == 1);
    CHECK(g1->leaderId == 2);
    CHECK(g1->memberIds == std::vector<int>{3});
    // The member walks carry the renumbered ids too.
    CHECK(set.agendas[1].taskAt(28790.0)->groupId == 0);
    CHECK(set.agendas[3].taskAt(28790.0)->groupId == 1);
}

TEST_CASE("agendagen: weekday listing produces the frozen day") {
    auto rules = rl::loadRuleFile(assetPath("rules/weekday.pcg"));
    IncidentLog log;
    auto set = ag::generateAllAgendas(rules, townPeople(), townCity(), townGraph(), 7, log);
    CHECK(log.entries().empty());
    CHECK(set.groupCount == 1);
    for (const auto& a : set.agendas) CHECK(partitionsDay(a));

    const double kChildWalk = 24.0 / 1.1;

    // Adult 0: workday shifted by the first household-0 draw.
    {
        const auto& t = set.agendas[0].tasks;
        REQUIRE(t.size() == 5);
        CHECK(t[0].building == 0);
        CHECK(t[1].kind == ag::TaskKind::GoToBuilding);
        CHECK(t[1].t0 == doctest::Approx(28670.211314).epsilon(1e-9));
        CHECK(t[1].t1 == doctest::Approx(28700.211314).epsilon(1e-9));
        CHECK(t[1].building == 2);
        CHECK(t[2].t1 == 57600);
        CHECK(t[3].t1 == 57630);  // 42m at 1.4 m/s
        CHECK(t[3].building == 0);
        CHECK(t[4].t1 == 86400);
    }

    // Adult 1: walks the children to school, then heads to work.
    {
        const auto& t = set.agendas[1].tasks;
        REQUIRE(t.size() == 7);
        CHECK(t[1].kind == ag::TaskKind::GroupAccompany);
        CHECK(t[1].t0 == doctest::Approx(28800.0 - kChildWalk).epsilon(1e-12));
        CHECK(t[1].t1 == 28800);
        CHECK(t[1].building == 1);
        CHECK(t[1].groupId == 0);
        CHECK(t[1].leaderId == 1);
        CHECK(t[1].memberIds == std::vector<int>{2, 3});
        CHECK(t[3].kind == ag::TaskKind::GoToBuilding);
        CHECK(t[3].t0 == doctest::Approx(29024.387201).epsilon(1e-9));
        CHECK(t[3].t1 == doctest::Approx(29054.387201).epsilon(1e-9));
        CHECK(t[3].building == 2);
        CHECK(t[4].t1 == 57600);
        CHECK(t[5].t1 == 57630);
    }

    // Children: grouped walk to school, solo walk home.
    for (int p : {2, 3}) {
        const auto& t = set.agendas[p].tasks;
        REQUIRE(t.size() == 5);
        CHECK(t[1].kind == ag::TaskKind::GoToBuilding);
        CHECK(t[1].t0 == doctest::Approx(28800.0 - kChildWalk).epsilon(1e-12));
        CHECK(t[1].t1 == 28800);
        CHECK(t[1].building == 1);
        CHECK(t[1].groupId == 0);
        CHECK(t[2].t1 == 57600);
        CHECK(t[2].building == 1);
        CHECK(t[3].t1 == doctest::Approx(57600.0 + kChildWalk).epsilon(1e-12));
        CHECK(t[3].groupId == -1);
    }

    // Elders: a delayed park visit around noon, windows from household 1's
    // stream.
    {
        const auto& t4 = set.agendas[4].tasks;
        REQUIRE(t4.size() == 3);
        CHECK(t4[1].kind == ag::TaskKind::DelayedRule);
        CHECK(t4[1].ruleName == "VisitPark");
        CHECK(t4[1].t0 == doctest::Approx(28486.849441).epsilon(1e-9));
        CHECK(t4[1].t1 == doctest::Approx(43726.620237).epsilon(1e-9));
        CHECK(t4[1].vars.empty());
        const auto& t5 = set.agendas[5].tasks;
        REQUIRE(t5.size() == 3);
        CHECK(t5[1].t0 == doctest::Approx(30573.847730).epsilon(1e-9));
        CHECK(t5[1].t1 == doctest::Approx(44607.142233).epsilon(1e-9));
    }
}

TEST_CASE("agendagen: generation is deterministic per seed") {
    auto rules = rl::loadRuleFile(assetPath("rules/weekday.pcg"));
    IncidentLog l1, l2, l3;
    auto a = ag::generateAllAgendas(rules, townPeople(), townCity(), townGraph(), 7, l1);
    auto b = ag::generateAllAgendas(rules, townPeople(), townCity(), townGraph(), 7, l2);
    auto c = ag::generateAllAgendas(rules, townPeople(), townCity(), townGraph(), 8, l3);
    CHECK(ag::agendasToJson(a) == ag::agendasToJson(b));
    CHECK(ag::agendasToJson(a) != ag::agendasToJson(c));
}

TEST_CASE("agendagen: json round-trip is byte-stable") {
    auto rules = rl::loadRuleFile(assetPath("rules/weekday.pcg"));
    IncidentLog log;
    auto set = ag::generateAllAgendas(rules, townPeople(), townCity(), townGraph(), 7, log);
    set.inputDigests["population"] = "abc123";
    auto text = ag::agendasToJson(set);
    auto loaded = ag::agendasFromJson(text);
    CHECK(ag::agendasToJson(loaded) == text);
    CHECK(loaded.seed == 7);
    CHECK(loaded.groupCount == 1);
    CHECK(loaded.inputDigests.at("population") == "abc123");
    REQUIRE(loaded.rules.findRule("VisitPark") != nullptr);
    CHECK(loaded.attributes.at("schoolStart").number == 28800.0);
    REQUIRE(loaded.agendas.size() == 6);
    CHECK(loaded.agendas[1].tasks[1].memberIds == std::vector<int>{2, 3});
    CHECK(loaded.pools.size() == 6);
}
