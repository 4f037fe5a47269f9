#include "crowdforge/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

#include "crowdforge/common/timefmt.hpp"
#include "crowdforge/rulelang/eval.hpp"

namespace crowdforge::sim {

namespace rl = rulelang;
namespace ag = agendagen;

const char* personModeName(PersonMode mode) {
    switch (mode) {
        case PersonMode::Hidden: return "hidden";
        case PersonMode::Idle: return "idle";
        case PersonMode::Walking: return "walking";
        case PersonMode::Grouped: return "grouped";
        case PersonMode::Interacting: return "interacting";
    }
    return "?";
}

int coherenceViolations(const std::vector<Event>& events) {
    std::map<std::pair<int, int>, int> balance;  // (person, building) -> open entries
    int violations = 0;
    for (const auto& e : events) {
        if (e.kind == Event::Kind::Enter) {
            ++balance[{e.personId, e.targetId}];
        } else if (e.kind == Event::Kind::Exit) {
            int& open = balance[{e.personId, e.targetId}];
            if (open <= 0)
                ++violations;
            else
                --open;
        }
    }
    return violations;
}

namespace {

// One resumable position inside a successor-item list. Group items share the
// caller's variables (brackets only delimit guards); rule calls get a copy.
struct Frame {
    const std::vector<rl::SuccessorItem>* items = nullptr;
    std::size_t idx = 0;
    bool guardSeen = false, guardTaken = false, skipping = false;
    std::shared_ptr<std::map<std::string, rl::Value>> vars;
};

struct ExecContext {
    int personId = -1;
    std::vector<Frame> stack;
    enum class Block { None, Until, Arrival, SlotEnd };
    Block block = Block::None;
    double blockUntil = 0.0;
    double slotEnd = 0.0;
    std::set<int> touched;  // objects carrying this person's reservation/hold
};

struct PersonState {
    int taskIndex = -1;
    bool hidden = true;
    int inside = -1;
    bool arrived = false;     // current task's walk has completed
    bool legPending = false;  // current task started a walk that hasn't ended
    bool slotIdle = false;    // floating slot with nothing left that fits
    std::unique_ptr<ExecContext> ctx;
    Rng rng{0};
};

struct Group {
    int id = -1;
    int leaderId = -1;
    std::vector<int> expected;  // participants that really carry the task
    std::set<int> present;      // gathered at the rendezvous / marching
    int sourceBuilding = -1;
    int targetBuilding = -1;
    double t0 = 0.0, t1 = 0.0;
    navgraph::Path path;
    double progress = 0.0;
    double speed = 0.0;
    bool moving = false;
    bool done = false;
};

struct Occupancy {
    int capacity = 1;
    std::set<int> holders;
    std::set<int> soft;
    int free() const {
        return capacity - static_cast<int>(holders.size()) - static_cast<int>(soft.size());
    }
};

}  // namespace

struct World::Impl : rl::Env {
    const citygen::SemanticCity& city;
    const navgraph::NavGraph& graph;
    const population::Population& people;
    const ag::AgendaSet& agendas;
    std::uint64_t seed;
    IncidentLog& log;
    World& self;

    double base = 0.0;  // time-of-day at the last initialize
    bool initialized = false;
    std::vector<PersonState> state;
    std::map<int, Agent> agents;
    std::map<int, Group> groups;
    std::map<int, Occupancy> occupancy;
    std::vector<std::vector<ag::FloatingTaskEntry>> pools;
    std::uint64_t ticksPerSample = 240;
    std::function<void(const World&)> sampleHook;

    // Static group facts gathered from the agendas once.
    struct GroupInfo {
        int leaderId = -1;
        std::vector<int> walkers;  // members whose agenda carries the grouped walk
        int targetBuilding = -1;
        double t0 = 0.0, t1 = 0.0;
    };
    std::map<int, GroupInfo> groupInfo;

    // Evaluation state while running rule items for one context.
    ExecContext* evalCtx = nullptr;
    int evalFocus = -1;

    Impl(const citygen::SemanticCity& c, const navgraph::NavGraph& g,
         const population::Population& p, const ag::AgendaSet& a, std::uint64_t s,
         IncidentLog& l, World& w)
        : city(c), graph(g), people(p), agendas(a), seed(s), log(l), self(w) {
        for (const auto& agenda : agendas.agendas) {
            for (const auto& task : agenda.tasks) {
                if (task.kind == ag::TaskKind::GroupAccompany && task.groupId >= 0) {
                    auto& info = groupInfo[task.groupId];
                    info.leaderId = agenda.ownerPersonId;
                    info.targetBuilding = task.building;
                    info.t0 = task.t0;
                    info.t1 = task.t1;
                } else if (task.kind == ag::TaskKind::GoToBuilding && task.groupId >= 0) {
                    groupInfo[task.groupId].walkers.push_back(agenda.ownerPersonId);
                }
            }
        }
    }

    // --- small helpers ------------------------------------------------------
    double now() const { return base + self.config_.dt * static_cast<double>(self.tick_); }

    const ag::Agenda& agendaOf(int pid) const { return agendas.agendas[pid]; }

    const ag::AgendaTask* taskOf(int pid) const {
        const auto& a = agendaOf(pid);
        int idx = state[pid].taskIndex;
        if (idx < 0 || idx >= static_cast<int>(a.tasks.size())) return nullptr;
        return &a.tasks[idx];
    }

    int homeOf(int pid) const { return people.persons[pid].homeBuilding; }

    void emit(Event::Kind kind, int pid, int target) {
        self.events_.push_back({kind, now(), pid, target});
    }

    Occupancy& occupancyOf(int objectId) {
        auto it = occupancy.find(objectId);
        if (it == occupancy.end()) {
            Occupancy o;
            o.capacity = city.objects[objectId].capacity;
            it = occupancy.emplace(objectId, o).first;
        }
        return it->second;
    }

    // --- person placement ---------------------------------------------------
    Agent& embody(int pid) {
        auto it = agents.find(pid);
        if (it != agents.end()) return it->second;
        PersonState& p = state[pid];
        Agent a;
        a.personId = pid;
        if (p.hidden) {
            int b = p.inside >= 0 ? p.inside : homeOf(pid);
            emit(Event::Kind::Exit, pid, b);
            a.position = graph.buildingAnchor(b);
            p.hidden = false;
            p.inside = -1;
        }
        return agents.emplace(pid, std::move(a)).first->second;
    }

    void enterBuilding(int pid, int building) {
        agents.erase(pid);
        PersonState& p = state[pid];
        p.hidden = true;
        p.inside = building;
        p.arrived = true;
        p.legPending = false;
        emit(Event::Kind::Enter, pid, building);
    }

    void startWalkTo(int pid, int building) {
        PersonState& p = state[pid];
        if (p.hidden && p.inside == building) {
            p.arrived = true;
            p.legPending = false;
            return;
        }
        Agent& a = embody(pid);
        a.path = graph.route(a.position, graph.buildingAnchor(building));
        a.progress = 0.0;
        a.toBuilding = true;
        a.targetBuilding = building;
        a.groupId = -1;
        p.legPending = true;
        p.arrived = false;
        if (a.path.length <= 0.0) {
            enterBuilding(pid, building);
            return;
        }
        a.walking = true;
    }

    // --- groups ---------------------------------------------------------------
    Group& ensureGroup(int gid) {
        auto it = groups.find(gid);
        if (it != groups.end()) return it->second;
        const GroupInfo& info = groupInfo.at(gid);
        Group g;
        g.id = gid;
        g.leaderId = info.leaderId;
        g.targetBuilding = info.targetBuilding;
        g.t0 = info.t0;
        g.t1 = info.t1;
        g.expected.push_back(info.leaderId);
        for (int m : info.walkers) g.expected.push_back(m);
        std::sort(g.expected.begin(), g.expected.end());
        // Rendezvous at the leader's current spot (normally its home entrance).
        const PersonState& lp = state[info.leaderId];
        Vec2 start;
        if (lp.hidden) {
            g.sourceBuilding = lp.inside >= 0 ? lp.inside : homeOf(info.leaderId);
            start = graph.buildingAnchor(g.sourceBuilding);
        } else {
            start = agents.at(info.leaderId).position;
        }
        g.path = graph.route(start, graph.buildingAnchor(info.targetBuilding));
        double speed = 1e9;
        for (int pid : g.expected) speed = std::min(speed, people.persons[pid].walkSpeed());
        g.speed = speed;
        return groups.emplace(gid, std::move(g)).first->second;
    }

    void attachToGroup(int pid, int gid) {
        Group& g = ensureGroup(gid);
        PersonState& p = state[pid];
        p.legPending = true;
        p.arrived = false;
        if (g.done) {  // late activation after the march already ended
            startWalkTo(pid, g.targetBuilding);
            return;
        }
        Vec2 start = g.path.at(0.0);
        bool atStart = p.hidden ? (p.inside == g.sourceBuilding)
                                : euclid(agents.at(pid).position, start) < 1e-6;
        Agent& a = embody(pid);
        a.groupId = gid;
        a.targetBuilding = g.targetBuilding;
        a.toBuilding = true;
        if (atStart) {
            a.position = g.path.at(g.progress);
            a.walking = false;
            g.present.insert(pid);
        } else {
            // Walk to the rendezvous first; the group waits for everyone.
            a.path = graph.route(a.position, start);
            a.progress = 0.0;
            a.walking = true;
            a.toBuilding = false;  // joining leg, does not end inside a building
        }
    }

    static double euclid(const Vec2& a, const Vec2& b) {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    // --- occupancy ------------------------------------------------------------
    void releaseHolds(ExecContext& ctx) {
        for (int obj : ctx.touched) {
            Occupancy& o = occupancyOf(obj);
            if (o.holders.erase(ctx.personId))
                emit(Event::Kind::InteractStop, ctx.personId, obj);
            o.soft.erase(ctx.personId);
        }
        ctx.touched.clear();
        auto it = agents.find(ctx.personId);
        if (it != agents.end()) it->second.interactingWith = -1;
    }

    // --- execution contexts -----------------------------------------------------
    void makeContext(int pid, const rl::Rule& rule,
                     const std::map<std::string, rl::Value>& vars, double slotEnd) {
        auto ctx = std::make_unique<ExecContext>();
        ctx->personId = pid;
        ctx->slotEnd = slotEnd;
        Frame f;
        f.items = &rule.successor;
        f.vars = std::make_shared<std::map<std::string, rl::Value>>(vars);
        ctx->stack.push_back(std::move(f));
        state[pid].ctx = std::move(ctx);
    }

    // Destroys the context, releasing holds. `truncated` marks an unfinished
    // stack cut off by the slot end.
    void destroyContext(int pid, bool truncated) {
        PersonState& p = state[pid];
        if (!p.ctx) return;
        if (truncated && !p.ctx->stack.empty() && p.ctx->block != ExecContext::Block::SlotEnd)
            log.warn("sim", "delayed rule truncated at slot end", now(), pid);
        releaseHolds(*p.ctx);
        p.ctx.reset();
    }

    // Runs the context until it blocks, exhausts its stack, or errors.
    // Returns true while the context stays alive.
    bool tickContext(int pid) {
        PersonState& p = state[pid];
        ExecContext& ctx = *p.ctx;
        int ops = 0;
        try {
            while (true) {
                if (ctx.block != ExecContext::Block::None) {
                    if (!blockCleared(ctx)) return true;
                    ctx.block = ExecContext::Block::None;
                }
                if (ctx.stack.empty()) {
                    destroyContext(pid, false);
                    return false;
                }
                if (++ops > self.config_.maxOpsPerTick)
                    throw rl::EvalError("rule did not yield within one tick", rl::SourcePos{});
                Frame& f = ctx.stack.back();
                if (f.idx >= f.items->size()) {
                    ctx.stack.pop_back();
                    continue;
                }
                const rl::SuccessorItem& item = (*f.items)[f.idx];
                ++f.idx;
                if (!execItem(ctx, f, item)) return true;  // blocked (or destroyed)
                if (!p.ctx) return false;                  // op ended the context
            }
        } catch (const rl::EvalError& err) {
            log.error("sim", "person " + std::to_string(pid) + ": " + err.what(), now(), pid);
            destroyContext(pid, false);
            return false;
        }
    }

    bool blockCleared(ExecContext& ctx) {
        switch (ctx.block) {
            case ExecContext::Block::None: return true;
            case ExecContext::Block::Until: return now() >= ctx.blockUntil;
            case ExecContext::Block::SlotEnd: return now() >= ctx.slotEnd;
            case ExecContext::Block::Arrival: {
                auto it = agents.find(ctx.personId);
                return it == agents.end() || !it->second.walking;
            }
        }
        return true;
    }

    // Executes one successor item. Returns false when execution must pause
    // (the context blocked); the context may also have been destroyed.
    bool execItem(ExecContext& ctx, Frame& frame, const rl::SuccessorItem& item) {
        evalCtx = &ctx;
        evalFocus = ctx.personId;
        if (item.kind == rl::SuccessorItem::Kind::CaseGuard) {
            if (frame.guardTaken) {
                frame.skipping = true;
            } else {
                frame.guardTaken = rl::evaluateCondition(*item.condition, *this);
                frame.skipping = !frame.guardTaken;
            }
            frame.guardSeen = true;
            return true;
        }
        if (item.kind == rl::SuccessorItem::Kind::ElseGuard) {
            if (!frame.guardSeen)
                throw rl::EvalError("else without case", item.pos);
            frame.skipping = frame.guardTaken;
            frame.guardTaken = true;
            return true;
        }
        if (frame.guardSeen && frame.skipping) return true;
        if (item.kind == rl::SuccessorItem::Kind::Group) {
            Frame inner;
            inner.items = &item.items;
            inner.vars = frame.vars;  // brackets only delimit guards
            ctx.stack.push_back(std::move(inner));
            return true;
        }
        return execCall(ctx, frame, item);
    }

    bool execCall(ExecContext& ctx, Frame& frame, const rl::SuccessorItem& item) {
        const std::string& op = item.name;
        int pid = ctx.personId;
        if (op == "NIL") return true;
        if (op == "set") {
            if (item.args.size() != 2)
                throw rl::EvalError("set expects 2 arguments", item.pos);
            const rl::Expr* target = item.args[0].get();
            if (target->kind != rl::Expr::Kind::Var)
                throw rl::EvalError("set: first argument must be a name", item.pos);
            (*frame.vars)[target->text] = rl::evaluate(*item.args[1], *this);
            return true;
        }
        if (op == "wait") {
            if (item.args.size() != 1)
                throw rl::EvalError("wait expects 1 argument", item.pos);
            double s = numberOf(op, *item.args[0]);
            ctx.block = ExecContext::Block::Until;
            ctx.blockUntil = now() + std::max(0.0, s);
            return false;
        }
        if (op == "goToZone") {
            if (item.args.size() != 1)
                throw rl::EvalError("goToZone expects 1 argument", item.pos);
            std::string type = textOf(op, *item.args[0]);
            const auto& zones = city.zonesOfType(type);
            if (zones.empty()) {
                log.warn("sim", "person " + std::to_string(pid) + ": no zone of type '" + type +
                                    "', rule ended",
                         now(), pid);
                destroyContext(pid, false);
                return false;
            }
            Vec2 from = positionOf(pid);
            int bestZone = -1;
            double bestDist = 0.0;
            Vec2 bestEntry;
            for (int z : zones) {
                Vec2 entry = graph.nearestZoneEntry(z, from);
                double d = graph.distance(from, entry);
                if (bestZone < 0 || d < bestDist) {
                    bestZone = z;
                    bestDist = d;
                    bestEntry = entry;
                }
            }
            walkContext(pid, bestEntry);
            ctx.block = ExecContext::Block::Arrival;
            return false;
        }
        if (op == "goToObject") {
            if (item.args.size() != 1)
                throw rl::EvalError("goToObject expects 1 argument", item.pos);
            rl::Value v = rl::evaluate(*item.args[0], *this);
            if (!v.isEntity() || v.entity.kind != EntityKind::Object) {
                log.warn("sim",
                         "person " + std::to_string(pid) + ": goToObject on " + v.toString() +
                             ", rule ended",
                         now(), pid);
                destroyContext(pid, false);
                return false;
            }
            walkContext(pid, graph.objectAnchor(v.entity.index));
            ctx.block = ExecContext::Block::Arrival;
            return false;
        }
        if (op == "interact") {
            if (item.args.size() != 1 && item.args.size() != 2)
                throw rl::EvalError("interact expects 1 or 2 arguments", item.pos);
            rl::Value v = rl::evaluate(*item.args[0], *this);
            if (item.args.size() == 2) textOf(op, *item.args[1]);  // verb, informational
            if (v.isEntity() && v.entity.kind == EntityKind::Object)
                tryInteract(ctx, v.entity.index);
            return true;
        }
        if (op == "waitUntilNextTask") {
            ctx.block = ExecContext::Block::SlotEnd;
            return false;
        }
        if (op == "stayInside" || op == "goToBuilding" || op == "delayedRule" ||
            op == "floatingSlot" || op == "floatingTask" || op == "accompany" ||
            op == "members") {
            log.warn("sim",
                     "person " + std::to_string(pid) + ": agenda operation '" + op +
                         "' ignored during simulation",
                     now(), pid);
            return true;
        }
        const rl::Rule* rule = agendas.rules.findRule(op);
        if (!rule) throw rl::EvalError("unknown rule or operation '" + op + "'", item.pos);
        if (item.hasBlock)
            throw rl::EvalError("rule call '" + op + "' does not take a selector block",
                                item.pos);
        if (rule->params.size() != item.args.size())
            throw rl::EvalError("rule '" + op + "' expects " +
                                    std::to_string(rule->params.size()) + " argument(s), got " +
                                    std::to_string(item.args.size()),
                                item.pos);
        if (ctx.stack.size() > 64)
            throw rl::EvalError("recursion depth over 64 in rule '" + op + "'", item.pos);
        Frame child;
        child.items = &rule->successor;
        child.vars = std::make_shared<std::map<std::string, rl::Value>>(*frame.vars);
        for (std::size_t i = 0; i < item.args.size(); ++i)
            (*child.vars)[rule->params[i]] = rl::evaluate(*item.args[i], *this);
        ctx.stack.push_back(std::move(child));
        return true;
    }

    Vec2 positionOf(int pid) const {
        auto it = agents.find(pid);
        if (it != agents.end()) return it->second.position;
        const PersonState& p = state[pid];
        int b = p.inside >= 0 ? p.inside : homeOf(pid);
        return graph.buildingAnchor(b);
    }

    void walkContext(int pid, const Vec2& to) {
        Agent& a = embody(pid);
        a.path = graph.route(a.position, to);
        a.progress = 0.0;
        a.toBuilding = false;
        a.targetBuilding = -1;
        a.groupId = -1;
        a.walking = a.path.length > 0.0;
        if (!a.walking) a.position = to;
    }

    void tryInteract(ExecContext& ctx, int objectId) {
        const auto& obj = city.objects[objectId];
        if (euclid(positionOf(ctx.personId), obj.position) > self.config_.interactionRange)
            return;  // out of range, execution continues
        Occupancy& o = occupancyOf(objectId);
        if (o.holders.count(ctx.personId)) return;
        bool reserved = o.soft.erase(ctx.personId) > 0;
        if (!reserved && o.free() <= 0) return;  // lost the race, no-op
        o.holders.insert(ctx.personId);
        ctx.touched.insert(objectId);
        emit(Event::Kind::InteractStart, ctx.personId, objectId);
        auto it = agents.find(ctx.personId);
        if (it != agents.end()) it->second.interactingWith = objectId;
    }

    // --- task lifecycle -------------------------------------------------------
    void activate(int pid) {
        PersonState& p = state[pid];
        const ag::AgendaTask& task = agendaOf(pid).tasks[p.taskIndex];
        p.arrived = false;
        p.legPending = false;
        p.slotIdle = false;
        switch (task.kind) {
            case ag::TaskKind::StayInside:
                startWalkTo(pid, task.building);
                break;
            case ag::TaskKind::GoToBuilding:
                if (task.groupId >= 0 && groupInfo.count(task.groupId))
                    attachToGroup(pid, task.groupId);
                else
                    startWalkTo(pid, task.building);
                break;
            case ag::TaskKind::GroupAccompany:
                attachToGroup(pid, task.groupId);
                break;
            case ag::TaskKind::DelayedRule: {
                const rl::Rule* rule = agendas.rules.findRule(task.ruleName);
                if (!rule) {
                    log.error("sim",
                              "person " + std::to_string(pid) + ": delayed rule '" +
                                  task.ruleName + "' not found",
                              now(), pid);
                    break;
                }
                makeContext(pid, *rule, task.vars, task.t1);
                break;
            }
            case ag::TaskKind::FloatingSlot:
                scheduleFloating(pid, task);
                break;
        }
    }

    void scheduleFloating(int pid, const ag::AgendaTask& slot) {
        PersonState& p = state[pid];
        auto& pool = pools[pid];
        while (true) {
            double remaining = slot.t1 - now();
            std::vector<std::size_t> fits;
            double maxPriority = 0.0;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (pool[i].maxDuration <= remaining + 1e-9) {
                    if (fits.empty() || pool[i].priority > maxPriority)
                        maxPriority = pool[i].priority;
                    fits.push_back(i);
                }
            }
            if (fits.empty()) {
                p.slotIdle = true;  // stay where we are for the remainder
                return;
            }
            std::vector<std::size_t> top;
            for (std::size_t i : fits)
                if (pool[i].priority == maxPriority) top.push_back(i);
            std::size_t pick = top[p.rng.uniformInt(top.size())];
            ag::FloatingTaskEntry entry = pool[pick];
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            const rl::Rule* rule = agendas.rules.findRule(entry.ruleName);
            if (!rule) {
                log.error("sim",
                          "person " + std::to_string(pid) + ": floating rule '" +
                              entry.ruleName + "' not found",
                          now(), pid);
                continue;
            }
            makeContext(pid, *rule, entry.vars, std::min(now() + entry.maxDuration, slot.t1));
            return;
        }
    }

    void finishTask(int pid) {
        PersonState& p = state[pid];
        if (p.ctx) destroyContext(pid, true);
        p.arrived = false;
        p.legPending = false;
        p.slotIdle = false;
    }

    // Activation and in-task progress for one person, once per tick.
    void ensureTask(int pid) {
        PersonState& p = state[pid];
        const auto& tasks = agendaOf(pid).tasks;
        if (tasks.empty() || p.taskIndex < 0) return;
        double t = now();
        while (true) {
            const ag::AgendaTask& cur = tasks[p.taskIndex];
            if (t < cur.t1) break;
            bool movement = cur.kind == ag::TaskKind::GoToBuilding ||
                            cur.kind == ag::TaskKind::GroupAccompany;
            if (movement && p.legPending) break;  // let the walk finish (slippage)
            if (p.taskIndex + 1 >= static_cast<int>(tasks.size())) break;
            finishTask(pid);
            ++p.taskIndex;
            activate(pid);
        }
        if (p.ctx) {
            const ag::AgendaTask& cur = tasks[p.taskIndex];
            if (!tickContext(pid) && t < cur.t1) {
                // Context over before the slot: proceed early.
                if (cur.kind == ag::TaskKind::FloatingSlot) {
                    if (!p.slotIdle) scheduleFloating(pid, cur);
                } else if (p.taskIndex + 1 < static_cast<int>(tasks.size())) {
                    finishTask(pid);
                    ++p.taskIndex;
                    activate(pid);
                }
            }
        }
    }

    // --- movement ---------------------------------------------------------------
    void moveAgents() {
        double dt = self.config_.dt;
        std::vector<std::pair<int, int>> arrivals;  // person, building
        for (auto& [pid, a] : agents) {
            if (!a.walking) continue;
            if (a.groupId >= 0) {
                auto git = groups.find(a.groupId);
                if (git != groups.end() && git->second.present.count(pid))
                    continue;  // marching with the group, moved below
            }
            double speed = people.persons[pid].walkSpeed();
            a.progress += speed * dt;
            if (a.progress >= a.path.length) {
                a.position = a.path.at(a.path.length);
                a.walking = false;
                a.progress = a.path.length;
                if (a.toBuilding) {
                    arrivals.emplace_back(pid, a.targetBuilding);
                } else if (a.groupId >= 0) {
                    auto git = groups.find(a.groupId);
                    if (git != groups.end() && !git->second.done)
                        git->second.present.insert(pid);  // reached the rendezvous
                }
            } else {
                a.position = a.path.at(a.progress);
            }
        }
        for (auto [pid, building] : arrivals) enterBuilding(pid, building);

        for (auto& [gid, g] : groups) {
            if (g.done) continue;
            if (!g.moving) {
                if (g.present.size() == g.expected.size()) g.moving = true;
                continue;
            }
            g.progress += g.speed * dt;
            Vec2 pos = g.path.at(std::min(g.progress, g.path.length));
            for (int pid : g.present) {
                auto it = agents.find(pid);
                if (it != agents.end()) it->second.position = pos;
            }
            if (g.progress >= g.path.length) {
                for (int pid : g.present)
                    if (agents.count(pid)) enterBuilding(pid, g.targetBuilding);
                g.present.clear();
                g.done = true;
            }
        }
    }

    // --- initialization (Algorithm 2) --------------------------------------------
    void placeHidden(int pid, int building) {
        PersonState& p = state[pid];
        p.hidden = true;
        p.inside = building;
        emit(Event::Kind::Enter, pid, building);
    }

    void initialize(double t) {
        agents.clear();
        groups.clear();
        occupancy.clear();
        state.clear();
        state.resize(people.persons.size());
        pools = agendas.pools;
        pools.resize(people.persons.size());
        base = t;
        self.tick_ = 0;
        initialized = true;
        for (const auto& person : people.persons) {
            PersonState& p = state[person.id];
            p.rng = Rng::substream(seed, 0x51300000ull + static_cast<std::uint64_t>(person.id));
        }

        std::vector<int> groupedAtT;
        for (const auto& person : people.persons) {
            int pid = person.id;
            PersonState& p = state[pid];
            const auto& agenda = agendaOf(pid);
            int idx = agenda.indexAt(t);
            if (idx < 0) {
                log.error("sim",
                          "person " + std::to_string(pid) + ": agenda does not cover " +
                              formatHMS(t) + ", staying home",
                          t, pid);
                p.taskIndex = static_cast<int>(agenda.tasks.size()) - 1;
                placeHidden(pid, homeOf(pid));
                continue;
            }
            p.taskIndex = idx;
            const ag::AgendaTask& task = agenda.tasks[idx];
            if (task.kind == ag::TaskKind::GoToBuilding && task.groupId < 0) {
                int src = idx > 0 && agenda.tasks[idx - 1].building >= 0
                              ? agenda.tasks[idx - 1].building
                              : homeOf(pid);
                spawnMidWalk(pid, src, task.building, (t - task.t0) / (task.t1 - task.t0));
            } else if ((task.kind == ag::TaskKind::GroupAccompany ||
                        task.kind == ag::TaskKind::GoToBuilding) &&
                       task.groupId >= 0 && groupInfo.count(task.groupId)) {
                groupedAtT.push_back(pid);
            } else if (task.building >= 0) {
                placeHidden(pid, task.building);
                if (task.kind != ag::TaskKind::StayInside) activate(pid);
            } else {
                // Delayed rules and floating slots restart from scratch at home.
                placeHidden(pid, homeOf(pid));
                activate(pid);
            }
        }

        // Mid-walk groups: everyone marches at the interpolated position.
        for (int pid : groupedAtT) {
            const ag::AgendaTask& task = *taskOf(pid);
            Group& g = ensureGroupAt(task.groupId, t);
            Vec2 pos = g.path.at(g.progress);
            emit(Event::Kind::Enter, pid, g.sourceBuilding);
            emit(Event::Kind::Exit, pid, g.sourceBuilding);
            PersonState& p = state[pid];
            p.hidden = false;
            p.inside = -1;
            p.legPending = true;
            Agent a;
            a.personId = pid;
            a.position = pos;
            a.groupId = task.groupId;
            a.toBuilding = true;
            a.targetBuilding = g.targetBuilding;
            a.walking = true;
            agents.emplace(pid, std::move(a));
            g.present.insert(pid);
        }

        if (sampleHook) sampleHook(self);
    }

    void spawnMidWalk(int pid, int src, int dst, double fraction) {
        PersonState& p = state[pid];
        emit(Event::Kind::Enter, pid, src);
        emit(Event::Kind::Exit, pid, src);
        Agent a;
        a.personId = pid;
        a.path = graph.route(graph.buildingAnchor(src), graph.buildingAnchor(dst));
        a.progress = std::clamp(fraction, 0.0, 1.0) * a.path.length;
        a.position = a.path.at(a.progress);
        a.walking = true;
        a.toBuilding = true;
        a.targetBuilding = dst;
        p.hidden = false;
        p.inside = -1;
        p.legPending = true;
        agents.emplace(pid, std::move(a));
    }

    Group& ensureGroupAt(int gid, double t) {
        auto it = groups.find(gid);
        if (it != groups.end()) return it->second;
        const GroupInfo& info = groupInfo.at(gid);
        Group g;
        g.id = gid;
        g.leaderId = info.leaderId;
        g.targetBuilding = info.targetBuilding;
        g.t0 = info.t0;
        g.t1 = info.t1;
        g.expected.push_back(info.leaderId);
        for (int m : info.walkers) g.expected.push_back(m);
        std::sort(g.expected.begin(), g.expected.end());
        // Leader's previous task tells us where the walk started.
        const auto& leaderAgenda = agendaOf(info.leaderId);
        int lidx = leaderAgenda.indexAt(t);
        g.sourceBuilding = homeOf(info.leaderId);
        if (lidx > 0 && leaderAgenda.tasks[lidx - 1].building >= 0)
            g.sourceBuilding = leaderAgenda.tasks[lidx - 1].building;
        g.path = graph.route(graph.buildingAnchor(g.sourceBuilding),
                             graph.buildingAnchor(info.targetBuilding));
        double speed = 1e9;
        for (int pid : g.expected) speed = std::min(speed, people.persons[pid].walkSpeed());
        g.speed = speed;
        double f = std::clamp((t - info.t0) / (info.t1 - info.t0), 0.0, 1.0);
        g.progress = f * g.path.length;
        g.moving = true;
        return groups.emplace(gid, std::move(g)).first->second;
    }

    // --- rulelang::Env ------------------------------------------------------------
    std::optional<rl::Value> lookup(const std::string& name) override {
        if (evalCtx && !evalCtx->stack.empty()) {
            const auto& vars = *evalCtx->stack.back().vars;
            auto it = vars.find(name);
            if (it != vars.end()) return it->second;
        }
        auto at = agendas.attributes.find(name);
        if (at != agendas.attributes.end()) return at->second;
        const population::Person& person = people.persons[evalFocus];
        if (name == "home") return rl::Value::makeEntity(EntityId::building(person.homeBuilding));
        if (name == "household.id") return rl::Value::makeNumber(person.household);
        if (name == "person.id") return rl::Value::makeNumber(person.id);
        if (name == "age") return rl::Value::makeNumber(person.age);
        if (name == "gender")
            return rl::Value::makeBool(person.gender == population::Gender::Female);
        return std::nullopt;
    }

    bool lazyParam(const std::string& name, std::size_t index) const override {
        return (name == "count" || name == "chooseMember") && index == 0;
    }

    rl::Value call(const std::string& name, std::vector<rl::Arg>& args,
                   rl::SourcePos pos) override {
        int pid = evalCtx ? evalCtx->personId : evalFocus;
        Rng& rng = state[pid].rng;
        if (name == "rand") {
            requireArity(name, args.size(), 2, pos);
            return rl::Value::makeNumber(
                rng.uniform(numberArg(name, args[0]), numberArg(name, args[1])));
        }
        if (name == "getDistance") {
            requireArity(name, args.size(), 2, pos);
            auto a = maybeBuilding(name, args[0]);
            auto b = maybeBuilding(name, args[1]);
            if (!a || !b) return rl::Value::invalid();
            return rl::Value::makeNumber(
                graph.distance(graph.buildingAnchor(*a), graph.buildingAnchor(*b)));
        }
        if (name == "getDistanceInTime") {
            requireArity(name, args.size(), 2, pos);
            auto a = maybeBuilding(name, args[0]);
            auto b = maybeBuilding(name, args[1]);
            if (!a || !b) return rl::Value::invalid();
            double meters = graph.distance(graph.buildingAnchor(*a), graph.buildingAnchor(*b));
            return rl::Value::makeNumber(meters / people.persons[evalFocus].walkSpeed());
        }
        if (name == "findBuilding") {
            requireArity(name, args.size(), 1, pos);
            const auto& ids = city.buildingsWithEntranceType(textArg(name, args[0]));
            if (ids.empty()) return rl::Value::invalid();
            int pick = ids[static_cast<std::size_t>(rng.uniformInt(ids.size()))];
            return rl::Value::makeEntity(EntityId::building(pick));
        }
        if (name == "findNearestBuilding") {
            requireArity(name, args.size(), 2, pos);
            std::string type = textArg(name, args[0]);
            auto ref = maybeBuilding(name, args[1]);
            if (!ref) return rl::Value::invalid();
            Vec2 from = graph.buildingAnchor(*ref);
            const auto& ids = city.buildingsWithEntranceType(type);
            int best = -1;
            double bestDist = 0.0;
            for (int id : ids) {
                double d = graph.distance(from, graph.buildingAnchor(id));
                if (best < 0 || d < bestDist) {
                    best = id;
                    bestDist = d;
                }
            }
            if (best < 0) return rl::Value::invalid();
            return rl::Value::makeEntity(EntityId::building(best));
        }
        if (name == "findObject") {
            if (args.size() != 1 && args.size() != 2)
                throw rl::EvalError("findObject expects 1 or 2 arguments", pos);
            std::string type = textArg(name, args[0]);
            // Simulation-time query: measured from the person's live position,
            // and the pick is soft-reserved so nobody else races for it.
            Vec2 from = positionOf(pid);
            std::vector<int> ids;
            if (args.size() == 2) {
                ids = city.objectsOfTypeNear(type, from, numberArg(name, args[1]));
            } else {
                for (const auto& obj : city.objects)
                    if (obj.type == type) ids.push_back(obj.id);
            }
            std::vector<int> open;
            for (int id : ids) {
                Occupancy& o = occupancyOf(id);
                if (o.holders.count(pid) || o.soft.count(pid) || o.free() > 0)
                    open.push_back(id);
            }
            if (open.empty()) return rl::Value::invalid();
            int pick = open[static_cast<std::size_t>(rng.uniformInt(open.size()))];
            Occupancy& o = occupancyOf(pick);
            if (!o.holders.count(pid) && !o.soft.count(pid)) {
                o.soft.insert(pid);
                if (evalCtx) evalCtx->touched.insert(pick);
            }
            return rl::Value::makeEntity(EntityId::object(pick));
        }
        if (name == "isValid") {
            requireArity(name, args.size(), 1, pos);
            return rl::Value::makeBool(!args[0].value.isInvalid());
        }
        if (name == "count") {
            const auto& members = people.households[people.persons[pid].household].members;
            if (args.empty()) return rl::Value::makeNumber(members.size());
            requireArity(name, args.size(), 1, pos);
            int n = 0;
            int saved = evalFocus;
            for (int m : members) {
                evalFocus = m;
                if (rl::evaluateCondition(*args[0].expr, *this)) ++n;
            }
            evalFocus = saved;
            return rl::Value::makeNumber(n);
        }
        if (name == "chooseMember") {
            requireArity(name, args.size(), 1, pos);
            const auto& members = people.households[people.persons[pid].household].members;
            std::vector<int> candidates;
            bool numeric = false;
            double best = 0.0;
            bool first = true;
            int saved = evalFocus;
            for (int m : members) {
                evalFocus = m;
                rl::Value v = rl::evaluate(*args[0].expr, *this);
                if (first) {
                    if (v.isBool()) numeric = false;
                    else if (v.isNumber()) numeric = true;
                    else {
                        evalFocus = saved;
                        throw rl::EvalError(
                            "chooseMember: predicate must be boolean or numeric, got " +
                                v.toString(),
                            pos);
                    }
                    first = false;
                }
                if (!numeric) {
                    if (v.isBool() && v.boolean) candidates.push_back(m);
                } else if (v.isNumber()) {
                    if (candidates.empty() || v.number > best) {
                        candidates.assign(1, m);
                        best = v.number;
                    } else if (v.number == best) {
                        candidates.push_back(m);
                    }
                }
            }
            evalFocus = saved;
            if (candidates.empty()) return rl::Value::invalid();
            int pick = candidates[static_cast<std::size_t>(rng.uniformInt(candidates.size()))];
            return rl::Value::makeEntity(EntityId::person(pick));
        }
        throw rl::EvalError("unknown function '" + name + "'", pos);
    }

    static void requireArity(const std::string& name, std::size_t got, std::size_t want,
                             rl::SourcePos pos) {
        if (got != want)
            throw rl::EvalError(name + " expects " + std::to_string(want) + " argument" +
                                    (want == 1 ? "" : "s") + ", got " + std::to_string(got),
                                pos);
    }

    static double numberArg(const std::string& name, const rl::Arg& arg) {
        if (!arg.value.isNumber())
            throw rl::EvalError(name + ": expected a number, got " + arg.value.toString(),
                                arg.pos);
        return arg.value.number;
    }

    static std::string textArg(const std::string& name, const rl::Arg& arg) {
        if (!arg.value.isText())
            throw rl::EvalError(name + ": expected a text value, got " + arg.value.toString(),
                                arg.pos);
        return arg.value.text;
    }

    std::optional<int> maybeBuilding(const std::string& name, const rl::Arg& arg) const {
        if (arg.value.isInvalid()) return std::nullopt;
        const rl::Value& v = arg.value;
        if (v.isEntity() && v.entity.kind == EntityKind::Building && v.entity.index >= 0 &&
            v.entity.index < static_cast<int>(city.buildings.size()))
            return v.entity.index;
        throw rl::EvalError(name + ": expected a valid building, got " + v.toString(), arg.pos);
    }

    double numberOf(const std::string& name, const rl::Expr& e) {
        rl::Value v = rl::evaluate(e, *this);
        if (!v.isNumber())
            throw rl::EvalError(name + ": expected a number, got " + v.toString(),
                                rl::SourcePos{});
        return v.number;
    }

    std::string textOf(const std::string& name, const rl::Expr& e) {
        rl::Value v = rl::evaluate(e, *this);
        if (!v.isText())
            throw rl::EvalError(name + ": expected a text value, got " + v.toString(),
                                rl::SourcePos{});
        return v.text;
    }
};

// --- World ---------------------------------------------------------------------

World::World(const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
             const population::Population& people, const agendagen::AgendaSet& agendas,
             std::uint64_t seed, IncidentLog& log, SimConfig config)
    : config_(config) {
    if (agendas.agendas.size() < people.persons.size())
        throw std::invalid_argument("sim: agendas do not cover the population");
    impl_ = std::make_unique<Impl>(city, graph, people, agendas, seed, log, *this);
    impl_->ticksPerSample = static_cast<std::uint64_t>(
        std::max(1.0, std::llround(config_.sampleInterval / config_.dt) * 1.0));
}

World::~World() = default;

void World::initialize(double t) {
    if (t < 0.0 || t >= agendagen::kDayLength)
        throw std::invalid_argument("sim: start time must be in [0, 86400)");
    impl_->initialize(t);
}

void World::step() {
    if (!impl_->initialized) throw std::logic_error("sim: step before initialize");
    ++tick_;
    for (const auto& person : impl_->people.persons) impl_->ensureTask(person.id);
    impl_->moveAgents();
    if (tick_ % impl_->ticksPerSample == 0 && impl_->sampleHook) impl_->sampleHook(*this);
}

void World::run(double until) {
    while (time() + 1e-9 < until) step();
}

void World::timeJump(double deltaT) {
    if (!impl_->initialized) throw std::logic_error("sim: timeJump before initialize");
    if (deltaT <= 0.0) throw std::invalid_argument("sim: time jump must be positive");
    double target = std::fmod(time() + deltaT, agendagen::kDayLength);
    impl_->initialize(target);
}

double World::time() const { return impl_->now(); }

PersonMode World::modeOf(int personId) const {
    const PersonState& p = impl_->state[personId];
    if (p.hidden) return PersonMode::Hidden;
    auto it = impl_->agents.find(personId);
    if (it == impl_->agents.end()) return PersonMode::Hidden;
    const Agent& a = it->second;
    if (a.interactingWith >= 0) return PersonMode::Interacting;
    if (a.groupId >= 0) {
        auto git = impl_->groups.find(a.groupId);
        if (git != impl_->groups.end() && !git->second.done) return PersonMode::Grouped;
    }
    return a.walking ? PersonMode::Walking : PersonMode::Idle;
}

int World::insideBuilding(int personId) const {
    const PersonState& p = impl_->state[personId];
    return p.hidden ? p.inside : -1;
}

const Agent* World::agentOf(int personId) const {
    auto it = impl_->agents.find(personId);
    return it == impl_->agents.end() ? nullptr : &it->second;
}

void World::forEachAgent(const std::function<void(const Agent&)>& fn) const {
    for (const auto& [pid, agent] : impl_->agents) fn(agent);
}

std::size_t World::agentCount() const { return impl_->agents.size(); }

int World::occupants(int objectId) const {
    auto it = impl_->occupancy.find(objectId);
    return it == impl_->occupancy.end() ? 0 : static_cast<int>(it->second.holders.size());
}

int World::reservations(int objectId) const {
    auto it = impl_->occupancy.find(objectId);
    return it == impl_->occupancy.end() ? 0 : static_cast<int>(it->second.soft.size());
}

const std::vector<agendagen::FloatingTaskEntry>& World::poolOf(int personId) const {
    return impl_->pools[personId];
}

const agendagen::AgendaTask* World::currentTask(int personId) const {
    return impl_->taskOf(personId);
}

void World::setSampleHook(std::function<void(const World&)> hook) {
    impl_->sampleHook = std::move(hook);
}

// --- random baseline --------------------------------------------------------------

std::vector<Event> runRandomBaseline(const citygen::SemanticCity& city,
                                     const navgraph::NavGraph& graph,
                                     const population::Population& people, std::uint64_t seed,
                                     double from, double until) {
    std::vector<Event> events;
    if (city.buildings.empty()) return events;
    auto n = city.buildings.size();
    for (const auto& person : people.persons)
        events.push_back({Event::Kind::Enter, from, person.id, person.homeBuilding});
    for (const auto& person : people.persons) {
        Rng rng = Rng::substream(seed, 0xBA5E0000ull + static_cast<std::uint64_t>(person.id));
        double t = from + rng.uniform(0.0, 3600.0);
        while (t < until) {
            int src = static_cast<int>(rng.uniformInt(n));
            int dst = static_cast<int>(rng.uniformInt(n));
            events.push_back({Event::Kind::Exit, t, person.id, src});
            double meters =
                graph.distance(graph.buildingAnchor(src), graph.buildingAnchor(dst));
            double arrive = t + meters / person.walkSpeed();
            if (arrive >= until) break;
            events.push_back({Event::Kind::Enter, arrive, person.id, dst});
            t = arrive + rng.uniform(600.0, 7200.0);
        }
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.personId < b.personId;
    });
    return events;
}

}  // namespace crowdforge::sim
