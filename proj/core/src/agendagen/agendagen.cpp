#include "crowdforge/agendagen/agendagen.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdforge/common/rng.hpp"
#include "crowdforge/common/timefmt.hpp"
#include "crowdforge/rulelang/eval.hpp"

namespace crowdforge::agendagen {

namespace rl = rulelang;

namespace {

struct HouseholdAbort {
    std::string reason;
};

// Local execution state of one rule application. Cloned on every rule call,
// so child-rule mutations of focus and variables never leak to the caller.
struct Ctx {
    int focus = -1;  // focused person id, -1 = none
    std::map<std::string, rl::Value> vars;
};

class HouseholdInterpreter : rl::Env {
  public:
    HouseholdInterpreter(const rl::RuleFile& rules, const std::map<std::string, rl::Value>& attrs,
                         const population::Population& pop, const citygen::SemanticCity& city,
                         const navgraph::NavGraph& graph, int householdId, Rng rng,
                         IncidentLog& log, const GenOptions& options, AgendaSet& out)
        : rules_(rules),
          attrs_(attrs),
          pop_(pop),
          city_(city),
          graph_(graph),
          household_(pop.households[householdId]),
          rng_(rng),
          log_(log),
          options_(options),
          out_(out) {}

    // Applies the start rule. On error, this household's output is rolled
    // back to empty (finalization later fills all-day stay-at-home).
    // Returns the number of accompany groups created.
    int run() {
        const rl::Rule* start = rules_.findRule(rules_.startRule);
        try {
            Ctx root;
            applyRule(*start, root, 0);
        } catch (const HouseholdAbort& abort) {
            rollback();
            log_.error("agendagen",
                       "household " + std::to_string(household_.id) + ": " + abort.reason);
            return 0;
        } catch (const std::runtime_error& err) {
            rollback();
            log_.error("agendagen",
                       "household " + std::to_string(household_.id) + ": " + err.what());
            return 0;
        }
        return groupNext_;
    }

  private:
    // --- rulelang::Env --------------------------------------------------
    std::optional<rl::Value> lookup(const std::string& name) override {
        auto it = cur_->vars.find(name);
        if (it != cur_->vars.end()) return it->second;
        auto at = attrs_.find(name);
        if (at != attrs_.end()) return at->second;
        if (name == "home") return rl::Value::makeEntity(EntityId::building(household_.homeBuilding));
        if (name == "household.id") return rl::Value::makeNumber(household_.id);
        if (name == "person.id") return rl::Value::makeNumber(cur_->focus);
        if (name == "age") {
            return rl::Value::makeNumber(focused("age").age);
        }
        if (name == "gender") {
            return rl::Value::makeBool(focused("gender").gender == population::Gender::Female);
        }
        return std::nullopt;
    }

    bool lazyParam(const std::string& name, std::size_t index) const override {
        return (name == "count" || name == "chooseMember") && index == 0;
    }

    rl::Value call(const std::string& name, std::vector<rl::Arg>& args,
                   rl::SourcePos pos) override {
        if (name == "rand") {
            requireArity(name, args.size(), 2, pos);
            return rl::Value::makeNumber(
                rng_.uniform(numberArg(name, args[0]), numberArg(name, args[1])));
        }
        if (name == "getDistance") {
            requireArity(name, args.size(), 2, pos);
            auto a = maybeBuilding(name, args[0]);
            auto b = maybeBuilding(name, args[1]);
            if (!a || !b) return rl::Value::invalid();
            return rl::Value::makeNumber(
                graph_.distance(graph_.buildingAnchor(*a), graph_.buildingAnchor(*b)));
        }
        if (name == "getDistanceInTime") {
            requireArity(name, args.size(), 2, pos);
            const auto& person = focused("getDistanceInTime");
            auto a = maybeBuilding(name, args[0]);
            auto b = maybeBuilding(name, args[1]);
            if (!a || !b) return rl::Value::invalid();
            double meters =
                graph_.distance(graph_.buildingAnchor(*a), graph_.buildingAnchor(*b));
            return rl::Value::makeNumber(meters / person.walkSpeed());
        }
        if (name == "findBuilding") {
            requireArity(name, args.size(), 1, pos);
            const auto& ids = city_.buildingsWithEntranceType(textArg(name, args[0]));
            if (ids.empty()) return rl::Value::invalid();
            int pick = ids[static_cast<std::size_t>(rng_.uniformInt(ids.size()))];
            return rl::Value::makeEntity(EntityId::building(pick));
        }
        if (name == "findNearestBuilding") {
            requireArity(name, args.size(), 2, pos);
            std::string type = textArg(name, args[0]);
            auto ref = maybeBuilding(name, args[1]);
            if (!ref) return rl::Value::invalid();
            Vec2 from = graph_.buildingAnchor(*ref);
            const auto& ids = city_.buildingsWithEntranceType(type);
            int best = -1;
            double bestDist = 0.0;
            for (int id : ids) {  // ascending ids: strict < keeps the smallest
                double d = graph_.distance(from, graph_.buildingAnchor(id));
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
            // Generation-time query: measured from the home entrance, and no
            // reservation is made (occupancy exists only at simulation time).
            Vec2 from = city_.buildings[household_.homeBuilding].primaryEntrance().position;
            std::vector<int> ids;
            if (args.size() == 2) {
                ids = city_.objectsOfTypeNear(type, from, numberArg(name, args[1]));
            } else {
                for (const auto& obj : city_.objects)
                    if (obj.type == type) ids.push_back(obj.id);
            }
            if (ids.empty()) return rl::Value::invalid();
            int pick = ids[static_cast<std::size_t>(rng_.uniformInt(ids.size()))];
            return rl::Value::makeEntity(EntityId::object(pick));
        }
        if (name == "isValid") {
            requireArity(name, args.size(), 1, pos);
            return rl::Value::makeBool(!args[0].value.isInvalid());
        }
        if (name == "count") {
            if (args.empty()) return rl::Value::makeNumber(household_.members.size());
            requireArity(name, args.size(), 1, pos);
            int n = 0;
            for (int m : household_.members) {
                FocusGuard guard(*cur_, m);
                if (rl::evaluateCondition(*args[0].expr, *this)) ++n;
            }
            return rl::Value::makeNumber(n);
        }
        if (name == "chooseMember") {
            requireArity(name, args.size(), 1, pos);
            return chooseMember(*args[0].expr, pos);
        }
        throw rl::EvalError("unknown function '" + name + "'", pos);
    }

    // --- helpers ----------------------------------------------------------
    struct FocusGuard {
        Ctx& ctx;
        int saved;
        FocusGuard(Ctx& c, int focus) : ctx(c), saved(c.focus) { ctx.focus = focus; }
        ~FocusGuard() { ctx.focus = saved; }
    };

    const population::Person& focused(const std::string& who) const {
        if (cur_->focus < 0)
            throw rl::EvalError(who + " requires a focused person", rl::SourcePos{});
        return pop_.persons[cur_->focus];
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

    // Building-id extraction where Invalid flows through as "no result".
    std::optional<int> maybeBuilding(const std::string& name, const rl::Arg& arg) const {
        if (arg.value.isInvalid()) return std::nullopt;
        return requireBuilding(name, arg.value, arg.pos);
    }

    int requireBuilding(const std::string& name, const rl::Value& v, rl::SourcePos pos) const {
        if (v.isEntity() && v.entity.kind == EntityKind::Building && v.entity.index >= 0 &&
            v.entity.index < static_cast<int>(city_.buildings.size()))
            return v.entity.index;
        throw rl::EvalError(name + ": expected a valid building, got " + v.toString(), pos);
    }

    rl::Value chooseMember(const rl::Expr& predicate, rl::SourcePos pos) {
        std::vector<int> candidates;
        bool numeric = false;
        double best = 0.0;
        bool first = true;
        for (int m : household_.members) {
            FocusGuard guard(*cur_, m);
            rl::Value v = rl::evaluate(predicate, *this);
            if (first) {
                if (v.isBool()) numeric = false;
                else if (v.isNumber()) numeric = true;
                else
                    throw rl::EvalError(
                        "chooseMember: predicate must be boolean or numeric, got " + v.toString(),
                        pos);
                first = false;
            }
            if (!numeric) {
                if (!v.isBool())
                    throw rl::EvalError("chooseMember: predicate type changed across members",
                                        pos);
                if (v.boolean) candidates.push_back(m);
            } else {
                if (!v.isNumber())
                    throw rl::EvalError("chooseMember: predicate type changed across members",
                                        pos);
                if (candidates.empty() || v.number > best) {
                    candidates.assign(1, m);
                    best = v.number;
                } else if (v.number == best) {
                    candidates.push_back(m);
                }
            }
        }
        if (candidates.empty()) return rl::Value::invalid();
        int pick = candidates[static_cast<std::size_t>(rng_.uniformInt(candidates.size()))];
        return rl::Value::makeEntity(EntityId::person(pick));
    }

    [[noreturn]] void ruleError(const std::string& msg, rl::SourcePos pos) const {
        throw rl::EvalError(msg, pos);
    }

    void warnSkip(const rl::SuccessorItem& it, const std::string& why) {
        log_.warn("agendagen", "household " + std::to_string(household_.id) + ": " + it.name +
                                   " at " + rl::toString(it.pos) + " skipped: " + why);
    }

    Agenda& agendaOf(int person) { return out_.agendas[person]; }

    // --- rule application -------------------------------------------------
    void applyRule(const rl::Rule& rule, Ctx ctx, int depth) {
        if (depth > options_.maxDepth)
            throw HouseholdAbort{"recursion depth over " + std::to_string(options_.maxDepth) +
                                 " in rule '" + rule.name + "'"};
        Ctx* saved = cur_;
        cur_ = &ctx;
        try {
            execItems(rule.successor, depth);
        } catch (...) {
            cur_ = saved;
            throw;
        }
        cur_ = saved;
    }

    void execItems(const std::vector<rl::SuccessorItem>& items, int depth) {
        bool guardSeen = false, guardTaken = false, skipping = false;
        for (const auto& it : items) {
            if (it.kind == rl::SuccessorItem::Kind::CaseGuard) {
                if (guardTaken) {
                    skipping = true;
                } else {
                    guardTaken = rl::evaluateCondition(*it.condition, *this);
                    skipping = !guardTaken;
                }
                guardSeen = true;
                continue;
            }
            if (it.kind == rl::SuccessorItem::Kind::ElseGuard) {
                if (!guardSeen) ruleError("else without case", it.pos);
                skipping = guardTaken;
                guardTaken = true;
                continue;
            }
            if (guardSeen && skipping) continue;
            if (it.kind == rl::SuccessorItem::Kind::Group) {
                // Agenda rules have no scope; brackets only delimit guards.
                execItems(it.items, depth);
                continue;
            }
            execCall(it, depth);
        }
    }

    void execCall(const rl::SuccessorItem& it, int depth) {
        const std::string& op = it.name;
        if (op == "NIL") return;
        if (op == "members") {
            opMembers(it, depth);
            return;
        }
        if (op == "stayInside") {
            opInsertTask(it, TaskKind::StayInside);
            return;
        }
        if (op == "goToBuilding") {
            opInsertTask(it, TaskKind::GoToBuilding);
            return;
        }
        if (op == "delayedRule") {
            opDelayedRule(it);
            return;
        }
        if (op == "floatingSlot") {
            opFloatingSlot(it);
            return;
        }
        if (op == "floatingTask") {
            opFloatingTask(it);
            return;
        }
        if (op == "accompany") {
            opAccompany(it);
            return;
        }
        if (op == "set") {
            opSet(it);
            return;
        }
        if (op == "wait" || op == "goToZone" || op == "goToObject" || op == "interact" ||
            op == "waitUntilNextTask") {
            // Simulation-time operation; meaningful only inside a delayed or
            // floating rule run by the simulation.
            warnSkip(it, "simulation-time operation ignored during generation");
            return;
        }
        const rl::Rule* rule = rules_.findRule(op);
        if (!rule) ruleError("unknown rule or operation '" + op + "'", it.pos);
        if (it.hasBlock) ruleError("rule call '" + op + "' does not take a selector block", it.pos);
        if (rule->params.size() != it.args.size())
            ruleError("rule '" + op + "' expects " + std::to_string(rule->params.size()) +
                          " argument(s), got " + std::to_string(it.args.size()),
                      it.pos);
        Ctx child = *cur_;
        for (std::size_t i = 0; i < it.args.size(); ++i)
            child.vars[rule->params[i]] = rl::evaluate(*it.args[i], *this);
        applyRule(*rule, std::move(child), depth + 1);
    }

    // --- operations ---------------------------------------------------------
    void opMembers(const rl::SuccessorItem& it, int depth) {
        if (!it.args.empty()) ruleError("members takes no arguments", it.pos);
        if (!it.hasBlock) ruleError("members expects a selector block", it.pos);
        // chooseMember(...) selectors are drawn once per members execution;
        // the cache pins the chosen person for the remaining members.
        std::map<std::size_t, rl::Value> entityCache;
        for (int m : household_.members) {
            for (std::size_t ci = 0; ci < it.block.size(); ++ci) {
                const auto& layer = it.block[ci];
                if (layer.relative) ruleError("unexpected '~' in members block", it.pos);
                rl::Value sel;
                auto cached = entityCache.find(ci);
                if (cached != entityCache.end()) {
                    sel = cached->second;
                } else {
                    FocusGuard guard(*cur_, m);
                    sel = rl::evaluate(*layer.selector, *this);
                    if (sel.isEntity()) entityCache.emplace(ci, sel);
                }
                bool match = false;
                if (sel.isBool()) {
                    match = sel.boolean;
                } else if (sel.isEntity()) {
                    if (sel.entity.kind != EntityKind::Person)
                        ruleError("members selector must be boolean or a person", it.pos);
                    match = sel.entity.index == m;
                } else if (sel.isInvalid()) {
                    match = false;
                } else {
                    ruleError("members selector must be boolean or a person, got " +
                                  std::string(sel.kindName()),
                              it.pos);
                }
                if (match) {
                    FocusGuard guard(*cur_, m);
                    execItems(layer.items, depth);
                    break;  // first matching entry only
                }
            }
        }
    }

    // Window checks shared by the agenda-writing operations. Returns false
    // when the (clamped) window is empty and the op should be skipped.
    bool normalizeWindow(const rl::SuccessorItem& it, double& t0, double& t1, bool zeroIsError) {
        if (t1 < t0)
            ruleError(it.name + ": negative duration (" + formatHMS(t0) + " > " + formatHMS(t1) +
                          ")",
                      it.pos);
        if (t1 == t0) {
            if (zeroIsError) ruleError(it.name + ": zero duration at " + formatHMS(t0), it.pos);
            return false;  // goToBuilding: degenerate instant arrival
        }
        double c0 = std::max(0.0, t0);
        double c1 = std::min(kDayLength, t1);
        if (c0 != t0 || c1 != t1)
            warnSkip(it, "window [" + formatHMS(t0) + ", " + formatHMS(t1) +
                             ") clamped to the day");
        if (c1 <= c0) return false;
        t0 = c0;
        t1 = c1;
        return true;
    }

    void opInsertTask(const rl::SuccessorItem& it, TaskKind kind) {
        requireArity(it.name, it.args.size(), 3, it.pos);
        if (cur_->focus < 0) {
            warnSkip(it, "no focused person");
            return;
        }
        double t0 = rl::evaluateNumber(*it.args[0], *this);
        double t1 = rl::evaluateNumber(*it.args[1], *this);
        rl::Value bv = rl::evaluate(*it.args[2], *this);
        int building = requireBuilding(it.name, bv, it.pos);
        if (!normalizeWindow(it, t0, t1, kind == TaskKind::StayInside)) return;
        AgendaTask task;
        task.t0 = t0;
        task.t1 = t1;
        task.kind = kind;
        task.building = building;
        agendaOf(cur_->focus).insert(std::move(task));
    }

    // A bare identifier argument (rule names, set targets).
    std::string identArg(const rl::SuccessorItem& it, std::size_t index) {
        const rl::Expr& e = *it.args[index];
        if (e.kind != rl::Expr::Kind::Var)
            ruleError(it.name + ": argument " + std::to_string(index + 1) +
                          " must be an identifier",
                      it.pos);
        return e.text;
    }

    const rl::Rule* requireRule(const rl::SuccessorItem& it, const std::string& name) {
        const rl::Rule* rule = rules_.findRule(name);
        if (!rule) ruleError(it.name + ": unknown rule '" + name + "'", it.pos);
        return rule;
    }

    void opDelayedRule(const rl::SuccessorItem& it) {
        requireArity(it.name, it.args.size(), 3, it.pos);
        if (cur_->focus < 0) {
            warnSkip(it, "no focused person");
            return;
        }
        double t0 = rl::evaluateNumber(*it.args[0], *this);
        double t1 = rl::evaluateNumber(*it.args[1], *this);
        std::string ruleName = identArg(it, 2);
        requireRule(it, ruleName);
        if (!normalizeWindow(it, t0, t1, true)) return;
        AgendaTask task;
        task.t0 = t0;
        task.t1 = t1;
        task.kind = TaskKind::DelayedRule;
        task.ruleName = ruleName;
        task.vars = cur_->vars;  // by-value snapshot
        agendaOf(cur_->focus).insert(std::move(task));
    }

    void opFloatingSlot(const rl::SuccessorItem& it) {
        requireArity(it.name, it.args.size(), 2, it.pos);
        if (cur_->focus < 0) {
            warnSkip(it, "no focused person");
            return;
        }
        double t0 = rl::evaluateNumber(*it.args[0], *this);
        double t1 = rl::evaluateNumber(*it.args[1], *this);
        if (!normalizeWindow(it, t0, t1, true)) return;
        AgendaTask task;
        task.t0 = t0;
        task.t1 = t1;
        task.kind = TaskKind::FloatingSlot;
        agendaOf(cur_->focus).insert(std::move(task));
    }

    void opFloatingTask(const rl::SuccessorItem& it) {
        if (it.args.size() != 2 && it.args.size() != 3)
            ruleError("floatingTask expects 2 or 3 arguments", it.pos);
        if (cur_->focus < 0) {
            warnSkip(it, "no focused person");
            return;
        }
        double duration = rl::evaluateNumber(*it.args[0], *this);
        if (duration <= 0) ruleError("floatingTask: duration must be positive", it.pos);
        std::string ruleName = identArg(it, 1);
        requireRule(it, ruleName);
        double priority =
            it.args.size() == 3 ? rl::evaluateNumber(*it.args[2], *this) : 0.0;
        FloatingTaskEntry entry;
        entry.ownerPersonId = cur_->focus;
        entry.maxDuration = duration;
        entry.ruleName = ruleName;
        entry.priority = priority;
        entry.vars = cur_->vars;
        out_.pools[cur_->focus].push_back(std::move(entry));
    }

    void opAccompany(const rl::SuccessorItem& it) {
        requireArity(it.name, it.args.size(), 2, it.pos);
        if (cur_->focus < 0) {
            warnSkip(it, "no focused person");
            return;
        }
        int leader = cur_->focus;
        double time = rl::evaluateNumber(*it.args[0], *this);
        std::vector<int> matched;
        for (int m : household_.members) {
            if (m == leader) continue;
            FocusGuard guard(*cur_, m);
            if (rl::evaluateCondition(*it.args[1], *this)) matched.push_back(m);
        }
        if (matched.empty()) {
            warnSkip(it, "no household member matches the condition");
            return;
        }
        // Goal and window come from the first matching member's upcoming
        // walk: its first GoToBuilding entry still under way at `time`.
        const AgendaTask* probe = nullptr;
        for (int m : matched) {
            for (const auto& task : agendaOf(m).tasks) {
                if (task.kind == TaskKind::GoToBuilding && task.t1 > time) {
                    probe = &task;
                    break;
                }
            }
            if (probe) break;
        }
        if (!probe) {
            warnSkip(it, "no matching member has a walk at or after " + formatHMS(time));
            return;
        }
        int target = probe->building;
        double w0 = probe->t0;
        double w1 = probe->t1;
        int gid = groupNext_;
        std::vector<int> joined;
        for (int m : matched) {
            for (auto& task : agendaOf(m).tasks) {
                if (task.kind != TaskKind::GoToBuilding || task.building != target ||
                    task.t0 != w0 || task.t1 != w1)
                    continue;
                if (task.groupId != -1) break;  // already part of another group
                task.groupId = gid;
                joined.push_back(m);
                break;
            }
        }
        if (joined.empty()) {
            warnSkip(it, "matching walks are already grouped");
            return;
        }
        ++groupNext_;
        AgendaTask task;
        task.t0 = w0;
        task.t1 = w1;
        task.kind = TaskKind::GroupAccompany;
        task.building = target;
        task.groupId = gid;
        task.leaderId = leader;
        task.memberIds = std::move(joined);
        agendaOf(leader).insert(std::move(task));
    }

    void opSet(const rl::SuccessorItem& it) {
        requireArity(it.name, it.args.size(), 2, it.pos);
        std::string name = identArg(it, 0);
        cur_->vars[name] = rl::evaluate(*it.args[1], *this);
    }

    void rollback() {
        for (int m : household_.members) {
            out_.agendas[m].tasks.clear();
            out_.pools[m].clear();
        }
    }

    const rl::RuleFile& rules_;
    const std::map<std::string, rl::Value>& attrs_;
    const population::Population& pop_;
    const citygen::SemanticCity& city_;
    const navgraph::NavGraph& graph_;
    const population::Household& household_;
    Rng rng_;  // one stream per household, shared by all context clones
    IncidentLog& log_;
    const GenOptions& options_;
    AgendaSet& out_;
    Ctx* cur_ = nullptr;
    int groupNext_ = 0;  // household-local; renumbered globally by the caller
};

}  // namespace

AgendaSet generateAllAgendas(const rl::RuleFile& rules, const population::Population& pop,
                             const citygen::SemanticCity& city, const navgraph::NavGraph& graph,
                             std::uint64_t seed, IncidentLog& incidents,
                             const GenOptions& options) {
    if (rules.startRule.empty() || !rules.findRule(rules.startRule))
        throw std::runtime_error("agendagen: rule file has no usable @StartRule");

    AgendaSet set;
    set.seed = seed;
    set.rules = rules;
    set.agendas.resize(pop.persons.size());
    set.pools.resize(pop.persons.size());
    for (std::size_t p = 0; p < pop.persons.size(); ++p)
        set.agendas[p].ownerPersonId = static_cast<int>(p);

    // Attributes are evaluated once, against a dedicated substream.
    {
        struct AttrEnv : rl::Env {
            std::map<std::string, rl::Value>& attrs;
            Rng rng;
            AttrEnv(std::map<std::string, rl::Value>& a, Rng r) : attrs(a), rng(r) {}
            std::optional<rl::Value> lookup(const std::string& name) override {
                auto it = attrs.find(name);
                if (it == attrs.end()) return std::nullopt;
                return it->second;
            }
            rl::Value call(const std::string& name, std::vector<rl::Arg>& args,
                           rl::SourcePos pos) override {
                if (name == "rand" && args.size() == 2)
                    return rl::Value::makeNumber(
                        rng.uniform(args[0].value.number, args[1].value.number));
                throw rl::EvalError("unknown function '" + name + "'", pos);
            }
        } env{set.attributes, Rng::substream(seed, 0x17a9u)};
        for (const auto& a : rules.attributes) set.attributes[a.name] = rl::evaluate(*a.value, env);
    }

    for (const auto& household : pop.households) {
        HouseholdInterpreter interp(rules, set.attributes, pop, city, graph, household.id,
                                    Rng::substream(seed, static_cast<std::uint64_t>(household.id)),
                                    incidents, options, set);
        int localGroups = interp.run();
        if (localGroups > 0) {
            // Group ids are household-local during the run; shift them into
            // the global sequence so ids are unique and order-independent.
            for (int m : household.members)
                for (auto& task : set.agendas[m].tasks)
                    if (task.groupId >= 0) task.groupId += set.groupCount;
            set.groupCount += localGroups;
        }
    }

    for (const auto& person : pop.persons) set.agendas[person.id].finalize(person.homeBuilding);
    return set;
}

}  // namespace crowdforge::agendagen
