#include "crowdforge/citygen/interpreter.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "crowdforge/common/rng.hpp"
#include "crowdforge/rulelang/eval.hpp"

namespace crowdforge::citygen {

namespace rl = rulelang;

namespace {

constexpr double kEps = 1e-9;

struct LotAbort {
    std::string reason;
};

[[noreturn]] void ruleError(const std::string& msg, rl::SourcePos pos) {
    throw std::runtime_error("city rules " + rl::toString(pos) + ": " + msg);
}

// Current shape under expansion; copied on every spawn so child mutations
// stay local.
struct Shape {
    Scope scope;
    Vec3 color{0.8, 0.8, 0.8};
    int objectInstance = -1;
    bool consumed = false;
    int children = 0;
};

class LotInterpreter : rl::Env {
  public:
    LotInterpreter(const rl::RuleFile& rules, const std::map<std::string, rl::Value>& attrs,
                   const LotFootprint& lot, std::uint64_t seed, IncidentLog& log,
                   const CityGenOptions& options, SemanticCity& city)
        : rules_(rules),
          attrs_(attrs),
          lot_(lot),
          rng_(Rng::substream(seed, static_cast<std::uint64_t>(lot.id))),
          log_(log),
          options_(options),
          city_(city) {}

    void run() {
        const rl::Rule* start = rules_.findRule(rules_.startRule);
        if (!start) throw std::runtime_error("city rules: no start rule");
        Shape shape;
        shape.scope = scopeFromRect(lot_.rect, lot_.frontDir);
        std::size_t firstLeaf = city_.leaves.size();
        std::size_t firstObject = city_.objects.size();
        std::size_t firstZone = city_.zones.size();
        try {
            applyRule(*start, {}, shape, 0);
        } catch (const LotAbort& abort) {
            // Roll back partial output of this lot.
            city_.leaves.resize(firstLeaf);
            city_.objects.resize(firstObject);
            city_.zones.resize(firstZone);
            entrances_.clear();
            log_.error("citygen", "lot " + std::to_string(lot_.id) + ": " + abort.reason);
            return;
        }
        if (!entrances_.empty()) {
            Building b;
            b.lotId = lot_.id;
            b.entrances = std::move(entrances_);
            city_.buildings.push_back(std::move(b));
        }
    }

  private:
    // --- rulelang::Env --------------------------------------------------
    std::optional<rl::Value> lookup(const std::string& name) override {
        if (!params_.empty()) {
            auto it = params_.back().find(name);
            if (it != params_.back().end()) return it->second;
        }
        auto at = attrs_.find(name);
        if (at != attrs_.end()) return at->second;
        if (name == "lot.id") return rl::Value::makeNumber(lot_.id);
        if (name == "lot.blockX") return rl::Value::makeNumber(lot_.blockX);
        if (name == "lot.blockY") return rl::Value::makeNumber(lot_.blockY);
        if (name == "lot.width") return rl::Value::makeNumber(lot_.rect.width());
        if (name == "lot.depth") return rl::Value::makeNumber(lot_.rect.depth());
        return std::nullopt;
    }

    rl::Value call(const std::string& name, std::vector<rl::Arg>& args,
                   rl::SourcePos pos) override {
        if (name == "rand") {
            if (args.size() != 2) ruleError("rand expects 2 arguments", pos);
            return rl::Value::makeNumber(rng_.uniform(args[0].value.number, args[1].value.number));
        }
        throw rl::EvalError("unknown function '" + name + "'", pos);
    }

    // --- expansion ------------------------------------------------------
    void applyRule(const rl::Rule& rule, std::map<std::string, rl::Value> args, Shape shape,
                   int depth) {
        if (depth > options_.maxDepth)
            throw LotAbort{"recursion depth over " + std::to_string(options_.maxDepth) +
                           " in rule '" + rule.name + "'"};
        auto tag = rule.objectTag();
        if (tag) {
            if (tag->empty()) ruleError("@Object tag must not be empty", rule.pos);
            CityObject obj;
            obj.id = static_cast<int>(city_.objects.size());
            obj.lotId = lot_.id;
            obj.type = *tag;
            obj.interactions = *tag == "bench" ? std::vector<std::string>{"sit"}
                                               : std::vector<std::string>{"use"};
            obj.capacity = city_.config.objectCapacity;
            city_.objects.push_back(obj);
            shape.objectInstance = obj.id;
        }
        params_.push_back(std::move(args));
        runShape(rule.successor, shape, depth);
        params_.pop_back();
    }

    // Runs successor items over a shape; emits a leaf when nothing consumed
    // or spawned from it.
    void runShape(const std::vector<rl::SuccessorItem>& items, Shape shape, int depth) {
        execItems(items, shape, depth);
        if (!shape.consumed && shape.children == 0) {
            LeafShape leaf;
            leaf.lotId = lot_.id;
            leaf.objectId = shape.objectInstance;
            leaf.scope = shape.scope;
            leaf.color = shape.color;
            city_.leaves.push_back(leaf);
        }
    }

    void execItems(const std::vector<rl::SuccessorItem>& items, Shape& shape, int depth) {
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
            if (shape.consumed) {
                log_.warn("citygen", "lot " + std::to_string(lot_.id) + ": item after the shape "
                          "was consumed at " + rl::toString(it.pos) + "; ignored");
                return;
            }
            if (it.kind == rl::SuccessorItem::Kind::Group) {
                Scope savedScope = shape.scope;
                Vec3 savedColor = shape.color;
                bool savedConsumed = shape.consumed;
                execItems(it.items, shape, depth);
                shape.scope = savedScope;
                shape.color = savedColor;
                shape.consumed = savedConsumed;
                continue;
            }
            execCall(it, shape, depth);
        }
    }

    void execCall(const rl::SuccessorItem& it, Shape& shape, int depth) {
        const std::string& op = it.name;
        if (op == "NIL") {
            shape.consumed = true;
        } else if (op == "split") {
            opSplit(it, shape, depth);
        } else if (op == "comp") {
            opComp(it, shape, depth);
        } else if (op == "extrude") {
            needArgs(it, 1);
            opExtrude(evalNumber(it.args[0]), shape, it.pos);
        } else if (op == "t") {
            needArgs(it, 3);
            opTranslate(it, shape);
        } else if (op == "color") {
            needArgs(it, 3);
            shape.color = {std::clamp(evalNumber(it.args[0]), 0.0, 1.0),
                           std::clamp(evalNumber(it.args[1]), 0.0, 1.0),
                           std::clamp(evalNumber(it.args[2]), 0.0, 1.0)};
        } else if (op == "entrance") {
            needArgs(it, 1);
            rl::Value v = rl::evaluate(*it.args[0], *this);
            if (!v.isText() || v.text.empty())
                ruleError("entrance expects a non-empty type string", it.pos);
            entrances_.push_back({v.text, shape.scope.origin.ground()});
        } else if (op == "zone") {
            needArgs(it, 1);
            rl::Value v = rl::evaluate(*it.args[0], *this);
            if (!v.isText() || v.text.empty())
                ruleError("zone expects a non-empty type string", it.pos);
            Zone z;
            z.lotId = lot_.id;
            z.type = v.text;
            z.volume = shape.scope;
            int n = z.volume.normalAxis();
            if (n >= 0) z.volume.setExtent(n, city_.config.zoneHeight);
            city_.zones.push_back(std::move(z));
        } else if (const rl::Rule* rule = rules_.findRule(op)) {
            if (it.hasBlock) ruleError("rule call does not take a selector block", it.pos);
            if (it.args.size() != rule->params.size())
                ruleError("rule '" + op + "' expects " + std::to_string(rule->params.size()) +
                              " arguments, got " + std::to_string(it.args.size()),
                          it.pos);
            std::map<std::string, rl::Value> bound;
            for (std::size_t i = 0; i < it.args.size(); ++i)
                bound[rule->params[i]] = rl::evaluate(*it.args[i], *this);
            Shape child = shape;
            child.consumed = false;
            child.children = 0;
            ++shape.children;
            applyRule(*rule, std::move(bound), child, depth + 1);
        } else {
            ruleError("unknown rule or operation '" + op + "'", it.pos);
        }
    }

    void needArgs(const rl::SuccessorItem& it, std::size_t n) {
        if (it.args.size() != n)
            ruleError(it.name + " expects " + std::to_string(n) + " arguments", it.pos);
    }

    double evalNumber(const rl::ExprPtr& e) { return rl::evaluateNumber(*e, *this); }

    static int axisIndex(const rl::ExprPtr& e) {
        if (e->kind == rl::Expr::Kind::Var) {
            if (e->text == "x") return 0;
            if (e->text == "y") return 1;
            if (e->text == "z") return 2;
        }
        ruleError("expected split axis x, y or z", e->pos);
    }

    void opExtrude(double h, Shape& shape, rl::SourcePos pos) {
        int n = shape.scope.normalAxis();
        if (n < 0) ruleError("extrude requires a 2D scope", pos);
        if (h >= 0) {
            shape.scope.setExtent(n, h);
        } else {
            shape.scope.origin = shape.scope.origin + shape.scope.axis(n) * h;
            shape.scope.setExtent(n, -h);
        }
    }

    void opTranslate(const rl::SuccessorItem& it, Shape& shape) {
        Vec3 d;
        for (int i = 0; i < 3; ++i) {
            const rl::Expr& arg = *it.args[i];
            double v;
            if (arg.kind == rl::Expr::Kind::Unary && arg.unOp == rl::UnOp::Rel) {
                v = rl::evaluateNumber(*arg.args[0], *this) * shape.scope.extent(i);
            } else {
                v = rl::evaluateNumber(arg, *this);
            }
            if (i == 0) d = d + shape.scope.ax * v;
            else if (i == 1) d = d + shape.scope.ay * v;
            else d = d + shape.scope.az * v;
        }
        shape.scope.origin = shape.scope.origin + d;
    }

    void opSplit(const rl::SuccessorItem& it, Shape& shape, int depth) {
        needArgs(it, 1);
        if (!it.hasBlock) ruleError("split requires a selector block", it.pos);
        int axis = axisIndex(it.args[0]);
        double extent = shape.scope.extent(axis);
        shape.consumed = true;
        if (extent <= kEps) {
            log_.warn("citygen", "lot " + std::to_string(lot_.id) +
                                     ": split along a zero-extent axis at " + rl::toString(it.pos));
            return;
        }

        struct Part {
            double size;
            bool relative;
            const std::vector<rl::SuccessorItem>* items;
        };
        std::vector<Part> parts;
        for (const auto& c : it.block) {
            double v = rl::evaluateNumber(*c.selector, *this);
            if (v < 0) ruleError("split size must be non-negative", c.selector->pos);
            parts.push_back({v, c.relative, &c.items});
        }

        std::vector<std::pair<double, const std::vector<rl::SuccessorItem>*>> slices;
        if (it.repeats) {
            double pattern = 0;
            for (const auto& p : parts) pattern += p.size;
            if (pattern <= kEps) ruleError("repeat split with zero pattern size", it.pos);
            int n = std::max(1, static_cast<int>(std::llround(extent / pattern)));
            double scale = extent / (n * pattern);
            for (int rep = 0; rep < n; ++rep)
                for (const auto& p : parts) slices.push_back({p.size * scale, p.items});
        } else {
            double absSum = 0, relSum = 0;
            for (const auto& p : parts) (p.relative ? relSum : absSum) += p.size;
            double absScale = 1.0;
            if (absSum > extent + 1e-9) {
                absScale = extent / absSum;
                log_.warn("citygen", "lot " + std::to_string(lot_.id) +
                                         ": absolute split sizes exceed extent at " +
                                         rl::toString(it.pos) + "; scaled to fit");
            }
            double remainder = std::max(0.0, extent - absSum * absScale);
            for (const auto& p : parts) {
                double sz = p.relative ? (relSum > 0 ? remainder * p.size / relSum : 0.0)
                                       : p.size * absScale;
                slices.push_back({sz, p.items});
            }
        }

        double offset = 0;
        for (const auto& [sz, items] : slices) {
            if (sz > kEps) {
                Shape child = shape;
                child.consumed = false;
                child.children = 0;
                child.scope.origin = shape.scope.origin + shape.scope.axis(axis) * offset;
                child.scope.setExtent(axis, sz);
                ++shape.children;
                runShape(*items, child, depth);
            }
            offset += sz;
        }
    }

    void opComp(const rl::SuccessorItem& it, Shape& shape, int depth) {
        needArgs(it, 1);
        if (!it.hasBlock) ruleError("comp requires a selector block", it.pos);
        if (it.args[0]->kind != rl::Expr::Kind::Var || it.args[0]->text != "f")
            ruleError("only comp(f) is supported", it.pos);
        shape.consumed = true;
        auto faces = extractFaces(shape.scope, lot_.frontDir);
        for (const auto& face : faces) {
            const std::vector<rl::SuccessorItem>* chosen = nullptr;
            for (const auto& c : it.block) {
                if (c.selector->kind != rl::Expr::Kind::Var)
                    ruleError("comp selector must be front/back/side/top/bottom/all",
                              c.selector->pos);
                const std::string& sel = c.selector->text;
                bool match = sel == "all" ||
                             (sel == "front" && face.kind == FaceKind::Front) ||
                             (sel == "back" && face.kind == FaceKind::Back) ||
                             (sel == "side" && face.kind == FaceKind::Side) ||
                             (sel == "top" && face.kind == FaceKind::Top) ||
                             (sel == "bottom" && face.kind == FaceKind::Bottom);
                if (sel != "all" && sel != "front" && sel != "back" && sel != "side" &&
                    sel != "top" && sel != "bottom")
                    ruleError("unknown comp selector '" + sel + "'", c.selector->pos);
                if (match) {
                    chosen = &c.items;
                    break;
                }
            }
            if (!chosen) continue;
            Shape child = shape;
            child.consumed = false;
            child.children = 0;
            child.scope = face.scope;
            ++shape.children;
            runShape(*chosen, child, depth);
        }
    }

    const rl::RuleFile& rules_;
    const std::map<std::string, rl::Value>& attrs_;
    const LotFootprint& lot_;
    Rng rng_;
    IncidentLog& log_;
    const CityGenOptions& options_;
    SemanticCity& city_;
    std::vector<std::map<std::string, rl::Value>> params_;
    std::vector<Entrance> entrances_;
};

// Zone entry points: midpoints of ground edges that touch a street; when no
// edge does, the boundary point nearest to the street network.
void computeZoneEntries(Zone& z, const std::vector<Street>& streets) {
    auto quad = z.volume.groundQuad();
    // Edge-on-street test: midpoint within 1e-6 of the street rectangle.
    for (int e = 0; e < 4; ++e) {
        Vec2 a = quad[e], b = quad[(e + 1) % 4];
        Vec2 mid = (a + b) * 0.5;
        for (const auto& s : streets) {
            double dx = std::max({s.rect.lo.x - mid.x, 0.0, mid.x - s.rect.hi.x});
            double dy = std::max({s.rect.lo.y - mid.y, 0.0, mid.y - s.rect.hi.y});
            if (std::hypot(dx, dy) <= 1e-6) {
                z.entryPoints.push_back(mid);
                break;
            }
        }
    }
    if (!z.entryPoints.empty()) return;
    // Nearest boundary point to the nearest street centerline.
    Vec2 center = (quad[0] + quad[2]) * 0.5;
    double bestStreet = 1e18;
    Vec2 target = center;
    for (const auto& s : streets) {
        Vec2 p = closestPointOnSegment(s.centerlineA(), s.centerlineB(), center);
        double d = distance(p, center);
        if (d < bestStreet) {
            bestStreet = d;
            target = p;
        }
    }
    double bestEdge = 1e18;
    Vec2 entry = quad[0];
    for (int e = 0; e < 4; ++e) {
        Vec2 p = closestPointOnSegment(quad[e], quad[(e + 1) % 4], target);
        double d = distance(p, target);
        if (d < bestEdge) {
            bestEdge = d;
            entry = p;
        }
    }
    z.entryPoints.push_back(entry);
}

}  // namespace

SemanticCity generateCity(const Layout& layout, const rl::RuleFile& rules, std::uint64_t seed,
                          IncidentLog& incidents, const CityGenOptions& options) {
    if (rules.startRule.empty()) throw std::runtime_error("city rules: no @StartRule");
    if (!rules.findRule(rules.startRule))
        throw std::runtime_error("city rules: start rule '" + rules.startRule + "' not found");

    SemanticCity city;
    city.config = layout.config;
    city.seed = seed;
    city.bounds = layout.bounds;
    city.lots = layout.lots;
    city.streets = layout.streets;

    // Attributes are evaluated once, against a dedicated substream.
    std::map<std::string, rl::Value> attrs;
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
        } env{attrs, Rng::substream(seed, 0x17a9u)};
        for (const auto& a : rules.attributes) attrs[a.name] = rl::evaluate(*a.value, env);
    }

    for (const auto& lot : layout.lots) {
        LotInterpreter interp(rules, attrs, lot, seed, incidents, options, city);
        interp.run();
    }

    // Dense ids, derived fields, zone entries.
    for (std::size_t i = 0; i < city.buildings.size(); ++i) {
        Building& b = city.buildings[i];
        b.id = static_cast<int>(i);
        double maxTop = 0.0;
        for (const auto& leaf : city.leaves) {
            if (leaf.lotId != b.lotId || leaf.objectId >= 0) continue;
            const Scope& s = leaf.scope;
            for (int cx = 0; cx < 2; ++cx)
                for (int cy = 0; cy < 2; ++cy)
                    for (int cz = 0; cz < 2; ++cz) {
                        Vec3 p = s.origin + s.ax * (cx * s.size.x) + s.ay * (cy * s.size.y) +
                                 s.az * (cz * s.size.z);
                        maxTop = std::max(maxTop, p.y);
                    }
        }
        b.floors = std::max(1, static_cast<int>(std::lround(maxTop / city.config.floorHeight)));
        b.residentialCapacity =
            b.hasEntranceType("house") ? b.floors * city.config.apartmentsPerFloor : 0;
    }
    for (std::size_t i = 0; i < city.zones.size(); ++i) {
        city.zones[i].id = static_cast<int>(i);
        computeZoneEntries(city.zones[i], city.streets);
    }
    for (auto& obj : city.objects) {
        bool first = true;
        for (const auto& leaf : city.leaves) {
            if (leaf.objectId != obj.id) continue;
            auto quad = leaf.scope.groundQuad();
            for (const auto& p : quad) {
                if (first) {
                    obj.bbox = {p, p};
                    first = false;
                } else {
                    obj.bbox.expand(p);
                }
            }
        }
        if (first) {
            // Object rule produced no geometry; anchor it at the scope
            // origin recorded through its (empty) bbox -> fall back to lot
            // center.
            obj.bbox = {layout.lots[obj.lotId].rect.center(), layout.lots[obj.lotId].rect.center()};
        }
        obj.position = obj.bbox.center();
        for (const auto& z : city.zones) {
            if (z.lotId == obj.lotId && z.containsGround(obj.position, 1e-6)) {
                obj.zoneId = z.id;
                break;
            }
        }
    }

    city.buildIndexes();
    city.validate();
    return city;
}

}  // namespace crowdforge::citygen
