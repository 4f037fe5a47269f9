#include "crowdforge/navgraph/navgraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace crowdforge::navgraph {

namespace {

constexpr double kMergeEps = 1e-9;

double euclid(const Vec2& a, const Vec2& b) { return crowdforge::distance(a, b); }

std::pair<std::int64_t, std::int64_t> quantize(const Vec2& p) {
    return {static_cast<std::int64_t>(std::llround(p.x / kMergeEps)),
            static_cast<std::int64_t>(std::llround(p.y / kMergeEps))};
}

}  // namespace

Vec2 Path::at(double dist) const {
    if (points.empty()) return {};
    if (dist <= 0.0) return points.front();
    double walked = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        double seg = euclid(points[i], points[i + 1]);
        if (walked + seg >= dist && seg > 0.0) {
            double t = (dist - walked) / seg;
            return points[i] + (points[i + 1] - points[i]) * t;
        }
        walked += seg;
    }
    return points.back();
}

int NavGraph::nodeAt(const Vec2& p) {
    auto key = quantize(p);
    auto it = nodeByKey_.find(key);
    if (it != nodeByKey_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(p);
    adj_.emplace_back();
    nodeByKey_[key] = id;
    return id;
}

int NavGraph::findNode(const Vec2& p) const {
    auto it = nodeByKey_.find(quantize(p));
    return it == nodeByKey_.end() ? -1 : it->second;
}

void NavGraph::addEdge(int a, int b, bool onStreet) {
    if (a == b) return;
    double len = euclid(nodes_[a], nodes_[b]);
    if (len <= kMergeEps) return;
    int id = static_cast<int>(edges_.size());
    edges_.push_back({a, b, len, onStreet});
    adj_[a].push_back({id, b});
    adj_[b].push_back({id, a});
}

NavGraph NavGraph::build(const citygen::SemanticCity& city) {
    NavGraph g;

    // Foot of an off-street point: its closest point over all street
    // centerlines (first street wins ties).
    auto footOf = [&](const Vec2& p) {
        double best = 1e18;
        Vec2 foot = p;
        for (const auto& s : city.streets) {
            Vec2 c = closestPointOnSegment(s.centerlineA(), s.centerlineB(), p);
            double d = euclid(c, p);
            if (d < best) {
                best = d;
                foot = c;
            }
        }
        return foot;
    };

    // Collect per-street stations: endpoints, crossings, connector feet.
    std::vector<std::vector<Vec2>> stations(city.streets.size());
    for (std::size_t i = 0; i < city.streets.size(); ++i) {
        const auto& s = city.streets[i];
        stations[i].push_back(s.centerlineA());
        stations[i].push_back(s.centerlineB());
        for (const auto& o : city.streets) {
            if (o.vertical == s.vertical) continue;
            Vec2 cross = s.vertical ? Vec2{s.center, o.center} : Vec2{o.center, s.center};
            stations[i].push_back(cross);
        }
    }
    auto stationFor = [&](const Vec2& foot) {
        // Register the foot with the street segment it lies on.
        for (std::size_t i = 0; i < city.streets.size(); ++i) {
            const auto& s = city.streets[i];
            Vec2 c = closestPointOnSegment(s.centerlineA(), s.centerlineB(), foot);
            if (euclid(c, foot) <= 1e-6) {
                stations[i].push_back(foot);
                return;
            }
        }
    };

    struct Pending {
        Vec2 from;
        Vec2 foot;
    };
    std::vector<Pending> connectors;
    g.buildingAnchors_.resize(city.buildings.size());
    for (const auto& b : city.buildings) {
        g.buildingAnchors_[b.id] = b.primaryEntrance().position;
        for (const auto& e : b.entrances) {
            Vec2 foot = footOf(e.position);
            stationFor(foot);
            connectors.push_back({e.position, foot});
        }
    }
    g.zoneEntries_.resize(city.zones.size());
    for (const auto& z : city.zones) {
        g.zoneEntries_[z.id] = z.entryPoints;
        for (const auto& p : z.entryPoints) {
            Vec2 foot = footOf(p);
            stationFor(foot);
            connectors.push_back({p, foot});
        }
    }
    g.objectAnchors_.resize(city.objects.size());
    for (const auto& o : city.objects) {
        g.objectAnchors_[o.id] = o.position;
        if (o.zoneId < 0) {
            Vec2 foot = footOf(o.position);
            stationFor(foot);
            connectors.push_back({o.position, foot});
        }
    }

    // Street edges between consecutive stations.
    for (std::size_t i = 0; i < city.streets.size(); ++i) {
        const auto& s = city.streets[i];
        auto& pts = stations[i];
        auto along = [&](const Vec2& p) { return s.vertical ? p.y : p.x; };
        std::sort(pts.begin(), pts.end(),
                  [&](const Vec2& a, const Vec2& b) { return along(a) < along(b); });
        int prev = -1;
        for (const auto& p : pts) {
            int n = g.nodeAt(p);
            if (prev >= 0 && n != prev) g.addEdge(prev, n, true);
            prev = n;
        }
    }

    // Connector stubs.
    for (const auto& c : connectors) g.addEdge(g.nodeAt(c.from), g.nodeAt(c.foot), false);
    // An object inside a zone hangs off the entry nearest to it, so zones
    // never become through-routes.
    for (const auto& o : city.objects) {
        if (o.zoneId < 0) continue;
        const auto& entries = city.zones[o.zoneId].entryPoints;
        Vec2 entry = entries.front();
        double best = 1e18;
        for (const auto& e : entries) {
            double d = euclid(e, o.position);
            if (d < best) {
                best = d;
                entry = e;
            }
        }
        g.addEdge(g.nodeAt(o.position), g.nodeAt(entry), false);
    }

    // Every anchor must reach the street network.
    if (!g.nodes_.empty()) {
        std::vector<char> seen(g.nodes_.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            for (auto [e, other] : g.adj_[n]) {
                (void)e;
                if (!seen[other]) {
                    seen[other] = 1;
                    stack.push_back(other);
                }
            }
        }
        std::ostringstream errs;
        auto check = [&](const Vec2& p, const std::string& what) {
            int n = g.findNode(p);
            if (n < 0 || !seen[n]) errs << what << " is not connected to the street network\n";
        };
        for (const auto& b : city.buildings)
            for (std::size_t e = 0; e < b.entrances.size(); ++e)
                check(b.entrances[e].position,
                      "building " + std::to_string(b.id) + " entrance " + std::to_string(e));
        for (const auto& z : city.zones)
            for (const auto& p : z.entryPoints) check(p, "zone " + std::to_string(z.id) + " entry");
        for (const auto& o : city.objects) check(o.position, "object " + std::to_string(o.id));
        std::string all = errs.str();
        if (!all.empty()) throw std::runtime_error("navgraph: " + all);
    }

    return g;
}

NavGraph::Snap NavGraph::snapPoint(const Vec2& p) const {
    Snap s;
    int exact = findNode(p);
    if (exact >= 0) {
        s.node = exact;
        s.point = nodes_[exact];
        return s;
    }
    double best = 1e18;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (!edges_[i].onStreet) continue;
        const Edge& e = edges_[i];
        Vec2 c = closestPointOnSegment(nodes_[e.a], nodes_[e.b], p);
        double d = euclid(c, p);
        if (d < best) {
            best = d;
            s.edge = static_cast<int>(i);
            s.point = c;
        }
    }
    s.offset = best < 1e18 ? best : 0.0;
    return s;
}

std::vector<double> NavGraph::dijkstra(const std::vector<std::pair<int, double>>& sources,
                                       std::vector<int>* pred) const {
    std::vector<double> dist(nodes_.size(), 1e18);
    if (pred) pred->assign(nodes_.size(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (auto [n, d] : sources) {
        if (d < dist[n]) {
            dist[n] = d;
            pq.push({d, n});
        }
    }
    while (!pq.empty()) {
        auto [d, n] = pq.top();
        pq.pop();
        if (d > dist[n]) continue;
        for (auto [e, other] : adj_[n]) {
            double nd = d + edges_[e].length;
            if (nd < dist[other]) {
                dist[other] = nd;
                if (pred) (*pred)[other] = n;
                pq.push({nd, other});
            }
        }
    }
    return dist;
}

Path NavGraph::route(const Vec2& from, const Vec2& to) const {
    Path out;
    auto push = [&](const Vec2& p) {
        if (!out.points.empty() && euclid(out.points.back(), p) <= kMergeEps) return;
        if (!out.points.empty()) out.length += euclid(out.points.back(), p);
        out.points.push_back(p);
    };
    push(from);

    Snap sf = snapPoint(from);
    Snap st = snapPoint(to);

    // Both projected onto the same straight street edge: walk it directly.
    if (sf.edge >= 0 && sf.edge == st.edge) {
        push(sf.point);
        push(st.point);
        push(to);
        return out;
    }

    std::vector<std::pair<int, double>> sources;
    if (sf.node >= 0) {
        sources.push_back({sf.node, 0.0});
    } else if (sf.edge >= 0) {
        const Edge& e = edges_[sf.edge];
        sources.push_back({e.a, sf.offset + euclid(sf.point, nodes_[e.a])});
        sources.push_back({e.b, sf.offset + euclid(sf.point, nodes_[e.b])});
    }
    if (sources.empty()) {
        push(to);
        return out;
    }

    std::vector<int> pred;
    auto dist = dijkstra(sources, &pred);

    // Pick the best terminal node on the target side.
    int end = -1;
    double bestTotal = 1e18;
    if (st.node >= 0) {
        end = st.node;
        bestTotal = dist[end];
    } else if (st.edge >= 0) {
        const Edge& e = edges_[st.edge];
        for (int cand : {e.a, e.b}) {
            double total = dist[cand] + euclid(nodes_[cand], st.point) + st.offset;
            if (total < bestTotal) {
                bestTotal = total;
                end = cand;
            }
        }
    }
    if (end < 0 || dist[end] >= 1e18) {
        // No route; fall back to the straight line.
        push(to);
        return out;
    }

    std::vector<int> chain;
    for (int n = end; n >= 0; n = pred[n]) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());

    // Entry hop: from -> projection -> first node.
    if (sf.node < 0) push(sf.point);
    for (int n : chain) push(nodes_[n]);
    if (st.node < 0) push(st.point);
    push(to);
    return out;
}

double NavGraph::distance(const Vec2& from, const Vec2& to) const { return route(from, to).length; }

Vec2 NavGraph::buildingAnchor(int buildingId) const { return buildingAnchors_.at(buildingId); }

Vec2 NavGraph::objectAnchor(int objectId) const { return objectAnchors_.at(objectId); }

const std::vector<Vec2>& NavGraph::zoneEntries(int zoneId) const {
    return zoneEntries_.at(zoneId);
}

Vec2 NavGraph::nearestZoneEntry(int zoneId, const Vec2& from) const {
    const auto& entries = zoneEntries_.at(zoneId);
    Vec2 best = entries.front();
    double bestDist = 1e18;
    for (const auto& e : entries) {
        double d = distance(from, e);
        if (d < bestDist) {
            bestDist = d;
            best = e;
        }
    }
    return best;
}

}  // namespace crowdforge::navgraph
