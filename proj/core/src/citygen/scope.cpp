#include "crowdforge/citygen/scope.hpp"

#include <cmath>
#include <vector>

namespace crowdforge::citygen {

int Scope::normalAxis(double eps) const {
    int zero = -1;
    int zeros = 0;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(extent(i)) <= eps) {
            zero = i;
            ++zeros;
        }
    }
    return zeros == 1 ? zero : -1;
}

std::array<Vec2, 4> Scope::groundQuad() const {
    Vec2 o = origin.ground();
    Vec2 dx = (ax * size.x).ground();
    Vec2 dz = (az * size.z).ground();
    return {o, o + dx, o + dx + dz, o + dz};
}

namespace {

// Builds a 2D scope over four coplanar corners with the given axes; the
// origin is the corner from which every other corner has non-negative local
// coordinates.
Scope faceScope(const std::vector<Vec3>& corners, const Vec3& axF, const Vec3& ayF,
                const Vec3& azF) {
    const double eps = 1e-9;
    Scope s;
    s.ax = axF;
    s.ay = ayF;
    s.az = azF;
    for (const Vec3& c : corners) {
        bool ok = true;
        for (const Vec3& p : corners) {
            Vec3 d = p - c;
            if (d.dot(axF) < -eps || d.dot(ayF) < -eps) {
                ok = false;
                break;
            }
        }
        if (ok) {
            s.origin = c;
            break;
        }
    }
    double sx = 0, sy = 0;
    for (const Vec3& p : corners) {
        Vec3 d = p - s.origin;
        sx = std::max(sx, d.dot(axF));
        sy = std::max(sy, d.dot(ayF));
    }
    s.size = {sx, sy, 0};
    return s;
}

FaceKind classify(const Vec3& normal, const Vec2& streetDir) {
    if (normal.y > 0.9) return FaceKind::Top;
    if (normal.y < -0.9) return FaceKind::Bottom;
    Vec2 g = normal.ground().normalized();
    double d = g.dot(streetDir);
    if (d >= 0.707) return FaceKind::Front;
    if (d <= -0.707) return FaceKind::Back;
    return FaceKind::Side;
}

}  // namespace

std::vector<Face> extractFaces(const Scope& scope, const Vec2& streetDir) {
    std::vector<Face> out;
    int n = scope.normalAxis();
    if (n >= 0) {
        // Already a face; classify it by its normal axis.
        Face f;
        f.scope = scope;
        f.kind = classify(scope.axis(n), streetDir);
        out.push_back(f);
        return out;
    }
    for (int a = 0; a < 3; ++a) {
        int u = (a + 1) % 3;
        int v = (a + 2) % 3;
        for (int sign = 0; sign < 2; ++sign) {
            Vec3 normal = scope.axis(a) * (sign ? 1.0 : -1.0);
            Vec3 base = scope.origin;
            if (sign) base = base + scope.axis(a) * scope.extent(a);
            std::vector<Vec3> corners{
                base,
                base + scope.axis(u) * scope.extent(u),
                base + scope.axis(v) * scope.extent(v),
                base + scope.axis(u) * scope.extent(u) + scope.axis(v) * scope.extent(v),
            };
            Face f;
            f.kind = classify(normal, streetDir);
            Vec3 azF = normal;
            Vec3 ayF, axF;
            if (std::abs(normal.y) > 0.9) {
                axF = scope.ax;
                ayF = azF.cross(axF);
            } else {
                ayF = {0, 1, 0};
                axF = ayF.cross(azF);
            }
            f.scope = faceScope(corners, axF, ayF, azF);
            out.push_back(f);
        }
    }
    return out;
}

Scope scopeFromRect(const Rect2& rect, const Vec2& frontDir) {
    Scope s;
    s.ay = {0, 1, 0};
    s.az = {-frontDir.x, 0, -frontDir.y};
    s.ax = s.ay.cross(s.az);
    std::vector<Vec3> corners{
        {rect.lo.x, 0, rect.lo.y},
        {rect.hi.x, 0, rect.lo.y},
        {rect.hi.x, 0, rect.hi.y},
        {rect.lo.x, 0, rect.hi.y},
    };
    const double eps = 1e-9;
    for (const Vec3& c : corners) {
        bool ok = true;
        for (const Vec3& p : corners) {
            Vec3 d = p - c;
            if (d.dot(s.ax) < -eps || d.dot(s.az) < -eps) {
                ok = false;
                break;
            }
        }
        if (ok) {
            s.origin = c;
            break;
        }
    }
    double sx = 0, sz = 0;
    for (const Vec3& p : corners) {
        Vec3 d = p - s.origin;
        sx = std::max(sx, d.dot(s.ax));
        sz = std::max(sz, d.dot(s.az));
    }
    s.size = {sx, 0, sz};
    return s;
}

}  // namespace crowdforge::citygen
