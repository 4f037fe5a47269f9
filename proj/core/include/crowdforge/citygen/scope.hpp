#pragma once

#include <array>
#include <vector>

#include "crowdforge/common/geom.hpp"

namespace crowdforge::citygen {

// An oriented box (CGA scope): origin corner, right-handed orthonormal axes
// and per-axis sizes. 2D scopes have exactly one zero size; that axis is the
// scope normal.
struct Scope {
    Vec3 origin;
    Vec3 ax{1, 0, 0};
    Vec3 ay{0, 1, 0};
    Vec3 az{0, 0, 1};
    Vec3 size;

    const Vec3& axis(int i) const { return i == 0 ? ax : (i == 1 ? ay : az); }
    double extent(int i) const { return i == 0 ? size.x : (i == 1 ? size.y : size.z); }
    void setExtent(int i, double v) {
        if (i == 0) size.x = v;
        else if (i == 1) size.y = v;
        else size.z = v;
    }

    Vec3 center() const {
        return origin + ax * (size.x * 0.5) + ay * (size.y * 0.5) + az * (size.z * 0.5);
    }

    // Index of the zero-size axis, or -1 when the scope is a full box (or
    // degenerate along more than one axis).
    int normalAxis(double eps = 1e-9) const;

    // Corners of the ground-plane projection (quad for 3D/2D scopes).
    std::array<Vec2, 4> groundQuad() const;
};

// A face of a box scope, used by comp(f).
enum class FaceKind { Front, Back, Side, Top, Bottom };

struct Face {
    FaceKind kind;
    Scope scope;  // 2D scope: az = outward normal, sz = 0
};

// The six faces of a 3D scope, classified against the ground-plane street
// direction (front = outward normal toward the street). For a 2D scope the
// single face it represents is returned.
std::vector<Face> extractFaces(const Scope& scope, const Vec2& streetDir);

// Builds a ground-plane scope over an axis-aligned rectangle whose local z
// axis points opposite `frontDir` (so the front edge borders the street).
Scope scopeFromRect(const Rect2& rect, const Vec2& frontDir);

}  // namespace crowdforge::citygen
