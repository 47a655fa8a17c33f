#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace ltlab {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double& operator[](std::size_t d) { return d == 0 ? x : (d == 1 ? y : z); }
    constexpr double operator[](std::size_t d) const { return d == 0 ? x : (d == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Axis-aligned box [lo, hi] in R^3.
struct Box {
    Vec3 lo;
    Vec3 hi;

    constexpr double extent(std::size_t d) const { return hi[d] - lo[d]; }
    constexpr double volume() const { return extent(0) * extent(1) * extent(2); }
    constexpr Vec3 center() const { return (lo + hi) * 0.5; }
    constexpr bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
    constexpr bool containsBox(const Box& b) const { return contains(b.lo) && contains(b.hi); }
    friend constexpr bool operator==(const Box&, const Box&) = default;
};

/// Axis-aligned cube given by its lower corner and side length.
struct Cube {
    Vec3 corner;
    double side = 1.0;

    constexpr Box box() const { return {corner, corner + Vec3{side, side, side}}; }
    constexpr double volume() const { return side * side * side; }
    /// Half-open membership [corner, corner + side) so that octants tile their parent.
    constexpr bool containsHalfOpen(const Vec3& p) const {
        return p.x >= corner.x && p.x < corner.x + side && p.y >= corner.y && p.y < corner.y + side &&
               p.z >= corner.z && p.z < corner.z + side;
    }
    /// Octant k in binary (z,y,x) order: bit 0 -> x, bit 1 -> y, bit 2 -> z.
    constexpr Cube octant(int k) const {
        const double h = side * 0.5;
        return {corner + Vec3{(k & 1) ? h : 0.0, (k & 2) ? h : 0.0, (k & 4) ? h : 0.0}, h};
    }
    friend constexpr bool operator==(const Cube&, const Cube&) = default;
};

/// Overlap volume of two boxes (0 if disjoint).
inline double overlapVolume(const Box& a, const Box& b) {
    double v = 1.0;
    for (std::size_t d = 0; d < 3; ++d) {
        const double len = std::min(a.hi[d], b.hi[d]) - std::max(a.lo[d], b.lo[d]);
        if (len <= 0.0) return 0.0;
        v *= len;
    }
    return v;
}

}  // namespace ltlab
