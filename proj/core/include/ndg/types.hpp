#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ndg {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    Vec3 normalized() const {
        double n = norm();
        if (n <= 0.0) throw std::domain_error("Vec3::normalized: zero vector");
        return {x / n, y / n, z / n};
    }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Dense H×W raster of scalars or small fixed-size values.
template <typename T>
struct Grid {
    int width = 0, height = 0;
    std::vector<T> v;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    T& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return v.size(); }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Pinhole camera parameters (fx, fy, cx, cy).
struct Intrinsics {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw std::invalid_argument("Intrinsics: focal lengths must be positive");
    }

    /// K^{-1} (u, v, 1): viewing ray with unit z component.
    Vec3 ray(double u, double v) const {
        return {(u - cx) / fx, (v - cy) / fy, 1.0};
    }
};

struct DepthMap {
    int width = 0, height = 0;
    std::vector<double> z;
    std::vector<uint8_t> valid;

    DepthMap() = default;
    DepthMap(int w, int h)
        : width(w), height(h), z(static_cast<size_t>(w) * h, 0.0),
          valid(static_cast<size_t>(w) * h, 0) {}

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    double at(int x, int y) const { return z[idx(x, y)]; }
    bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }
    void set(int x, int y, double d) { z[idx(x, y)] = d; valid[idx(x, y)] = 1; }
    void invalidate(int x, int y) { z[idx(x, y)] = 0.0; valid[idx(x, y)] = 0; }
};

struct NormalMap {
    int width = 0, height = 0;
    std::vector<Vec3> n;
    std::vector<uint8_t> valid;

    NormalMap() = default;
    NormalMap(int w, int h)
        : width(w), height(h), n(static_cast<size_t>(w) * h),
          valid(static_cast<size_t>(w) * h, 0) {}

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    const Vec3& at(int x, int y) const { return n[idx(x, y)]; }
    bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }
    void set(int x, int y, const Vec3& v) { n[idx(x, y)] = v; valid[idx(x, y)] = 1; }
    void invalidate(int x, int y) { n[idx(x, y)] = {}; valid[idx(x, y)] = 0; }
};

struct DistanceMap {
    int width = 0, height = 0;
    std::vector<double> d;
    std::vector<uint8_t> valid;

    DistanceMap() = default;
    DistanceMap(int w, int h)
        : width(w), height(h), d(static_cast<size_t>(w) * h, 0.0),
          valid(static_cast<size_t>(w) * h, 0) {}

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    double at(int x, int y) const { return d[idx(x, y)]; }
    bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }
    void set(int x, int y, double v) { d[idx(x, y)] = v; valid[idx(x, y)] = 1; }
    void invalidate(int x, int y) { d[idx(x, y)] = 0.0; valid[idx(x, y)] = 0; }
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<std::array<uint8_t, 3>> colors;  // empty or one entry per point

    bool has_colors() const { return !colors.empty(); }
    size_t size() const { return points.size(); }
};

}  // namespace ndg
