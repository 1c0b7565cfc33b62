#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ndg/camera.hpp"
#include "ndg/synthetic.hpp"

using namespace ndg;

namespace {
const Intrinsics kK{500.0, 500.0, 320.0, 240.0};

double angular_error(const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}
}  // namespace

TEST_CASE("backproject principal point lies on the optical axis") {
    Vec3 p = backproject(320.0, 240.0, 2.0, kK);
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(p.z == doctest::Approx(2.0));
}

TEST_CASE("backproject off-axis pixel") {
    Vec3 p = backproject(820.0, 240.0, 1.0, kK);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(p.z == doctest::Approx(1.0));
}

TEST_CASE("project inverts backproject") {
    auto [u, v] = project(backproject(101.25, 417.5, 3.7, kK), kK);
    CHECK(u == doctest::Approx(101.25).epsilon(1e-12));
    CHECK(v == doctest::Approx(417.5).epsilon(1e-12));
}

TEST_CASE("backproject rejects non-positive depth") {
    CHECK_THROWS_AS(backproject(0, 0, 0.0, kK), std::domain_error);
}

TEST_CASE("fronto-parallel plane depth from normal and distance") {
    NormalMap n(5, 5);
    DistanceMap dist(5, 5);
    Intrinsics k{100.0, 100.0, 2.0, 2.0};
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            n.set(x, y, {0, 0, 1});
            dist.set(x, y, 2.0);
        }
    DepthMap d = depth_from_normal_distance(n, dist, k);
    CHECK(d.at(2, 2) == doctest::Approx(2.0));
    CHECK(d.is_valid(0, 0));
}

TEST_CASE("tilted plane matches the ray-plane oracle") {
    const double theta = 0.5;
    Plane plane{Vec3{0.0, -std::sin(theta), std::cos(theta)}, 2.0};
    Intrinsics k{120.0, 120.0, 15.5, 11.5};
    NormalMap n(32, 24);
    DistanceMap dist(32, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
            n.set(x, y, plane.n);
            dist.set(x, y, plane.d);
        }
    DepthMap d = depth_from_normal_distance(n, dist, k);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
            REQUIRE(d.is_valid(x, y));
            // Independent oracle: brute-force ray-plane intersection.
            Vec3 r = k.ray(x, y);
            double t_hit = plane.d / plane.n.dot(r);
            CHECK(d.at(x, y) == doctest::Approx(t_hit).epsilon(1e-9));
        }
}

TEST_CASE("normal orthogonal to the ray marks the pixel invalid") {
    NormalMap n(1, 1);
    DistanceMap dist(1, 1);
    Intrinsics k{100.0, 100.0, 0.0, 0.0};
    n.set(0, 0, {1, 0, 0});  // ray at principal point is (0,0,1)
    dist.set(0, 0, 1.0);
    DepthMap d = depth_from_normal_distance(n, dist, k);
    CHECK_FALSE(d.is_valid(0, 0));
}

TEST_CASE("distance of a fronto-parallel plane is the depth") {
    DepthMap d(4, 4);
    NormalMap n(4, 4);
    Intrinsics k{100.0, 100.0, 1.5, 1.5};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            d.set(x, y, 2.0);
            n.set(x, y, {0, 0, 1});
        }
    DistanceMap dist = distance_from_depth_normal(d, n, k);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(dist.at(x, y) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("depth -> distance -> depth round-trips") {
    PlanarScene sc = generate(default_scene_spec());
    DistanceMap dist = distance_from_depth_normal(sc.depth, sc.normal, sc.spec.k);
    DepthMap back = depth_from_normal_distance(sc.normal, dist, sc.spec.k);
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x) {
            if (!back.is_valid(x, y)) continue;
            CHECK(std::fabs(back.at(x, y) - sc.depth.at(x, y)) / sc.depth.at(x, y) < 1e-12);
        }
}

TEST_CASE("distance is constant across a tilted synthetic plane") {
    SceneSpec spec;
    spec.width = 24;
    spec.height = 20;
    spec.k = {40.0, 40.0, 11.5, 9.5};
    spec.planes = {{Vec3{0.1, -0.3, 1.0}.normalized(), 2.3}};
    PlanarScene sc = generate(spec);
    DistanceMap dist = distance_from_depth_normal(sc.depth, sc.normal, spec.k);
    for (size_t i = 0; i < dist.d.size(); ++i) CHECK(std::fabs(dist.d[i] - 2.3) < 1e-9);
}

TEST_CASE("normal_from_depth recovers a fronto-parallel plane") {
    DepthMap d(9, 9);
    Intrinsics k{100.0, 100.0, 4.0, 4.0};
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) d.set(x, y, 3.0);
    NormalMap n = normal_from_depth(d, k);
    CHECK(n.is_valid(4, 4));
    CHECK_FALSE(n.is_valid(0, 0));  // incomplete window at the border
    CHECK(angular_error(n.at(4, 4), {0, 0, 1}) < 1e-9);
}

TEST_CASE("normal_from_depth recovers an analytic tilted normal") {
    const double theta = 30.0 * M_PI / 180.0;
    SceneSpec spec;
    spec.width = 40;
    spec.height = 30;
    spec.k = {60.0, 60.0, 19.5, 14.5};
    spec.planes = {{Vec3{0.0, -std::sin(theta), std::cos(theta)}, 2.0}};
    PlanarScene sc = generate(spec);
    NormalMap n = normal_from_depth(sc.depth, spec.k);
    for (int y = 2; y < 28; ++y)
        for (int x = 2; x < 38; ++x) {
            REQUIRE(n.is_valid(x, y));
            CHECK(angular_error(n.at(x, y), spec.planes[0].n) < 1e-6);
        }
}

TEST_CASE("fitted plane yields a constant plane-to-origin distance") {
    SceneSpec spec;
    spec.width = 30;
    spec.height = 30;
    spec.k = {50.0, 50.0, 14.5, 14.5};
    spec.planes = {{Vec3{0.15, 0.2, 1.0}.normalized(), 1.7}};
    PlanarScene sc = generate(spec);
    NormalMap n = normal_from_depth(sc.depth, spec.k);
    DistanceMap dist = distance_from_depth_normal(sc.depth, n, spec.k);
    for (int y = 2; y < 28; ++y)
        for (int x = 2; x < 28; ++x) {
            REQUIRE(dist.is_valid(x, y));
            CHECK(std::fabs(dist.at(x, y) - 1.7) < 1e-9);
        }
}

TEST_CASE("recovered normals satisfy the positive-orientation convention") {
    PlanarScene sc = generate(default_scene_spec());
    NormalMap n = normal_from_depth(sc.depth, sc.spec.k);
    for (int y = 0; y < n.height; ++y)
        for (int x = 0; x < n.width; ++x) {
            if (!n.is_valid(x, y)) continue;
            Vec3 p = backproject(x, y, sc.depth.at(x, y), sc.spec.k);
            CHECK(n.at(x, y).dot(p) > 0.0);
        }
}

TEST_CASE("normal directions are invariant to uniform depth scaling") {
    SceneSpec spec;
    spec.width = 20;
    spec.height = 20;
    spec.k = {40.0, 40.0, 9.5, 9.5};
    spec.planes = {{Vec3{0.1, -0.2, 1.0}.normalized(), 2.0}};
    PlanarScene sc = generate(spec);
    NormalMap n1 = normal_from_depth(sc.depth, spec.k);
    DepthMap scaled = sc.depth;
    for (auto& z : scaled.z) z *= 3.5;
    NormalMap n2 = normal_from_depth(scaled, spec.k);
    for (int y = 3; y < 17; ++y)
        for (int x = 3; x < 17; ++x) {
            REQUIRE(n1.is_valid(x, y));
            REQUIRE(n2.is_valid(x, y));
            // acos near 1 has a precision floor around 1.5e-8.
            CHECK(angular_error(n1.at(x, y), n2.at(x, y)) < 1e-7);
        }
}

TEST_CASE("point cloud satisfies the generating plane equations") {
    PlanarScene sc = generate(default_scene_spec());
    PointCloud pc = pointcloud_from_depth(sc.depth, sc.spec.k);
    REQUIRE(pc.size() == static_cast<size_t>(sc.depth.width) * sc.depth.height);
    size_t i = 0;
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x, ++i) {
            int which = sc.assignment.at(x, y);
            const Plane& pl = sc.spec.planes[which];
            CHECK(std::fabs(pl.n.dot(pc.points[i]) - pl.d) < 1e-9);
        }
}

TEST_CASE("single-pixel depth map at the principal point") {
    DepthMap d(1, 1);
    Intrinsics k{100.0, 100.0, 0.0, 0.0};
    d.set(0, 0, 3.0);
    PointCloud pc = pointcloud_from_depth(d, k);
    REQUIRE(pc.size() == 1);
    CHECK(pc.points[0].x == doctest::Approx(0.0));
    CHECK(pc.points[0].y == doctest::Approx(0.0));
    CHECK(pc.points[0].z == doctest::Approx(3.0));
}
