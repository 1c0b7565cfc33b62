#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ndg/camera.hpp"
#include "ndg/synthetic.hpp"

using namespace ndg;

TEST_CASE("every pixel satisfies the ray-plane identity exactly") {
    PlanarScene sc = generate(default_scene_spec());
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x) {
            REQUIRE(sc.depth.is_valid(x, y));
            Vec3 p = backproject(x, y, sc.depth.at(x, y), sc.spec.k);
            // n·P == dist for the stored per-pixel normal and distance.
            CHECK(std::fabs(sc.normal.at(x, y).dot(p) - sc.distance.at(x, y)) < 1e-12);
            CHECK(std::fabs(sc.normal.at(x, y).norm() - 1.0) < 1e-12);
            CHECK(sc.depth.at(x, y) > 0.0);
            CHECK(sc.distance.at(x, y) > 0.0);
        }
}

TEST_CASE("geometric round trip depth -> (n, dist) -> depth at 1e-12") {
    PlanarScene sc = generate(default_scene_spec());
    DepthMap back = depth_from_normal_distance(sc.normal, sc.distance, sc.spec.k);
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x) {
            REQUIRE(back.is_valid(x, y));
            CHECK(std::fabs(back.at(x, y) - sc.depth.at(x, y)) / sc.depth.at(x, y) < 1e-12);
        }
}

TEST_CASE("tiles layout assigns planes to vertical strips") {
    SceneSpec spec;
    spec.width = 9;
    spec.height = 4;
    spec.k = {20.0, 20.0, 4.0, 1.5};
    spec.planes = {{{0, 0, 1}, 1.0}, {{0, 0, 1}, 2.0}, {{0, 0, 1}, 3.0}};
    PlanarScene sc = generate(spec);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 9; ++x) CHECK(sc.assignment.at(x, y) == x / 3);
    CHECK(sc.depth.at(0, 0) == doctest::Approx(1.0));
    CHECK(sc.depth.at(4, 1) == doctest::Approx(2.0));
    CHECK(sc.depth.at(8, 3) == doctest::Approx(3.0));
}

TEST_CASE("nearest layout picks the closest intersection per pixel") {
    SceneSpec spec;
    spec.width = 6;
    spec.height = 6;
    spec.k = {30.0, 30.0, 2.5, 2.5};
    spec.layout = SceneLayout::Nearest;
    spec.planes = {{{0, 0, 1}, 3.0}, {{0, 0, 1}, 1.5}};
    PlanarScene sc = generate(spec);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            CHECK(sc.assignment.at(x, y) == 1);
            CHECK(sc.distance.at(x, y) == doctest::Approx(1.5));
        }
}

TEST_CASE("degenerate and behind-camera planes are rejected") {
    SceneSpec spec;
    spec.width = 4;
    spec.height = 4;
    spec.k = {100.0, 100.0, 0.0, 1.5};
    // Ray at x=0 is orthogonal to this normal: degenerate.
    spec.planes = {{{1, 0, 0}, 1.0}};
    CHECK_THROWS_AS(generate(spec), std::runtime_error);
    // All rays hit this plane from behind.
    spec.k = {100.0, 100.0, 1.5, 1.5};
    spec.planes = {{{0, 0, -1}, 1.0}};
    CHECK_THROWS_AS(generate(spec), std::runtime_error);
}

TEST_CASE("spec text round trip") {
    SceneSpec spec = default_scene_spec();
    SceneSpec back = SceneSpec::parse(spec.serialize());
    CHECK(back.width == spec.width);
    CHECK(back.height == spec.height);
    CHECK(back.k.fx == doctest::Approx(spec.k.fx).epsilon(1e-15));
    CHECK(back.k.cy == doctest::Approx(spec.k.cy).epsilon(1e-15));
    REQUIRE(back.planes.size() == spec.planes.size());
    for (size_t i = 0; i < spec.planes.size(); ++i) {
        CHECK(std::fabs(back.planes[i].n.x - spec.planes[i].n.x) < 1e-15);
        CHECK(std::fabs(back.planes[i].n.y - spec.planes[i].n.y) < 1e-15);
        CHECK(std::fabs(back.planes[i].n.z - spec.planes[i].n.z) < 1e-15);
        CHECK(std::fabs(back.planes[i].d - spec.planes[i].d) < 1e-15);
    }
    CHECK(back.layout == spec.layout);
}

TEST_CASE("parse tolerates comments and rejects malformed input") {
    SceneSpec s = SceneSpec::parse(
        "# comment line\n"
        "size 8 6\n"
        "intrinsics 10 10 3.5 2.5\n"
        "layout tiles\n"
        "plane 0 0 1 2.0\n");
    CHECK(s.width == 8);
    CHECK(s.planes.size() == 1);
    CHECK_THROWS(SceneSpec::parse("size 8\n"));
    CHECK_THROWS(SceneSpec::parse("bogus 1 2 3\n"));
}

TEST_CASE("random scenes generate successfully and deterministically") {
    for (uint64_t seed : {1ull, 2ull, 77ull}) {
        SceneSpec a = random_scene_spec(40, 30, 4, seed);
        SceneSpec b = random_scene_spec(40, 30, 4, seed);
        CHECK(a.serialize() == b.serialize());
        PlanarScene sc = generate(a);
        CHECK(sc.depth.width == 40);
        REQUIRE(a.planes.size() == 4);
        for (const auto& pl : a.planes) {
            CHECK(std::fabs(pl.n.norm() - 1.0) < 1e-12);
            CHECK(pl.d >= 1.0);
            CHECK(pl.d <= 5.0);
        }
    }
    SceneSpec c = random_scene_spec(40, 30, 4, 1);
    SceneSpec d = random_scene_spec(40, 30, 4, 2);
    CHECK(c.serialize() != d.serialize());
}

TEST_CASE("perturb is deterministic in the seed") {
    PlanarScene sc = generate(default_scene_spec());
    NoiseModel noise{0.05, 0.02};
    NoisyMaps a = perturb(sc, noise, 5);
    NoisyMaps b = perturb(sc, noise, 5);
    NoisyMaps c = perturb(sc, noise, 6);
    CHECK(a.depth.z == b.depth.z);
    CHECK(a.depth.z != c.depth.z);
}

TEST_CASE("perturbed normals stay unit length and noise scales sanely") {
    PlanarScene sc = generate(default_scene_spec());
    NoisyMaps noisy = perturb(sc, {0.05, 0.03}, 11);
    double sq_sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x) {
            CHECK(std::fabs(noisy.normal.at(x, y).norm() - 1.0) < 1e-12);
            double e = noisy.depth.at(x, y) - sc.depth.at(x, y);
            sq_sum += e * e;
            ++n;
        }
    double rms = std::sqrt(sq_sum / n);
    CHECK(rms > 0.02);
    CHECK(rms < 0.10);
}

TEST_CASE("zero noise is the identity") {
    PlanarScene sc = generate(default_scene_spec());
    NoisyMaps noisy = perturb(sc, {0.0, 0.0}, 3);
    CHECK(noisy.depth.z == sc.depth.z);
    for (int y = 0; y < sc.depth.height; ++y)
        for (int x = 0; x < sc.depth.width; ++x) {
            Vec3 a = noisy.normal.at(x, y), b = sc.normal.at(x, y);
            CHECK(std::fabs(a.x - b.x) < 1e-15);
            CHECK(std::fabs(a.y - b.y) < 1e-15);
            CHECK(std::fabs(a.z - b.z) < 1e-15);
        }
}
