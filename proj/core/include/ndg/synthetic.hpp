#pragma once

#include <string>

#include "ndg/segmentation.hpp"
#include "ndg/types.hpp"

namespace ndg {

struct Plane {
    Vec3 n;     // unit normal, oriented so n·P = d with d > 0
    double d;   // plane-to-origin distance, meters
};

enum class SceneLayout { Tiles, Nearest };

struct SceneSpec {
    int width = 160, height = 120;
    Intrinsics k{100.0, 100.0, 79.5, 59.5};
    std::vector<Plane> planes;
    SceneLayout layout = SceneLayout::Tiles;

    static SceneSpec parse(const std::string& text);
    std::string serialize() const;
};

/// Piecewise-planar scene with analytic ground truth; every pixel's
/// (N, dist, depth) triple satisfies the ray-plane identity exactly.
struct PlanarScene {
    SceneSpec spec;
    DepthMap depth;
    NormalMap normal;
    DistanceMap distance;
    SegmentLabels assignment;  // generating plane index per pixel
};

/// Deterministic generation. Tiles layout assigns plane i to the i-th
/// vertical strip; Nearest takes the closest positive ray-plane intersection
/// per pixel. Throws if a plane is degenerate over its assigned pixels.
PlanarScene generate(const SceneSpec& spec);

/// Default desk-scale 3-plane test scene (floor-like, wall-like, tilted).
SceneSpec default_scene_spec();

/// Random non-degenerate tiled scene with n_planes planes.
SceneSpec random_scene_spec(int width, int height, int n_planes, uint64_t seed);

struct NoiseModel {
    double depth_sigma = 0.0;        // additive Gaussian depth noise, meters
    double normal_angle_sigma = 0.0; // small-angle normal rotation, radians
};

struct NoisyMaps {
    DepthMap depth;
    NormalMap normal;
};

NoisyMaps perturb(const PlanarScene& scene, const NoiseModel& noise, uint64_t seed);

}  // namespace ndg
