#pragma once

#include <optional>

#include "ndg/types.hpp"

namespace ndg {

/// Denominator threshold below which the normal-distance depth conversion is
/// treated as singular.
inline constexpr double kDefaultDenomEps = 1e-6;

/// P = depth · K^{-1} (u, v, 1).
Vec3 backproject(double u, double v, double depth, const Intrinsics& k);

/// (u, v) pixel of a 3D point with Z > 0.
std::pair<double, double> project(const Vec3& p, const Intrinsics& k);

/// D(p) = dist(p) / (N(p) · K^{-1} p̃); pixels with |denominator| < tau_den
/// are marked invalid.
DepthMap depth_from_normal_distance(const NormalMap& n, const DistanceMap& dist,
                                    const Intrinsics& k, double tau_den = kDefaultDenomEps);

/// dist(p) = N(p) · (D(p) · K^{-1} p̃).
DistanceMap distance_from_depth_normal(const DepthMap& d, const NormalMap& n,
                                       const Intrinsics& k);

/// Windowed total-least-squares plane fit on back-projected points; normals
/// oriented so N·P > 0. Border and rank-deficient pixels come back invalid.
NormalMap normal_from_depth(const DepthMap& d, const Intrinsics& k, int window = 5);

PointCloud pointcloud_from_depth(const DepthMap& d, const Intrinsics& k,
                                 const Grid<std::array<uint8_t, 3>>* color = nullptr);

}  // namespace ndg
