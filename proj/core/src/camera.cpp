#include "ndg/camera.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace ndg {

Vec3 backproject(double u, double v, double depth, const Intrinsics& k) {
    if (!(depth > 0.0)) throw std::domain_error("backproject: depth must be positive");
    Vec3 r = k.ray(u, v);
    return r * depth;
}

std::pair<double, double> project(const Vec3& p, const Intrinsics& k) {
    if (!(p.z > 0.0)) throw std::domain_error("project: point must be in front of the camera");
    return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

DepthMap depth_from_normal_distance(const NormalMap& n, const DistanceMap& dist,
                                    const Intrinsics& k, double tau_den) {
    if (n.width != dist.width || n.height != dist.height)
        throw std::invalid_argument("depth_from_normal_distance: shape mismatch");
    k.validate();
    DepthMap out(n.width, n.height);
    for (int y = 0; y < n.height; ++y)
        for (int x = 0; x < n.width; ++x) {
            if (!n.is_valid(x, y) || !dist.is_valid(x, y)) continue;
            double den = n.at(x, y).dot(k.ray(x, y));
            if (std::fabs(den) < tau_den) continue;
            double d = dist.at(x, y) / den;
            if (!(d > 0.0) || !std::isfinite(d)) continue;
            out.set(x, y, d);
        }
    return out;
}

DistanceMap distance_from_depth_normal(const DepthMap& d, const NormalMap& n,
                                       const Intrinsics& k) {
    if (n.width != d.width || n.height != d.height)
        throw std::invalid_argument("distance_from_depth_normal: shape mismatch");
    k.validate();
    DistanceMap out(d.width, d.height);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            if (!d.is_valid(x, y) || !n.is_valid(x, y)) continue;
            Vec3 p = k.ray(x, y) * d.at(x, y);
            out.set(x, y, n.at(x, y).dot(p));
        }
    return out;
}

NormalMap normal_from_depth(const DepthMap& d, const Intrinsics& k, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("normal_from_depth: window must be odd and >= 3");
    k.validate();
    const int r = window / 2;
    NormalMap out(d.width, d.height);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            if (x < r || y < r || x >= d.width - r || y >= d.height - r) continue;
            bool complete = true;
            Eigen::Vector3d mean = Eigen::Vector3d::Zero();
            std::vector<Eigen::Vector3d> pts;
            pts.reserve(static_cast<size_t>(window) * window);
            for (int dy = -r; dy <= r && complete; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (!d.is_valid(x + dx, y + dy)) {
                        complete = false;
                        break;
                    }
                    Vec3 p = backproject(x + dx, y + dy, d.at(x + dx, y + dy), k);
                    pts.emplace_back(p.x, p.y, p.z);
                    mean += pts.back();
                }
            if (!complete) continue;
            mean /= static_cast<double>(pts.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (const auto& p : pts) {
                Eigen::Vector3d q = p - mean;
                cov += q * q.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
            // Rank-deficient fit: points nearly collinear, no unique plane.
            const auto& ev = es.eigenvalues();
            double span = std::max(ev(2), 1e-300);
            if (ev(1) < 1e-10 * span) continue;
            Eigen::Vector3d nv = es.eigenvectors().col(0);
            Vec3 n{nv(0), nv(1), nv(2)};
            Vec3 pc = backproject(x, y, d.at(x, y), k);
            double s = n.dot(pc);
            if (std::fabs(s) < 1e-12) continue;  // plane through the origin
            if (s < 0.0) n = -n;
            out.set(x, y, n.normalized());
        }
    return out;
}

PointCloud pointcloud_from_depth(const DepthMap& d, const Intrinsics& k,
                                 const Grid<std::array<uint8_t, 3>>* color) {
    k.validate();
    PointCloud pc;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            if (!d.is_valid(x, y)) continue;
            pc.points.push_back(backproject(x, y, d.at(x, y), k));
            if (color) pc.colors.push_back(color->at(x, y));
        }
    return pc;
}

}  // namespace ndg
