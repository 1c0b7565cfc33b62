#include "ndg/synthetic.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ndg {

SceneSpec SceneSpec::parse(const std::string& text) {
    SceneSpec s;
    s.planes.clear();
    std::istringstream in(text);
    std::string line;
    bool have_size = false;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "size") {
            if (!(ls >> s.width >> s.height) || s.width < 1 || s.height < 1)
                throw std::invalid_argument("scene spec: bad size line");
            have_size = true;
        } else if (tok == "intrinsics") {
            if (!(ls >> s.k.fx >> s.k.fy >> s.k.cx >> s.k.cy))
                throw std::invalid_argument("scene spec: bad intrinsics line");
            s.k.validate();
        } else if (tok == "layout") {
            std::string mode;
            ls >> mode;
            if (mode == "tiles")
                s.layout = SceneLayout::Tiles;
            else if (mode == "nearest")
                s.layout = SceneLayout::Nearest;
            else
                throw std::invalid_argument("scene spec: unknown layout '" + mode + "'");
        } else if (tok == "plane") {
            Plane p;
            if (!(ls >> p.n.x >> p.n.y >> p.n.z >> p.d))
                throw std::invalid_argument("scene spec: bad plane line");
            if (!(p.d > 0.0)) throw std::invalid_argument("scene spec: plane distance must be positive");
            if (p.n.norm() <= 0.0) throw std::invalid_argument("scene spec: zero plane normal");
            p.n = p.n.normalized();
            s.planes.push_back(p);
        } else {
            throw std::invalid_argument("scene spec: unknown directive '" + tok + "'");
        }
    }
    if (!have_size || s.planes.empty())
        throw std::invalid_argument("scene spec: need a size line and at least one plane");
    return s;
}

std::string SceneSpec::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "size " << width << ' ' << height << '\n';
    os << "intrinsics " << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << '\n';
    os << "layout " << (layout == SceneLayout::Tiles ? "tiles" : "nearest") << '\n';
    for (const auto& p : planes)
        os << "plane " << p.n.x << ' ' << p.n.y << ' ' << p.n.z << ' ' << p.d << '\n';
    return os.str();
}

PlanarScene generate(const SceneSpec& spec) {
    spec.k.validate();
    if (spec.planes.empty()) throw std::invalid_argument("generate: no planes");
    const int w = spec.width, h = spec.height;
    const int np = static_cast<int>(spec.planes.size());

    PlanarScene sc;
    sc.spec = spec;
    sc.depth = DepthMap(w, h);
    sc.normal = NormalMap(w, h);
    sc.distance = DistanceMap(w, h);
    sc.assignment.width = w;
    sc.assignment.height = h;
    sc.assignment.labels.assign(static_cast<size_t>(w) * h, 0);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Vec3 ray = spec.k.ray(x, y);
            int which = -1;
            double depth = 0.0;
            if (spec.layout == SceneLayout::Tiles) {
                which = std::min(x * np / w, np - 1);
                const Plane& p = spec.planes[which];
                double den = p.n.dot(ray);
                if (std::fabs(den) <= 1e-3)
                    throw std::runtime_error("generate: degenerate plane over its assigned region");
                depth = p.d / den;
                if (!(depth > 0.0))
                    throw std::runtime_error("generate: plane behind camera over its assigned region");
            } else {
                for (int i = 0; i < np; ++i) {
                    double den = spec.planes[i].n.dot(ray);
                    if (std::fabs(den) <= 1e-3) continue;
                    double d = spec.planes[i].d / den;
                    if (d > 0.0 && (which < 0 || d < depth)) {
                        which = i;
                        depth = d;
                    }
                }
                if (which < 0)
                    throw std::runtime_error("generate: no visible plane along a pixel ray");
            }
            const Plane& p = spec.planes[which];
            sc.depth.set(x, y, depth);
            sc.normal.set(x, y, p.n);
            sc.distance.set(x, y, p.d);
            sc.assignment.labels[static_cast<size_t>(y) * w + x] = which;
        }

    sc.assignment.counts.assign(np, 0);
    for (int lbl : sc.assignment.labels) ++sc.assignment.counts[lbl];
    return sc;
}

SceneSpec default_scene_spec() {
    SceneSpec s;
    // Floor-like, tilted, wall-like; each strip well clear of degeneracy.
    s.planes = {
        {Vec3{0.0, -std::sin(0.9), std::cos(0.9)}.normalized(), 1.5},
        {Vec3{0.2, -0.3, 1.0}.normalized(), 2.0},
        {Vec3{-0.15, 0.1, 1.0}.normalized(), 2.5},
    };
    return s;
}

SceneSpec random_scene_spec(int width, int height, int n_planes, uint64_t seed) {
    if (n_planes < 1) throw std::invalid_argument("random_scene_spec: need at least one plane");
    SceneSpec s;
    s.width = width;
    s.height = height;
    s.k = Intrinsics{0.8 * width, 0.8 * width, (width - 1) / 2.0, (height - 1) / 2.0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tilt(-0.35, 0.35);
    std::uniform_real_distribution<double> dist(1.0, 5.0);
    for (int i = 0; i < n_planes; ++i) {
        // Normals in a cone around the optical axis: non-degenerate for every
        // ray of a modest field of view.
        Plane p;
        p.n = Vec3{tilt(rng), tilt(rng), 1.0}.normalized();
        p.d = dist(rng);
        s.planes.push_back(p);
    }
    return s;
}

NoisyMaps perturb(const PlanarScene& scene, const NoiseModel& noise, uint64_t seed) {
    if (noise.depth_sigma < 0.0 || noise.normal_angle_sigma < 0.0)
        throw std::invalid_argument("perturb: sigma must be non-negative");
    NoisyMaps out;
    out.depth = scene.depth;
    out.normal = scene.normal;
    std::mt19937_64 rng(seed);
    if (noise.depth_sigma > 0.0) {
        std::normal_distribution<double> g(0.0, noise.depth_sigma);
        for (size_t i = 0; i < out.depth.z.size(); ++i)
            if (out.depth.valid[i]) out.depth.z[i] = std::max(out.depth.z[i] + g(rng), 1e-6);
    }
    if (noise.normal_angle_sigma > 0.0) {
        std::normal_distribution<double> g(0.0, noise.normal_angle_sigma);
        std::uniform_real_distribution<double> u(0.0, 2.0 * 3.14159265358979323846);
        for (size_t i = 0; i < out.normal.n.size(); ++i) {
            if (!out.normal.valid[i]) continue;
            Vec3 n = out.normal.n[i];
            // Rotate by a small angle about a random axis orthogonal to n.
            Vec3 ref = std::fabs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
            Vec3 t1 = cross(n, ref).normalized();
            Vec3 t2 = cross(n, t1);
            double phi = u(rng), ang = g(rng);
            Vec3 axis_dir = t1 * std::cos(phi) + t2 * std::sin(phi);
            Vec3 rotated = n * std::cos(ang) + axis_dir * std::sin(ang);
            out.normal.n[i] = rotated.normalized();
        }
    }
    return out;
}

}  // namespace ndg
