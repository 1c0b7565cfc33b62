// ndg: command-line front end for the normal-distance depth toolkit.
//
// Exit codes: 0 success, 2 usage/validation error, 1 internal error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ndg/camera.hpp"
#include "ndg/config.hpp"
#include "ndg/gradcheck.hpp"
#include "ndg/io.hpp"
#include "ndg/losses.hpp"
#include "ndg/metrics.hpp"
#include "ndg/refinement.hpp"
#include "ndg/segmentation.hpp"
#include "ndg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ndg;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    std::map<std::string, std::string> kv;
    for (const auto& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
        kv[o.substr(0, eq)] = o.substr(eq + 1);
    }
    apply_config(cfg, kv);
    return cfg;
}

void echo_config(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    atomic_write(out_dir / "effective_config.txt", cfg.serialize());
}

std::string read_text(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw UsageError("cannot open " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int cmd_synth(const std::string& spec_path, const fs::path& out_dir, const RunConfig& cfg) {
    SceneSpec spec;
    PlanarScene scene;
    try {
        spec = spec_path.empty() ? default_scene_spec() : SceneSpec::parse(read_text(spec_path));
        scene = generate(spec);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    echo_config(cfg, out_dir);
    write_pfm(pfm_from_depthmap(scene.depth), out_dir / "depth.pfm");
    write_pfm(pfm_from_normalmap(scene.normal), out_dir / "normal.pfm");
    write_pfm(pfm_from_distancemap(scene.distance), out_dir / "distance.pfm");
    write_labels_pgm(scene.assignment.labels, spec.width, spec.height, out_dir / "labels.pgm");
    write_intrinsics(spec.k, out_dir / "intrinsics.txt");
    atomic_write(out_dir / "scene.txt", spec.serialize());
    std::cout << "scene=" << spec.width << "x" << spec.height
              << " planes=" << spec.planes.size() << " out=" << out_dir.string() << "\n";
    return 0;
}

int cmd_nd2d(const fs::path& normal_path, const fs::path& distance_path,
             const fs::path& intrinsics_path, const fs::path& out_path, const RunConfig& cfg) {
    NormalMap n = normalmap_from_pfm(read_pfm(normal_path));
    DistanceMap dist = distancemap_from_pfm(read_pfm(distance_path));
    Intrinsics k = read_intrinsics(intrinsics_path);
    DepthMap d = depth_from_normal_distance(n, dist, k, cfg.tau_den);
    write_pfm(pfm_from_depthmap(d), out_path);
    size_t invalid = 0;
    for (auto v : d.valid)
        if (!v) ++invalid;
    std::cout << "invalid_pixels=" << invalid << " total=" << d.z.size() << "\n";
    return 0;
}

int cmd_d2nd(const fs::path& depth_path, const fs::path& intrinsics_path,
             const fs::path& out_dir, int window, const RunConfig& cfg) {
    echo_config(cfg, out_dir);
    DepthMap d = depthmap_from_pfm(read_pfm(depth_path));
    Intrinsics k = read_intrinsics(intrinsics_path);
    NormalMap n = normal_from_depth(d, k, window);
    DistanceMap dist = distance_from_depth_normal(d, n, k);
    write_pfm(pfm_from_normalmap(n), out_dir / "normal.pfm");
    write_pfm(pfm_from_distancemap(dist), out_dir / "distance.pfm");
    size_t invalid = 0;
    for (auto v : n.valid)
        if (!v) ++invalid;
    std::cout << "invalid_pixels=" << invalid << " total=" << n.n.size() << "\n";
    return 0;
}

int cmd_segment(const fs::path& normal_path, const fs::path& distance_path,
                const fs::path& out_dir, const RunConfig& cfg) {
    NormalMap n = normalmap_from_pfm(read_pfm(normal_path));
    DistanceMap dist = distancemap_from_pfm(read_pfm(distance_path));
    echo_config(cfg, out_dir);
    EdgeList e = geometric_dissimilarity(n, dist);
    SegmentLabels labels = felzenszwalb_segment(e, cfg.felz_k);
    PlaneMask mask = filter_planar_regions(labels, cfg.min_region_size);
    write_labels_pgm(labels.labels, labels.width, labels.height, out_dir / "labels.pgm");
    write_mask_pgm(mask.mask, mask.width, mask.height, out_dir / "mask.pgm");
    write_pfm(pfm_from_grid(max_incident_weight(e)), out_dir / "dissimilarity.pfm");
    std::cout << "segments=" << labels.num_segments() << " retained=" << mask.retained.size()
              << "\n";
    return 0;
}

int cmd_refine(const fs::path& d1_path, const fs::path& d2_path, const std::string& u1_path,
               const std::string& u2_path, const std::string& weights_path,
               const std::string& context_path, bool random_weights, const fs::path& out_dir,
               const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    GruWeights weights;
    if (!weights_path.empty()) {
        weights = load_gru_weights(weights_path, &cfg.refine);
    } else if (random_weights) {
        std::mt19937_64 rng(cfg.seed);
        weights = GruWeights::random(cfg.refine, rng, 0.1);
    } else {
        weights = GruWeights::zeros(cfg.refine);
    }
    echo_config(cfg, out_dir);

    DepthMap d1_full = depthmap_from_pfm(read_pfm(d1_path));
    DepthMap d2_full = depthmap_from_pfm(read_pfm(d2_path));
    if (d1_full.width != d2_full.width || d1_full.height != d2_full.height)
        throw UsageError("refine: depth map shapes differ");

    const int full_h = d1_full.height, full_w = d1_full.width;
    const int qh = std::max(1, full_h / 4), qw = std::max(1, full_w / 4);

    Tape tape;
    auto quarter = [&](const DepthMap& m) {
        DiffTensor t = from_depth_map(m);
        return (m.height == qh && m.width == qw) ? t : bilinear_resize(tape, t, qh, qw);
    };
    DiffTensor d1 = quarter(d1_full);
    DiffTensor d2 = quarter(d2_full);

    auto load_unc = [&](const std::string& p) {
        if (p.empty()) return tape.make(1, qh, qw, 0.5);
        Grid<double> g = grid_from_pfm(read_pfm(p));
        DiffTensor t = DiffTensor::leaf(1, g.height, g.width, g.v);
        return (g.height == qh && g.width == qw) ? t : bilinear_resize(tape, t, qh, qw);
    };
    DiffTensor u1 = load_unc(u1_path);
    DiffTensor u2 = load_unc(u2_path);

    DiffTensor context;
    if (!context_path.empty()) {
        auto tensors = read_tensor_container(context_path);
        if (tensors.empty() || tensors[0].dims.size() != 3)
            throw UsageError("refine: context container must hold one rank-3 tensor");
        const auto& t = tensors[0];
        context = DiffTensor::leaf(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                   static_cast<int>(t.dims[2]), t.data);
        if (context.height() != qh || context.width() != qw)
            throw UsageError("refine: context spatial size must match 1/4 resolution");
        cfg.refine.context_channels = context.channels();
    } else {
        std::mt19937_64 rng(cfg.seed + 1);
        context = DiffTensor::leaf(cfg.refine.context_channels, qh, qw);
        context.fill_random(rng, -1.0, 1.0);
    }

    DiffTensor h0 = tape.make(cfg.refine.hidden_channels, qh, qw, 0.0);
    RefineResult res = refine(tape, d1, d2, u1, u2, context, h0, weights, cfg.refine);
    DiffTensor fused = fuse(tape, res.d1_final, res.d2_final, full_h, full_w);

    for (int s = 0; s < cfg.refine.t_max; ++s) {
        char name[64];
        std::snprintf(name, sizeof(name), "trace_d1_%02d.pfm", s + 1);
        write_pfm(pfm_from_depthmap(to_depth_map(res.trace1[s])), out_dir / name);
        std::snprintf(name, sizeof(name), "trace_d2_%02d.pfm", s + 1);
        write_pfm(pfm_from_depthmap(to_depth_map(res.trace2[s])), out_dir / name);
    }
    write_pfm(pfm_from_depthmap(to_depth_map(res.d1_final)), out_dir / "d1_star.pfm");
    write_pfm(pfm_from_depthmap(to_depth_map(res.d2_final)), out_dir / "d2_star.pfm");
    write_pfm(pfm_from_depthmap(to_depth_map(fused)), out_dir / "fused.pfm");
    std::cout << "iterations=" << cfg.refine.t_max << " quarter=" << qw << "x" << qh << "\n";
    return 0;
}

int cmd_eval(const fs::path& pred_path, const fs::path& gt_path, double cap_min, double cap_max,
             bool benchmark_style, const std::string& csv_path) {
    DepthMap pred = depthmap_from_pfm(read_pfm(pred_path));
    DepthMap gt = depthmap_from_pfm(read_pfm(gt_path));
    MetricReport r;
    try {
        r = evaluate(pred, gt, {cap_min, cap_max}, benchmark_style);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::cout << r.to_key_value();
    if (!csv_path.empty())
        atomic_write(csv_path, MetricReport::csv_header() + "\n" + r.to_csv() + "\n");
    return 0;
}

int cmd_gradcheck(const std::vector<std::string>& components, uint64_t seed) {
    auto names = components.empty() ? gradcheck_components() : components;
    std::vector<GradCheckResult> results;
    try {
        results = run_gradchecks(names, seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    bool all = true;
    for (const auto& r : results) {
        std::printf("%-20s %12.3e  %s\n", r.component.c_str(), r.max_rel_err,
                    r.passed ? "pass" : "FAIL");
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

int cmd_ply(const fs::path& depth_path, const fs::path& intrinsics_path,
            const std::string& rgb_path, const fs::path& out_path, bool binary) {
    DepthMap d = depthmap_from_pfm(read_pfm(depth_path));
    Intrinsics k = read_intrinsics(intrinsics_path);
    PointCloud cloud;
    if (!rgb_path.empty()) {
        PfmImage rgb = read_pfm(rgb_path);
        if (rgb.channels != 3 || rgb.width != d.width || rgb.height != d.height)
            throw UsageError("ply: rgb image must be 3-channel and match the depth size");
        Grid<std::array<uint8_t, 3>> color(d.width, d.height);
        for (size_t i = 0; i < color.v.size(); ++i)
            for (int c = 0; c < 3; ++c) {
                float v = rgb.data[3 * i + c];
                color.v[i][c] = static_cast<uint8_t>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f);
            }
        cloud = pointcloud_from_depth(d, k, &color);
    } else {
        cloud = pointcloud_from_depth(d, k);
    }
    write_ply(cloud, out_path, binary);
    std::cout << "vertices=" << cloud.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normal-distance depth toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "override a config key, e.g. --set felz_k=0.5");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic piecewise-planar scene");
    std::string synth_spec;
    std::string synth_out;
    synth->add_option("--spec", synth_spec, "scene spec file (default: built-in 3-plane scene)");
    synth->add_option("--out", synth_out, "output directory")->required();

    // nd2d
    auto* nd2d = app.add_subcommand("nd2d", "depth from normal and distance maps");
    std::string nd2d_n, nd2d_d, nd2d_k, nd2d_out;
    nd2d->add_option("--normal", nd2d_n)->required();
    nd2d->add_option("--distance", nd2d_d)->required();
    nd2d->add_option("--intrinsics", nd2d_k)->required();
    nd2d->add_option("--out", nd2d_out)->required();

    // d2nd
    auto* d2nd = app.add_subcommand("d2nd", "normal and distance maps from depth");
    std::string d2nd_depth, d2nd_k, d2nd_out;
    int d2nd_window = 5;
    d2nd->add_option("--depth", d2nd_depth)->required();
    d2nd->add_option("--intrinsics", d2nd_k)->required();
    d2nd->add_option("--out", d2nd_out)->required();
    d2nd->add_option("--window", d2nd_window, "plane-fit window (odd, >= 3)");

    // segment
    auto* seg = app.add_subcommand("segment", "planar-region detection");
    std::string seg_n, seg_d, seg_out;
    seg->add_option("--normal", seg_n)->required();
    seg->add_option("--distance", seg_d)->required();
    seg->add_option("--out", seg_out)->required();

    // refine
    auto* ref = app.add_subcommand("refine", "iterative depth refinement");
    std::string ref_d1, ref_d2, ref_u1, ref_u2, ref_w, ref_ctx, ref_out;
    bool ref_random = false;
    ref->add_option("--d1", ref_d1)->required();
    ref->add_option("--d2", ref_d2)->required();
    ref->add_option("--u1", ref_u1, "uncertainty map (default: constant 0.5)");
    ref->add_option("--u2", ref_u2);
    ref->add_option("--weights", ref_w, "weight container file");
    ref->add_option("--context", ref_ctx, "context tensor container");
    ref->add_flag("--random", ref_random, "draw random weights from the seed");
    ref->add_option("--out", ref_out)->required();

    // eval
    auto* ev = app.add_subcommand("eval", "depth evaluation metrics");
    std::string ev_pred, ev_gt, ev_csv;
    double ev_min = 0.0, ev_max = 80.0;
    bool ev_bench = false;
    ev->add_option("--pred", ev_pred)->required();
    ev->add_option("--gt", ev_gt)->required();
    ev->add_option("--cap-min", ev_min);
    ev->add_option("--cap-max", ev_max);
    ev->add_flag("--benchmark-style", ev_bench, "percentage-form squared relative error");
    ev->add_option("--csv", ev_csv, "also write a CSV row here");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::vector<std::string> gc_components;
    gc->add_option("components", gc_components, "component names (default: all)");

    // ply
    auto* ply = app.add_subcommand("ply", "depth map to point cloud");
    std::string ply_depth, ply_k, ply_rgb, ply_out;
    bool ply_ascii = false;
    ply->add_option("--depth", ply_depth)->required();
    ply->add_option("--intrinsics", ply_k)->required();
    ply->add_option("--rgb", ply_rgb, "3-channel PFM color image");
    ply->add_option("--out", ply_out)->required();
    ply->add_flag("--ascii", ply_ascii);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = make_config(config_path, overrides);
        if (*synth) return cmd_synth(synth_spec, synth_out, cfg);
        if (*nd2d) return cmd_nd2d(nd2d_n, nd2d_d, nd2d_k, nd2d_out, cfg);
        if (*d2nd) return cmd_d2nd(d2nd_depth, d2nd_k, d2nd_out, d2nd_window, cfg);
        if (*seg) return cmd_segment(seg_n, seg_d, seg_out, cfg);
        if (*ref)
            return cmd_refine(ref_d1, ref_d2, ref_u1, ref_u2, ref_w, ref_ctx, ref_random, ref_out,
                              cfg);
        if (*ev) return cmd_eval(ev_pred, ev_gt, ev_min, ev_max, ev_bench, ev_csv);
        if (*gc) return cmd_gradcheck(gc_components, cfg.seed);
        if (*ply) return cmd_ply(ply_depth, ply_k, ply_rgb, ply_out, !ply_ascii);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
