#include "ndg/gradcheck.hpp"

#include <random>
#include <stdexcept>

#include "ndg/losses.hpp"
#include "ndg/refinement.hpp"
#include "ndg/synthetic.hpp"
#include "ndg/tensor.hpp"

namespace ndg {

namespace {

DepthMap random_depth_map(int w, int h, std::mt19937_64& rng, double lo = 0.5, double hi = 4.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    DepthMap m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, d(rng));
    return m;
}

NormalMap random_normal_map(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-0.4, 0.4);
    NormalMap m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, Vec3{d(rng), d(rng), 1.0}.normalized());
    return m;
}

double check_conv(std::mt19937_64& rng) {
    auto x = DiffTensor::leaf(2, 8, 8);
    x.fill_random(rng, -1.0, 1.0);
    auto w = SepConvWeights::random(2, 3, rng, 0.5);
    auto build = [&](Tape& t) {
        return sum_all(t, activation(t, conv2d_separable(t, x, w), Activation::Tanh));
    };
    return finite_diff_check(build, {x, w.depthwise, w.pointwise, w.bias});
}

double check_activation(std::mt19937_64& rng) {
    auto x = DiffTensor::leaf(2, 6, 6);
    x.fill_random(rng, -2.0, 2.0);
    auto build = [&](Tape& t) {
        auto s = activation(t, x, Activation::Sigmoid);
        auto h = activation(t, x, Activation::Tanh);
        return sum_all(t, mul(t, s, h));
    };
    return finite_diff_check(build, {x});
}

double check_resize(std::mt19937_64& rng) {
    auto x = DiffTensor::leaf(2, 4, 5);
    x.fill_random(rng, -1.0, 1.0);
    auto build = [&](Tape& t) {
        auto up = bilinear_resize(t, x, 9, 11);
        return sum_all(t, mul(t, up, up));
    };
    return finite_diff_check(build, {x});
}

double check_silog(std::mt19937_64& rng) {
    DepthMap gt = random_depth_map(8, 8, rng);
    auto pred = DiffTensor::leaf(1, 8, 8);
    std::uniform_real_distribution<double> d(0.5, 4.0);
    for (double& v : pred.values()) v = d(rng);
    auto build = [&](Tape& t) { return silog_loss(t, pred, gt); };
    return finite_diff_check(build, {pred});
}

double check_cosine(std::mt19937_64& rng) {
    NormalMap gt = random_normal_map(6, 6, rng);
    auto pred = DiffTensor::leaf(3, 6, 6);
    pred.fill_random(rng, -1.0, 1.0);
    for (double& v : pred.values()) v += (v >= 0 ? 0.2 : -0.2);  // keep away from zero norm
    auto build = [&](Tape& t) { return normal_cosine_loss(t, pred, gt); };
    return finite_diff_check(build, {pred});
}

double check_l1_distance(std::mt19937_64& rng) {
    DistanceMap gt(6, 6);
    std::uniform_real_distribution<double> d(0.5, 3.0);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) gt.set(x, y, d(rng));
    auto pred = DiffTensor::leaf(1, 6, 6);
    for (double& v : pred.values()) v = d(rng);
    auto build = [&](Tape& t) { return distance_l1_loss(t, pred, gt); };
    return finite_diff_check(build, {pred});
}

double check_uncertainty(std::mt19937_64& rng) {
    Grid<double> t1(6, 6), t2(6, 6);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (auto& v : t1.v) v = d(rng);
    for (auto& v : t2.v) v = d(rng);
    auto u1 = DiffTensor::leaf(1, 6, 6);
    auto u2 = DiffTensor::leaf(1, 6, 6);
    for (double& v : u1.values()) v = d(rng);
    for (double& v : u2.values()) v = d(rng);
    auto build = [&](Tape& t) { return uncertainty_loss(t, u1, u2, t1, t2); };
    return finite_diff_check(build, {u1, u2});
}

double check_plane_consistency(std::mt19937_64& rng) {
    const int w = 8, h = 8;
    SegmentLabels labels;
    labels.width = w;
    labels.height = h;
    labels.labels.assign(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = w / 2; x < w; ++x) labels.labels[static_cast<size_t>(y) * w + x] = 1;
    labels.counts = {w * h / 2, w * h / 2};
    PlaneMask mask = filter_planar_regions(labels, 4);

    auto n = DiffTensor::leaf(3, h, w);
    auto dist = DiffTensor::leaf(1, h, w);
    n.fill_random(rng, -1.0, 1.0);
    dist.fill_random(rng, 0.5, 3.0);
    auto build = [&](Tape& t) { return plane_consistency_loss(t, n, dist, mask, labels); };
    return finite_diff_check(build, {n, dist});
}

struct TinyRefineFixture {
    RefineConfig cfg;
    GruWeights w;
    DiffTensor d1, d2, u1, u2, context, pen1, pen2;
    DepthMap gt;

    explicit TinyRefineFixture(std::mt19937_64& rng) {
        cfg.proj_channels = 2;
        cfg.context_channels = 2;
        cfg.hidden_channels = 4;
        cfg.t_max = 2;
        w = GruWeights::random(cfg, rng, 0.3);
        const int hh = 5, ww = 5;
        gt = random_depth_map(ww, hh, rng);
        d1 = DiffTensor::leaf(1, hh, ww);
        d2 = DiffTensor::leaf(1, hh, ww);
        std::uniform_real_distribution<double> d(0.8, 3.0);
        for (double& v : d1.values()) v = d(rng);
        for (double& v : d2.values()) v = d(rng);
        u1 = DiffTensor::leaf(1, hh, ww);
        u2 = DiffTensor::leaf(1, hh, ww);
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        for (double& v : u1.values()) v = ud(rng);
        for (double& v : u2.values()) v = ud(rng);
        context = DiffTensor::leaf(cfg.context_channels, hh, ww);
        context.fill_random(rng, -1.0, 1.0);
        pen1 = DiffTensor::leaf(cfg.hidden_channels / 2, hh, ww);
        pen2 = DiffTensor::leaf(cfg.hidden_channels / 2, hh, ww);
        pen1.fill_random(rng, -1.0, 1.0);
        pen2.fill_random(rng, -1.0, 1.0);
    }

    std::vector<DiffTensor> all_params() {
        std::vector<DiffTensor> out;
        for (auto* p : w.params())
            if (!p->empty()) out.push_back(*p);
        out.push_back(d1);
        out.push_back(d2);
        return out;
    }
};

double check_build_input(std::mt19937_64& rng) {
    TinyRefineFixture f(rng);
    auto build = [&](Tape& t) {
        RefinementInputs in;
        in.d1 = f.d1;
        in.d2 = f.d2;
        in.u1 = f.u1;
        in.u2 = f.u2;
        in.dif = abs_op(t, sub(t, f.d1, f.d2));
        in.context = f.context;
        auto i = build_input(t, in, f.w);
        return sum_all(t, mul(t, i, i));
    };
    return finite_diff_check(build, {f.d1, f.u1, f.w.proj1.depthwise, f.w.proj2.pointwise});
}

double check_gru_step(std::mt19937_64& rng) {
    TinyRefineFixture f(rng);
    auto h0 = DiffTensor::leaf(f.cfg.hidden_channels, 5, 5);
    h0.fill_random(rng, -0.9, 0.9);
    auto input = DiffTensor::leaf(f.cfg.proj_channels + f.cfg.context_channels, 5, 5);
    input.fill_random(rng, -1.0, 1.0);
    auto build = [&](Tape& t) { return sum_all(t, conv_gru_step(t, h0, input, f.w)); };
    std::vector<DiffTensor> wrt = {h0, input};
    for (auto* p : f.w.wz.params()) wrt.push_back(*p);
    for (auto* p : f.w.wr.params()) wrt.push_back(*p);
    for (auto* p : f.w.wh.params()) wrt.push_back(*p);
    return finite_diff_check(build, wrt);
}

double check_update_head(std::mt19937_64& rng) {
    TinyRefineFixture f(rng);
    auto h = DiffTensor::leaf(f.cfg.hidden_channels, 5, 5);
    h.fill_random(rng, -0.9, 0.9);
    auto build = [&](Tape& t) {
        auto [dd1, dd2] = depth_update_head(t, h, f.w);
        auto p1 = clamp_min(t, add(t, f.d1, dd1), f.cfg.depth_floor);
        return silog_loss(t, p1, f.gt);
    };
    return finite_diff_check(build, {h, f.w.head1.depthwise, f.w.head1.pointwise, f.w.head1.bias});
}

double check_refine_overall(std::mt19937_64& rng) {
    TinyRefineFixture f(rng);
    NormalMap gt_n = random_normal_map(5, 5, rng);
    DistanceMap gt_d(5, 5);
    std::uniform_real_distribution<double> dd(0.5, 3.0);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) gt_d.set(x, y, dd(rng));
    auto pred_n = DiffTensor::leaf(3, 5, 5);
    pred_n.fill_random(rng, 0.2, 1.0);
    auto pred_d = DiffTensor::leaf(1, 5, 5);
    for (double& v : pred_d.values()) v = dd(rng);

    SegmentLabels labels;
    labels.width = 5;
    labels.height = 5;
    labels.labels.assign(25, 0);
    labels.counts = {25};
    PlaneMask mask = filter_planar_regions(labels, 4);

    Grid<double> ut1(5, 5), ut2(5, 5);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (auto& v : ut1.v) v = ud(rng);
    for (auto& v : ut2.v) v = ud(rng);

    LossWeights lw;
    lw.m_steps = f.cfg.t_max;

    auto build = [&](Tape& t) {
        auto h0 = init_hidden(t, f.pen1, f.pen2, f.w, f.cfg);
        auto res = refine(t, f.d1, f.d2, f.u1, f.u2, f.context, h0, f.w, f.cfg);
        auto l_depth = multiscale_depth_loss(t, res.trace1, res.trace2, f.gt, lw);
        auto l_norm = normal_cosine_loss(t, pred_n, gt_n);
        auto l_dist = distance_l1_loss(t, pred_d, gt_d);
        auto l_unc = uncertainty_loss(t, f.u1, f.u2, ut1, ut2);
        auto l_pc = plane_consistency_loss(t, pred_n, pred_d, mask, labels);
        return overall_loss(t, l_depth, l_norm, l_dist, l_unc, l_pc, lw);
    };
    std::vector<DiffTensor> wrt = f.all_params();
    wrt.push_back(f.pen1);
    wrt.push_back(pred_n);
    wrt.push_back(pred_d);
    wrt.push_back(f.u1);
    return finite_diff_check(build, wrt);
}

}  // namespace

std::vector<std::string> gradcheck_components() {
    return {"conv",        "activation",  "resize",      "silog",
            "cosine",      "l1_distance", "uncertainty", "plane_consistency",
            "build_input", "gru_step",    "update_head", "refine_overall"};
}

std::vector<GradCheckResult> run_gradchecks(const std::vector<std::string>& components,
                                            uint64_t seed) {
    std::vector<GradCheckResult> out;
    for (const auto& name : components) {
        std::mt19937_64 rng(seed ^ std::hash<std::string>{}(name));
        GradCheckResult r;
        r.component = name;
        if (name == "conv") r.max_rel_err = check_conv(rng);
        else if (name == "activation") r.max_rel_err = check_activation(rng);
        else if (name == "resize") r.max_rel_err = check_resize(rng);
        else if (name == "silog") r.max_rel_err = check_silog(rng);
        else if (name == "cosine") r.max_rel_err = check_cosine(rng);
        else if (name == "l1_distance") r.max_rel_err = check_l1_distance(rng);
        else if (name == "uncertainty") r.max_rel_err = check_uncertainty(rng);
        else if (name == "plane_consistency") r.max_rel_err = check_plane_consistency(rng);
        else if (name == "build_input") r.max_rel_err = check_build_input(rng);
        else if (name == "gru_step") r.max_rel_err = check_gru_step(rng);
        else if (name == "update_head") r.max_rel_err = check_update_head(rng);
        else if (name == "refine_overall") {
            r.max_rel_err = check_refine_overall(rng);
            r.tolerance = 1e-4;
        } else {
            throw std::invalid_argument("unknown gradcheck component '" + name + "'");
        }
        r.passed = r.max_rel_err < r.tolerance;
        out.push_back(r);
    }
    return out;
}

}  // namespace ndg
