#include "ndg/refinement.hpp"

#include <stdexcept>

namespace ndg {

void RefineConfig::validate() const {
    if (proj_channels < 1 || context_channels < 1 || hidden_channels < 1)
        throw std::invalid_argument("RefineConfig: channel counts must be >= 1");
    if (t_max < 1) throw std::invalid_argument("RefineConfig: t_max must be >= 1");
    if (!(depth_floor > 0.0)) throw std::invalid_argument("RefineConfig: depth_floor must be positive");
}

GruWeights GruWeights::zeros(const RefineConfig& cfg) {
    cfg.validate();
    GruWeights w;
    const int in_ch = cfg.proj_channels + cfg.context_channels;
    w.proj1 = SepConvWeights::zeros(5, cfg.proj_channels);
    w.proj2 = SepConvWeights::zeros(cfg.proj_channels, cfg.proj_channels);
    w.wz = SepConvWeights::zeros(cfg.hidden_channels + in_ch, cfg.hidden_channels);
    w.wr = SepConvWeights::zeros(cfg.hidden_channels + in_ch, cfg.hidden_channels);
    w.wh = SepConvWeights::zeros(cfg.hidden_channels + in_ch, cfg.hidden_channels);
    w.head1 = SepConvWeights::zeros(cfg.hidden_channels, 1);
    w.head2 = SepConvWeights::zeros(cfg.hidden_channels, 1);
    return w;
}

GruWeights GruWeights::random(const RefineConfig& cfg, std::mt19937_64& rng, double scale) {
    GruWeights w = zeros(cfg);
    for (auto* p : w.params())
        if (!p->empty()) p->fill_random(rng, -scale, scale);
    return w;
}

std::vector<DiffTensor*> GruWeights::params() {
    std::vector<DiffTensor*> out;
    for (auto [name, p] : named_params()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, DiffTensor*>> GruWeights::named_params() {
    std::vector<std::pair<std::string, DiffTensor*>> out;
    auto push = [&out](const std::string& base, SepConvWeights& w) {
        out.emplace_back(base + ".depthwise", &w.depthwise);
        out.emplace_back(base + ".pointwise", &w.pointwise);
        out.emplace_back(base + ".bias", &w.bias);
    };
    push("proj1", proj1);
    push("proj2", proj2);
    push("wz", wz);
    push("wr", wr);
    push("wh", wh);
    push("head1", head1);
    push("head2", head2);
    if (!init_proj.empty()) out.emplace_back("init_proj", &init_proj);
    return out;
}

void GruWeights::zero_grad() {
    for (auto* p : params())
        if (!p->empty()) p->zero_grad();
}

DiffTensor init_hidden(Tape& t, const DiffTensor& pen1, const DiffTensor& pen2, GruWeights& w,
                       const RefineConfig& cfg) {
    if (pen1.height() != pen2.height() || pen1.width() != pen2.width())
        throw std::invalid_argument("init_hidden: spatial shape mismatch");
    DiffTensor cat = concat_channels(t, {pen1, pen2});
    if (cat.channels() != cfg.hidden_channels) {
        if (w.init_proj.empty())
            w.init_proj = DiffTensor::leaf(cfg.hidden_channels, cat.channels(), 1);
        else if (w.init_proj.height() != cat.channels())
            throw std::invalid_argument("init_hidden: init projection channel mismatch");
        // 1×1 pointwise projection, bias-free.
        const int h = cat.height(), wd = cat.width(), ci = cat.channels(), co = cfg.hidden_channels;
        DiffTensor proj = t.make(co, h, wd);
        for (int o = 0; o < co; ++o)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < wd; ++x) {
                    double acc = 0.0;
                    for (int c = 0; c < ci; ++c) acc += w.init_proj.at(o, c, 0) * cat.at(c, y, x);
                    proj.at(o, y, x) = acc;
                }
        auto cn = cat;
        auto pw = w.init_proj;
        t.record([cn, pw, proj]() mutable {
            const int ci = cn.channels(), co = proj.channels();
            const int h = cn.height(), wd = cn.width();
            for (int o = 0; o < co; ++o)
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < wd; ++x) {
                        double go = proj.grad_at(o, y, x);
                        if (go == 0.0) continue;
                        for (int c = 0; c < ci; ++c) {
                            pw.grad()[static_cast<size_t>(o) * ci + c] += go * cn.at(c, y, x);
                            cn.grad()[(static_cast<size_t>(c) * h + y) * wd + x] +=
                                go * pw.at(o, c, 0);
                        }
                    }
        });
        cat = proj;
    }
    return activation(t, cat, Activation::Tanh);
}

DiffTensor build_input(Tape& t, const RefinementInputs& in, GruWeights& w) {
    DiffTensor stacked = concat_channels(t, {in.d1, in.d2, in.u1, in.u2, in.dif});
    DiffTensor f = conv2d_separable(t, stacked, w.proj1);
    f = activation(t, f, Activation::Tanh);
    f = conv2d_separable(t, f, w.proj2);
    return concat_channels(t, {f, in.context});
}

DiffTensor conv_gru_step(Tape& t, const DiffTensor& h, const DiffTensor& input, GruWeights& w) {
    DiffTensor hi = concat_channels(t, {h, input});
    DiffTensor z = activation(t, conv2d_separable(t, hi, w.wz), Activation::Sigmoid);
    DiffTensor r = activation(t, conv2d_separable(t, hi, w.wr), Activation::Sigmoid);
    DiffTensor rh = mul(t, r, h);
    DiffTensor cand_in = concat_channels(t, {rh, input});
    DiffTensor cand = activation(t, conv2d_separable(t, cand_in, w.wh), Activation::Tanh);
    // h' = (1 - z) ⊙ h + z ⊙ ĥ
    DiffTensor one_minus_z = add_const(t, scale(t, z, -1.0), 1.0);
    return add(t, mul(t, one_minus_z, h), mul(t, z, cand));
}

std::pair<DiffTensor, DiffTensor> depth_update_head(Tape& t, const DiffTensor& h, GruWeights& w) {
    return {conv2d_separable(t, h, w.head1), conv2d_separable(t, h, w.head2)};
}

RefineResult refine(Tape& t, const DiffTensor& d1, const DiffTensor& d2, const DiffTensor& u1,
                    const DiffTensor& u2, const DiffTensor& context, const DiffTensor& h0,
                    GruWeights& w, const RefineConfig& cfg) {
    cfg.validate();
    RefineResult res;
    DiffTensor cur1 = d1, cur2 = d2, h = h0;
    for (int step = 0; step < cfg.t_max; ++step) {
        RefinementInputs in;
        in.d1 = cur1;
        in.d2 = cur2;
        in.u1 = u1;
        in.u2 = u2;
        in.dif = abs_op(t, sub(t, cur1, cur2));
        in.context = context;
        DiffTensor input = build_input(t, in, w);
        h = conv_gru_step(t, h, input, w);
        auto [dd1, dd2] = depth_update_head(t, h, w);
        cur1 = clamp_min(t, add(t, cur1, dd1), cfg.depth_floor);
        cur2 = clamp_min(t, add(t, cur2, dd2), cfg.depth_floor);
        res.trace1.push_back(cur1);
        res.trace2.push_back(cur2);
    }
    res.d1_final = cur1;
    res.d2_final = cur2;
    res.state.h = h;
    return res;
}

DiffTensor fuse(Tape& t, const DiffTensor& d1_star, const DiffTensor& d2_star, int full_h,
                int full_w) {
    DiffTensor a = bilinear_resize(t, d1_star, full_h, full_w);
    DiffTensor b = bilinear_resize(t, d2_star, full_h, full_w);
    return scale(t, add(t, a, b), 0.5);
}

DiffTensor context_from_rgb(Tape& t, const DiffTensor& rgb, const RefineConfig& cfg,
                            uint64_t seed) {
    if (rgb.channels() != 3) throw std::invalid_argument("context_from_rgb: expected 3 channels");
    std::mt19937_64 rng(seed);
    auto c1 = SepConvWeights::random(3, cfg.context_channels, rng, 0.2);
    auto c2 = SepConvWeights::random(cfg.context_channels, cfg.context_channels, rng, 0.2);
    DiffTensor q = bilinear_resize(t, rgb, std::max(1, rgb.height() / 4),
                                   std::max(1, rgb.width() / 4));
    q = activation(t, conv2d_separable(t, q, c1), Activation::Tanh);
    q = activation(t, conv2d_separable(t, q, c2), Activation::Tanh);
    return q;
}

DepthMap to_depth_map(const DiffTensor& t) {
    if (t.channels() != 1) throw std::invalid_argument("to_depth_map: expected 1 channel");
    DepthMap d(t.width(), t.height());
    for (int y = 0; y < t.height(); ++y)
        for (int x = 0; x < t.width(); ++x) {
            double v = t.at(0, y, x);
            if (v > 0.0 && std::isfinite(v)) d.set(x, y, v);
        }
    return d;
}

DiffTensor from_depth_map(const DepthMap& d) {
    DiffTensor t = DiffTensor::leaf(1, d.height, d.width);
    for (size_t i = 0; i < d.z.size(); ++i) t.values()[i] = d.z[i];
    return t;
}

}  // namespace ndg
