#include "ndg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ndg {

namespace {

std::shared_ptr<detail::TensorNode> new_node(int c, int h, int w, double fill) {
    if (c < 1 || h < 1 || w < 1)
        throw std::invalid_argument("DiffTensor: all dimensions must be >= 1");
    auto n = std::make_shared<detail::TensorNode>();
    n->c = c;
    n->h = h;
    n->w = w;
    n->v.assign(static_cast<size_t>(c) * h * w, fill);
    n->g.assign(n->v.size(), 0.0);
    return n;
}

void check_finite(const DiffTensor& t, const char* op) {
    for (double x : t.values())
        if (!std::isfinite(x))
            throw std::runtime_error(std::string(op) + ": non-finite value produced");
}

void require_same_shape(const DiffTensor& a, const DiffTensor& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

DiffTensor DiffTensor::leaf(int c, int h, int w, double fill) {
    return DiffTensor(new_node(c, h, w, fill));
}

DiffTensor DiffTensor::leaf(int c, int h, int w, std::vector<double> values) {
    auto t = DiffTensor(new_node(c, h, w, 0.0));
    if (values.size() != t.size())
        throw std::invalid_argument("DiffTensor::leaf: value count does not match shape");
    t.node_->v = std::move(values);
    return t;
}

double DiffTensor::item() const {
    if (size() != 1) throw std::logic_error("DiffTensor::item: tensor is not scalar");
    return node_->v[0];
}

void DiffTensor::zero_grad() { std::fill(node_->g.begin(), node_->g.end(), 0.0); }

void DiffTensor::fill_random(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& x : node_->v) x = dist(rng);
}

DiffTensor Tape::make(int c, int h, int w, double fill) {
    return DiffTensor(new_node(c, h, w, fill));
}

void Tape::backward(const DiffTensor& scalar_out) {
    if (scalar_out.size() != 1)
        throw std::logic_error("Tape::backward: output must be scalar");
    scalar_out.node()->g[0] = 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

// --- SepConvWeights ---------------------------------------------------------

SepConvWeights SepConvWeights::zeros(int in_ch, int out_ch) {
    SepConvWeights w;
    w.depthwise = DiffTensor::leaf(in_ch, 5, 5);
    w.pointwise = DiffTensor::leaf(out_ch, in_ch, 1);
    w.bias = DiffTensor::leaf(out_ch, 1, 1);
    return w;
}

SepConvWeights SepConvWeights::random(int in_ch, int out_ch, std::mt19937_64& rng, double scale) {
    SepConvWeights w = zeros(in_ch, out_ch);
    w.depthwise.fill_random(rng, -scale, scale);
    w.pointwise.fill_random(rng, -scale, scale);
    w.bias.fill_random(rng, -scale, scale);
    return w;
}

SepConvWeights SepConvWeights::identity(int ch) {
    SepConvWeights w = zeros(ch, ch);
    for (int c = 0; c < ch; ++c) {
        w.depthwise.at(c, 2, 2) = 1.0;
        w.pointwise.at(c, c, 0) = 1.0;
    }
    return w;
}

void SepConvWeights::zero_grad() {
    depthwise.zero_grad();
    pointwise.zero_grad();
    bias.zero_grad();
}

// --- conv -------------------------------------------------------------------

DiffTensor conv2d_separable(Tape& t, const DiffTensor& x, SepConvWeights& w) {
    const int ci = x.channels(), h = x.height(), wd = x.width();
    if (w.in_channels() != ci || w.pointwise.height() != ci)
        throw std::invalid_argument("conv2d_separable: channel mismatch");
    const int co = w.out_channels();

    // Depthwise 5×5 cross-correlation, zero padding 2, same spatial size.
    DiffTensor mid = t.make(ci, h, wd);
    for (int c = 0; c < ci; ++c)
        for (int y = 0; y < h; ++y)
            for (int x0 = 0; x0 < wd; ++x0) {
                double acc = 0.0;
                for (int dy = -2; dy <= 2; ++dy) {
                    int yy = y + dy;
                    if (yy < 0 || yy >= h) continue;
                    for (int dx = -2; dx <= 2; ++dx) {
                        int xx = x0 + dx;
                        if (xx < 0 || xx >= wd) continue;
                        acc += w.depthwise.at(c, dy + 2, dx + 2) * x.at(c, yy, xx);
                    }
                }
                mid.at(c, y, x0) = acc;
            }

    // Pointwise mix plus bias.
    DiffTensor out = t.make(co, h, wd);
    for (int o = 0; o < co; ++o)
        for (int y = 0; y < h; ++y)
            for (int x0 = 0; x0 < wd; ++x0) {
                double acc = w.bias.at(o, 0, 0);
                for (int c = 0; c < ci; ++c) acc += w.pointwise.at(o, c, 0) * mid.at(c, y, x0);
                out.at(o, y, x0) = acc;
            }
    check_finite(out, "conv2d_separable");

    auto xn = x;
    auto dw = w.depthwise;
    auto pw = w.pointwise;
    auto bias = w.bias;
    t.record([xn, dw, pw, bias, mid, out]() mutable {
        const int ci = xn.channels(), co = out.channels();
        const int h = xn.height(), wd = xn.width();
        DiffTensor gmid = DiffTensor::leaf(ci, h, wd);
        for (int o = 0; o < co; ++o)
            for (int y = 0; y < h; ++y)
                for (int x0 = 0; x0 < wd; ++x0) {
                    double go = out.grad_at(o, y, x0);
                    if (go == 0.0) continue;
                    bias.grad()[o] += go;
                    for (int c = 0; c < ci; ++c) {
                        pw.grad()[static_cast<size_t>(o) * ci + c] += go * mid.at(c, y, x0);
                        gmid.at(c, y, x0) += go * pw.at(o, c, 0);
                    }
                }
        for (int c = 0; c < ci; ++c)
            for (int y = 0; y < h; ++y)
                for (int x0 = 0; x0 < wd; ++x0) {
                    double gm = gmid.at(c, y, x0);
                    if (gm == 0.0) continue;
                    for (int dy = -2; dy <= 2; ++dy) {
                        int yy = y + dy;
                        if (yy < 0 || yy >= h) continue;
                        for (int dx = -2; dx <= 2; ++dx) {
                            int xx = x0 + dx;
                            if (xx < 0 || xx >= wd) continue;
                            dw.grad()[(static_cast<size_t>(c) * 5 + dy + 2) * 5 + dx + 2] +=
                                gm * xn.at(c, yy, xx);
                            xn.grad()[(static_cast<size_t>(c) * h + yy) * wd + xx] +=
                                gm * dw.at(c, dy + 2, dx + 2);
                        }
                    }
                }
    });
    return out;
}

// --- activations ------------------------------------------------------------

DiffTensor activation(Tape& t, const DiffTensor& x, Activation kind) {
    DiffTensor out = t.make(x.channels(), x.height(), x.width());
    const size_t n = x.size();
    if (kind == Activation::Sigmoid) {
        for (size_t i = 0; i < n; ++i) out.values()[i] = 1.0 / (1.0 + std::exp(-x.values()[i]));
    } else {
        for (size_t i = 0; i < n; ++i) out.values()[i] = std::tanh(x.values()[i]);
    }
    check_finite(out, "activation");
    auto xn = x;
    t.record([xn, out, kind]() mutable {
        const size_t n = xn.size();
        for (size_t i = 0; i < n; ++i) {
            double y = out.values()[i];
            double d = (kind == Activation::Sigmoid) ? y * (1.0 - y) : 1.0 - y * y;
            xn.grad()[i] += out.grad()[i] * d;
        }
    });
    return out;
}

// --- bilinear resize --------------------------------------------------------

namespace {
// Corner-aligned-off convention: sample centers at (i + 0.5)·scale − 0.5.
struct LerpCoef {
    int i0, i1;
    double w0, w1;
};

std::vector<LerpCoef> lerp_coefs(int in_size, int out_size) {
    std::vector<LerpCoef> cs(out_size);
    double scale = static_cast<double>(in_size) / out_size;
    for (int i = 0; i < out_size; ++i) {
        double src = (i + 0.5) * scale - 0.5;
        double f = std::floor(src);
        double frac = src - f;
        int i0 = std::clamp(static_cast<int>(f), 0, in_size - 1);
        int i1 = std::clamp(static_cast<int>(f) + 1, 0, in_size - 1);
        cs[i] = {i0, i1, 1.0 - frac, frac};
    }
    return cs;
}
}  // namespace

DiffTensor bilinear_resize(Tape& t, const DiffTensor& x, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("bilinear_resize: output size must be >= 1");
    const int c = x.channels();
    auto cy = lerp_coefs(x.height(), out_h);
    auto cx = lerp_coefs(x.width(), out_w);
    DiffTensor out = t.make(c, out_h, out_w);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < out_h; ++y)
            for (int x0 = 0; x0 < out_w; ++x0) {
                const auto& ay = cy[y];
                const auto& ax = cx[x0];
                out.at(ch, y, x0) = ay.w0 * (ax.w0 * x.at(ch, ay.i0, ax.i0) + ax.w1 * x.at(ch, ay.i0, ax.i1)) +
                                    ay.w1 * (ax.w0 * x.at(ch, ay.i1, ax.i0) + ax.w1 * x.at(ch, ay.i1, ax.i1));
            }
    check_finite(out, "bilinear_resize");
    auto xn = x;
    t.record([xn, out, cy, cx]() mutable {
        const int c = xn.channels(), oh = out.height(), ow = out.width();
        const int ih = xn.height(), iw = xn.width();
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < oh; ++y)
                for (int x0 = 0; x0 < ow; ++x0) {
                    double go = out.grad_at(ch, y, x0);
                    if (go == 0.0) continue;
                    const auto& ay = cy[y];
                    const auto& ax = cx[x0];
                    auto acc = [&](int yy, int xx, double w) {
                        xn.grad()[(static_cast<size_t>(ch) * ih + yy) * iw + xx] += go * w;
                    };
                    acc(ay.i0, ax.i0, ay.w0 * ax.w0);
                    acc(ay.i0, ax.i1, ay.w0 * ax.w1);
                    acc(ay.i1, ax.i0, ay.w1 * ax.w0);
                    acc(ay.i1, ax.i1, ay.w1 * ax.w1);
                }
    });
    return out;
}

// --- elementwise ------------------------------------------------------------

namespace {
template <typename Fwd, typename Bwd>
DiffTensor binary_op(Tape& t, const DiffTensor& a, const DiffTensor& b, const char* name,
                     Fwd fwd, Bwd bwd) {
    require_same_shape(a, b, name);
    DiffTensor out = t.make(a.channels(), a.height(), a.width());
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) out.values()[i] = fwd(a.values()[i], b.values()[i]);
    check_finite(out, name);
    auto an = a;
    auto bn = b;
    t.record([an, bn, out, bwd]() mutable {
        const size_t n = an.size();
        for (size_t i = 0; i < n; ++i) {
            double go = out.grad()[i];
            if (go == 0.0) continue;
            auto [da, db] = bwd(an.values()[i], bn.values()[i]);
            an.grad()[i] += go * da;
            bn.grad()[i] += go * db;
        }
    });
    return out;
}

template <typename Fwd, typename Bwd>
DiffTensor unary_op(Tape& t, const DiffTensor& a, const char* name, Fwd fwd, Bwd bwd) {
    DiffTensor out = t.make(a.channels(), a.height(), a.width());
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) out.values()[i] = fwd(a.values()[i]);
    check_finite(out, name);
    auto an = a;
    t.record([an, out, bwd]() mutable {
        const size_t n = an.size();
        for (size_t i = 0; i < n; ++i) an.grad()[i] += out.grad()[i] * bwd(an.values()[i]);
    });
    return out;
}
}  // namespace

DiffTensor add(Tape& t, const DiffTensor& a, const DiffTensor& b) {
    return binary_op(t, a, b, "add", [](double x, double y) { return x + y; },
                     [](double, double) { return std::pair{1.0, 1.0}; });
}

DiffTensor sub(Tape& t, const DiffTensor& a, const DiffTensor& b) {
    return binary_op(t, a, b, "sub", [](double x, double y) { return x - y; },
                     [](double, double) { return std::pair{1.0, -1.0}; });
}

DiffTensor mul(Tape& t, const DiffTensor& a, const DiffTensor& b) {
    return binary_op(t, a, b, "mul", [](double x, double y) { return x * y; },
                     [](double x, double y) { return std::pair{y, x}; });
}

DiffTensor scale(Tape& t, const DiffTensor& a, double s) {
    return unary_op(t, a, "scale", [s](double x) { return s * x; }, [s](double) { return s; });
}

DiffTensor add_const(Tape& t, const DiffTensor& a, double s) {
    return unary_op(t, a, "add_const", [s](double x) { return x + s; }, [](double) { return 1.0; });
}

DiffTensor abs_op(Tape& t, const DiffTensor& a) {
    return unary_op(t, a, "abs", [](double x) { return std::fabs(x); },
                    [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

DiffTensor sqrt_op(Tape& t, const DiffTensor& a) {
    return unary_op(t, a, "sqrt", [](double x) {
                        if (x < 0.0) throw std::domain_error("sqrt of negative value");
                        return std::sqrt(x);
                    },
                    [](double x) { return x > 0.0 ? 0.5 / std::sqrt(x) : 0.0; });
}

DiffTensor log_op(Tape& t, const DiffTensor& a) {
    return unary_op(t, a, "log", [](double x) {
                        if (x <= 0.0) throw std::domain_error("log of non-positive value");
                        return std::log(x);
                    },
                    [](double x) { return 1.0 / x; });
}

DiffTensor clamp_min(Tape& t, const DiffTensor& a, double m) {
    return unary_op(t, a, "clamp_min", [m](double x) { return std::max(x, m); },
                    [m](double x) { return x > m ? 1.0 : 0.0; });
}

DiffTensor concat_channels(Tape& t, const std::vector<DiffTensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: empty input");
    const int h = parts[0].height(), w = parts[0].width();
    int ctot = 0;
    for (const auto& p : parts) {
        if (p.height() != h || p.width() != w)
            throw std::invalid_argument("concat_channels: spatial shape mismatch");
        ctot += p.channels();
    }
    DiffTensor out = t.make(ctot, h, w);
    size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p.values().begin(), p.values().end(), out.values().begin() + off);
        off += p.size();
    }
    auto ps = parts;
    t.record([ps, out]() mutable {
        size_t off = 0;
        for (auto& p : ps) {
            const size_t n = p.size();
            for (size_t i = 0; i < n; ++i) p.grad()[i] += out.grad()[off + i];
            off += n;
        }
    });
    return out;
}

DiffTensor sum_all(Tape& t, const DiffTensor& a) {
    DiffTensor out = t.make(1, 1, 1);
    double acc = 0.0;
    for (double x : a.values()) acc += x;
    out.values()[0] = acc;
    check_finite(out, "sum_all");
    auto an = a;
    t.record([an, out]() mutable {
        double go = out.grad()[0];
        if (go == 0.0) return;
        for (double& g : an.grad()) g += go;
    });
    return out;
}

// --- finite differences -----------------------------------------------------

double finite_diff_check(const std::function<DiffTensor(Tape&)>& build,
                         const std::vector<DiffTensor>& wrt, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be positive");

    for (auto w : wrt) w.zero_grad();
    Tape tape;
    DiffTensor out = build(tape);
    if (!std::isfinite(out.item()))
        throw std::runtime_error("finite_diff_check: non-finite loss");
    tape.backward(out);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(wrt.size());
    for (const auto& w : wrt) analytic.push_back(w.grad());

    auto eval = [&build]() {
        Tape t2;
        return build(t2).item();
    };

    double max_err = 0.0;
    for (size_t wi = 0; wi < wrt.size(); ++wi) {
        auto w = wrt[wi];
        for (size_t i = 0; i < w.size(); ++i) {
            double orig = w.values()[i];
            w.values()[i] = orig + eps;
            double fp = eval();
            w.values()[i] = orig - eps;
            double fm = eval();
            w.values()[i] = orig;
            double fd = (fp - fm) / (2.0 * eps);
            double err = std::fabs(analytic[wi][i] - fd) / std::max(1.0, std::fabs(fd));
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace ndg
