#include "ndg/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace ndg {

void LossWeights::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("LossWeights: ") + name + " must be positive");
    };
    pos(lambda1, "lambda1");
    pos(lambda2, "lambda2");
    pos(lambda3, "lambda3");
    pos(lambda4, "lambda4");
    pos(lambda5, "lambda5");
    pos(kappa, "kappa");
    pos(b_tolerance, "b_tolerance");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("LossWeights: eta must be in (0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("LossWeights: gamma must be in (0,1]");
    if (m_steps < 1) throw std::invalid_argument("LossWeights: m_steps must be >= 1");
}

namespace {
void require_map_shape(const DiffTensor& t, int c, int w, int h, const char* op) {
    if (t.channels() != c || t.width() != w || t.height() != h)
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}
}  // namespace

DiffTensor silog_loss(Tape& t, const DiffTensor& pred, const DepthMap& gt, double kappa,
                      double eta) {
    require_map_shape(pred, 1, gt.width, gt.height, "silog_loss");
    std::vector<size_t> idx;
    idx.reserve(gt.z.size());
    double s1 = 0.0, s2 = 0.0;
    for (size_t i = 0; i < gt.z.size(); ++i) {
        if (!gt.valid[i]) continue;
        double p = pred.values()[i];
        if (!(p > 0.0)) throw std::domain_error("silog_loss: non-positive prediction on valid pixel");
        double g = std::log(p) - std::log(gt.z[i]);
        s1 += g;
        s2 += g * g;
        idx.push_back(i);
    }
    if (idx.empty()) throw std::invalid_argument("silog_loss: no valid pixels");
    const double n = static_cast<double>(idx.size());
    double radicand = s2 / n - eta * (s1 / n) * (s1 / n);
    radicand = std::max(radicand, 0.0);  // exact-zero guard against rounding
    DiffTensor out = t.make(1, 1, 1);
    out.values()[0] = kappa * std::sqrt(radicand);

    auto pn = pred;
    t.record([pn, out, idx, s1, n, kappa, eta, radicand, gt]() mutable {
        double go = out.grad()[0];
        if (go == 0.0 || radicand <= 0.0) return;  // kink at zero loss
        double root = std::sqrt(radicand);
        for (size_t i : idx) {
            double p = pn.values()[i];
            double g = std::log(p) - std::log(gt.z[i]);
            double dr = 2.0 * g / n - 2.0 * eta * s1 / (n * n);
            pn.grad()[i] += go * kappa * 0.5 / root * dr / p;
        }
    });
    return out;
}

DiffTensor multiscale_depth_loss(Tape& t, const std::vector<DiffTensor>& preds1,
                                 const std::vector<DiffTensor>& preds2, const DepthMap& gt,
                                 const LossWeights& w) {
    if (preds1.size() != preds2.size())
        throw std::invalid_argument("multiscale_depth_loss: trace length mismatch");
    if (preds1.empty()) throw std::invalid_argument("multiscale_depth_loss: empty trace");
    const int m = static_cast<int>(preds1.size());
    DiffTensor total;
    for (int s = 1; s <= m; ++s) {
        double coef = std::pow(w.gamma, m - s);
        DiffTensor term = add(t, silog_loss(t, preds1[s - 1], gt, w.kappa, w.eta),
                              silog_loss(t, preds2[s - 1], gt, w.kappa, w.eta));
        term = scale(t, term, coef);
        total = total.empty() ? term : add(t, total, term);
    }
    return total;
}

DiffTensor normal_cosine_loss(Tape& t, const DiffTensor& pred_n, const NormalMap& gt) {
    require_map_shape(pred_n, 3, gt.width, gt.height, "normal_cosine_loss");
    const size_t plane = static_cast<size_t>(gt.width) * gt.height;
    DiffTensor out = t.make(1, 1, 1);
    double acc = 0.0;
    for (size_t i = 0; i < plane; ++i) {
        if (!gt.valid[i]) continue;
        Vec3 v{pred_n.values()[i], pred_n.values()[plane + i], pred_n.values()[2 * plane + i]};
        double len = std::max(v.norm(), 1e-12);
        acc += 1.0 - v.dot(gt.n[i]) / len;
    }
    out.values()[0] = acc;

    auto pn = pred_n;
    t.record([pn, out, gt, plane]() mutable {
        double go = out.grad()[0];
        if (go == 0.0) return;
        for (size_t i = 0; i < plane; ++i) {
            if (!gt.valid[i]) continue;
            Vec3 v{pn.values()[i], pn.values()[plane + i], pn.values()[2 * plane + i]};
            double len = v.norm();
            if (len <= 1e-12) continue;
            Vec3 u = v * (1.0 / len);
            const Vec3& g = gt.n[i];
            // d(1 - u.g)/dv = -(g - (u.g) u) / |v|
            Vec3 dv = (g - u * u.dot(g)) * (-1.0 / len);
            pn.grad()[i] += go * dv.x;
            pn.grad()[plane + i] += go * dv.y;
            pn.grad()[2 * plane + i] += go * dv.z;
        }
    });
    return out;
}

DiffTensor distance_l1_loss(Tape& t, const DiffTensor& pred_d, const DistanceMap& gt) {
    require_map_shape(pred_d, 1, gt.width, gt.height, "distance_l1_loss");
    DiffTensor out = t.make(1, 1, 1);
    double acc = 0.0;
    for (size_t i = 0; i < gt.d.size(); ++i)
        if (gt.valid[i]) acc += std::fabs(pred_d.values()[i] - gt.d[i]);
    out.values()[0] = acc;
    auto pn = pred_d;
    t.record([pn, out, gt]() mutable {
        double go = out.grad()[0];
        if (go == 0.0) return;
        for (size_t i = 0; i < gt.d.size(); ++i) {
            if (!gt.valid[i]) continue;
            double diff = pn.values()[i] - gt.d[i];
            if (diff > 0.0)
                pn.grad()[i] += go;
            else if (diff < 0.0)
                pn.grad()[i] -= go;
        }
    });
    return out;
}

Grid<double> uncertainty_target(const DepthMap& pred, const DepthMap& gt, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("uncertainty_target: b must be positive");
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("uncertainty_target: shape mismatch");
    Grid<double> u(gt.width, gt.height, 0.0);
    // Strictly below 1 even when exp underflows for huge errors.
    const double cap = std::nextafter(1.0, 0.0);
    for (size_t i = 0; i < u.v.size(); ++i)
        if (gt.valid[i] && pred.valid[i])
            u.v[i] = std::min(1.0 - std::exp(-std::fabs(pred.z[i] - gt.z[i]) / b), cap);
    return u;
}

Grid<double> uncertainty_target(const DiffTensor& pred, const DepthMap& gt, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("uncertainty_target: b must be positive");
    if (pred.channels() != 1 || pred.width() != gt.width || pred.height() != gt.height)
        throw std::invalid_argument("uncertainty_target: shape mismatch");
    Grid<double> u(gt.width, gt.height, 0.0);
    const double cap = std::nextafter(1.0, 0.0);
    for (size_t i = 0; i < u.v.size(); ++i)
        if (gt.valid[i])
            u.v[i] = std::min(1.0 - std::exp(-std::fabs(pred.values()[i] - gt.z[i]) / b), cap);
    return u;
}

DiffTensor uncertainty_loss(Tape& t, const DiffTensor& u1, const DiffTensor& u2,
                            const Grid<double>& t1, const Grid<double>& t2) {
    auto term = [&t](const DiffTensor& u, const Grid<double>& target) {
        if (u.channels() != 1 || u.width() != target.width || u.height() != target.height)
            throw std::invalid_argument("uncertainty_loss: shape mismatch");
        DiffTensor out = t.make(1, 1, 1);
        double acc = 0.0;
        for (size_t i = 0; i < target.v.size(); ++i) acc += std::fabs(u.values()[i] - target.v[i]);
        out.values()[0] = acc;
        auto un = u;
        t.record([un, out, target]() mutable {
            double go = out.grad()[0];
            if (go == 0.0) return;
            for (size_t i = 0; i < target.v.size(); ++i) {
                double diff = un.values()[i] - target.v[i];
                if (diff > 0.0)
                    un.grad()[i] += go;
                else if (diff < 0.0)
                    un.grad()[i] -= go;
            }
        });
        return out;
    };
    return add(t, term(u1, t1), term(u2, t2));
}

Grid<double> complementary_map(const DepthMap& d1, const DepthMap& d2) {
    if (d1.width != d2.width || d1.height != d2.height)
        throw std::invalid_argument("complementary_map: shape mismatch");
    Grid<double> g(d1.width, d1.height, 0.0);
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] = std::fabs(d1.z[i] - d2.z[i]);
    return g;
}

DiffTensor plane_consistency_loss(Tape& t, const DiffTensor& n, const DiffTensor& dist,
                                  const PlaneMask& mask, const SegmentLabels& labels) {
    if (mask.width != labels.width || mask.height != labels.height)
        throw std::invalid_argument("plane_consistency_loss: mask/labels shape mismatch");
    require_map_shape(n, 3, mask.width, mask.height, "plane_consistency_loss");
    require_map_shape(dist, 1, mask.width, mask.height, "plane_consistency_loss");

    const int w = mask.width, h = mask.height;
    // Counted pairs: both pixels masked and in the same segment.
    std::vector<std::pair<size_t, size_t>> pairs;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            size_t i = static_cast<size_t>(y) * w + x;
            if (x + 1 < w && mask.at(x + 1, y) && labels.at(x, y) == labels.at(x + 1, y))
                pairs.emplace_back(i, i + 1);
            if (y + 1 < h && mask.at(x, y + 1) && labels.at(x, y) == labels.at(x, y + 1))
                pairs.emplace_back(i, i + w);
        }

    const size_t plane = static_cast<size_t>(w) * h;
    DiffTensor out = t.make(1, 1, 1);
    double acc = 0.0;
    for (auto [i, j] : pairs) {
        for (int c = 0; c < 3; ++c)
            acc += std::fabs(n.values()[c * plane + j] - n.values()[c * plane + i]);
        acc += std::fabs(dist.values()[j] - dist.values()[i]);
    }
    out.values()[0] = acc;

    auto nn = n;
    auto dn = dist;
    t.record([nn, dn, out, pairs, plane]() mutable {
        double go = out.grad()[0];
        if (go == 0.0) return;
        auto push = [go](std::vector<double>& grad, const std::vector<double>& val, size_t i,
                         size_t j) {
            double diff = val[j] - val[i];
            if (diff > 0.0) {
                grad[j] += go;
                grad[i] -= go;
            } else if (diff < 0.0) {
                grad[j] -= go;
                grad[i] += go;
            }
        };
        for (auto [i, j] : pairs) {
            for (int c = 0; c < 3; ++c)
                push(nn.grad(), nn.values(), c * plane + i, c * plane + j);
            push(dn.grad(), dn.values(), i, j);
        }
    });
    return out;
}

DiffTensor overall_loss(Tape& t, const DiffTensor& depth_loss, const DiffTensor& normal_loss,
                        const DiffTensor& distance_loss, const DiffTensor& uncertainty_loss,
                        const DiffTensor& plane_loss, const LossWeights& w) {
    w.validate();
    DiffTensor out = scale(t, depth_loss, w.lambda1);
    out = add(t, out, scale(t, normal_loss, w.lambda2));
    out = add(t, out, scale(t, distance_loss, w.lambda3));
    out = add(t, out, scale(t, uncertainty_loss, w.lambda4));
    out = add(t, out, scale(t, plane_loss, w.lambda5));
    return out;
}

}  // namespace ndg
