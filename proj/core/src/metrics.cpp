#include "ndg/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ndg {

std::string MetricReport::csv_header() {
    return "abs_rel,sq_rel,rmse,rmse_log,log10,delta1,delta2,delta3,silog_eval,irmse,n_valid";
}

namespace {
std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}
}  // namespace

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os << fmt(abs_rel) << ',' << fmt(sq_rel) << ',' << fmt(rmse) << ',' << fmt(rmse_log) << ','
       << fmt(log10) << ',' << fmt(delta1) << ',' << fmt(delta2) << ',' << fmt(delta3) << ','
       << fmt(silog_eval) << ',' << fmt(irmse) << ',' << n_valid;
    return os.str();
}

std::string MetricReport::to_key_value() const {
    std::ostringstream os;
    os << "abs_rel=" << fmt(abs_rel) << "\nsq_rel=" << fmt(sq_rel) << "\nrmse=" << fmt(rmse)
       << "\nrmse_log=" << fmt(rmse_log) << "\nlog10=" << fmt(log10) << "\ndelta1=" << fmt(delta1)
       << "\ndelta2=" << fmt(delta2) << "\ndelta3=" << fmt(delta3)
       << "\nsilog_eval=" << fmt(silog_eval) << "\nirmse=" << fmt(irmse)
       << "\nn_valid=" << n_valid << "\n";
    return os.str();
}

Grid<uint8_t> cap_mask(const DepthMap& gt, const DepthCap& cap) {
    Grid<uint8_t> m(gt.width, gt.height, 0);
    for (size_t i = 0; i < gt.z.size(); ++i)
        if (gt.valid[i] && gt.z[i] > cap.min && gt.z[i] <= cap.max) m.v[i] = 1;
    return m;
}

MetricReport evaluate(const DepthMap& pred, const DepthMap& gt, const DepthCap& cap,
                      bool benchmark_style) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("evaluate: shape mismatch");
    if (!(cap.min < cap.max)) throw std::invalid_argument("evaluate: cap.min must be < cap.max");

    Grid<uint8_t> m = cap_mask(gt, cap);
    double s_abs = 0, s_sq = 0, s_sqd = 0, s_logsq = 0, s_log10 = 0;
    double s_g = 0, s_g2 = 0, s_inv2 = 0;
    size_t n = 0, n1 = 0, n2 = 0, n3 = 0;
    const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;

    for (size_t i = 0; i < gt.z.size(); ++i) {
        if (!m.v[i]) continue;
        if (!pred.valid[i] || !(pred.z[i] > 0.0))
            throw std::domain_error("evaluate: invalid or non-positive prediction on counted pixel");
        double p = pred.z[i], g = gt.z[i];
        double d = p - g;
        s_abs += std::fabs(d) / g;
        s_sq += benchmark_style ? (d / g) * (d / g) : d * d / g;
        s_sqd += d * d;
        double lg = std::log(p) - std::log(g);
        s_logsq += lg * lg;
        s_g += lg;
        s_g2 += lg * lg;
        s_log10 += std::fabs(std::log10(p) - std::log10(g));
        double ratio = std::max(p / g, g / p);
        if (ratio < t1) ++n1;
        if (ratio < t2) ++n2;
        if (ratio < t3) ++n3;
        double di = 1000.0 / p - 1000.0 / g;  // inverse depth in 1/km
        s_inv2 += di * di;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("evaluate: zero valid pixels under cap");

    const double dn = static_cast<double>(n);
    MetricReport r;
    r.abs_rel = s_abs / dn;
    r.sq_rel = (benchmark_style ? 100.0 : 1.0) * s_sq / dn;
    r.rmse = std::sqrt(s_sqd / dn);
    r.rmse_log = std::sqrt(s_logsq / dn);
    r.log10 = s_log10 / dn;
    r.delta1 = static_cast<double>(n1) / dn;
    r.delta2 = static_cast<double>(n2) / dn;
    r.delta3 = static_cast<double>(n3) / dn;
    double var = std::max(s_g2 / dn - (s_g / dn) * (s_g / dn), 0.0);
    r.silog_eval = 100.0 * std::sqrt(var);
    r.irmse = std::sqrt(s_inv2 / dn);
    r.n_valid = n;
    return r;
}

}  // namespace ndg
