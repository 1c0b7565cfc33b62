#pragma once

#include <string>

#include "ndg/types.hpp"

namespace ndg {

struct DepthCap {
    double min = 0.0;
    double max = 80.0;
};

struct MetricReport {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double rmse_log = 0.0;
    double log10 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double silog_eval = 0.0;
    double irmse = 0.0;
    size_t n_valid = 0;

    static std::string csv_header();
    std::string to_csv() const;
    std::string to_key_value() const;
};

/// In-range valid pixels: gt valid and gt in (cap.min, cap.max].
Grid<uint8_t> cap_mask(const DepthMap& gt, const DepthCap& cap);

/// Standard depth metric suite over the capped pixel set. silog_eval is the
/// benchmark form 100*sqrt(var(g)); irmse is the RMSE of inverse depth in
/// 1/km. benchmark_style switches sq_rel to the percentage form.
MetricReport evaluate(const DepthMap& pred, const DepthMap& gt, const DepthCap& cap,
                      bool benchmark_style = false);

}  // namespace ndg
