#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ndg/losses.hpp"
#include "ndg/refinement.hpp"
#include "ndg/segmentation.hpp"

namespace ndg {

/// All tunable constants, with config-file and CLI override support.
/// Precedence: CLI flag > config file > built-in default.
struct RunConfig {
    LossWeights loss;
    RefineConfig refine;
    double felz_k = kDefaultFelzK;
    int min_region_size = kDefaultMinRegionSize;
    double tau_den = 1e-6;
    uint64_t seed = 0;

    void validate() const;
    std::string serialize() const;
};

/// key=value lines, '#' comments. Unknown keys are an error.
std::map<std::string, std::string> parse_key_value(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

}  // namespace ndg
