#pragma once

#include <string>
#include <vector>

namespace ndg {

struct GradCheckResult {
    std::string component;
    double max_rel_err = 0.0;
    double tolerance = 1e-5;
    bool passed = false;
};

std::vector<std::string> gradcheck_components();

/// Runs the finite-difference oracle against each named component with
/// seeded random inputs. Throws on an unknown component name.
std::vector<GradCheckResult> run_gradchecks(const std::vector<std::string>& components,
                                            uint64_t seed);

}  // namespace ndg
