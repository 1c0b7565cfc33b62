#pragma once

#include <vector>

#include "ndg/types.hpp"

namespace ndg {

inline constexpr int kDefaultMinRegionSize = 200;
inline constexpr double kDefaultFelzK = 0.3;

/// Undirected pixel-adjacency edges (4-connectivity) with non-negative
/// weights; each pair appears once with a < b in row-major index order.
struct EdgeList {
    struct Edge {
        int a, b;
        double w;
    };
    int width = 0, height = 0;
    std::vector<Edge> edges;
};

/// Per-pixel region ids forming a partition, plus per-region pixel counts.
struct SegmentLabels {
    int width = 0, height = 0;
    std::vector<int> labels;       // compact ids 0..num_segments-1
    std::vector<int> counts;       // indexed by label

    int num_segments() const { return static_cast<int>(counts.size()); }
    int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

/// Binary planar mask plus the list of retained region ids.
struct PlaneMask {
    int width = 0, height = 0;
    std::vector<uint8_t> mask;
    std::vector<int> retained;

    bool at(int x, int y) const { return mask[static_cast<size_t>(y) * width + x] != 0; }
};

/// dis_N(p,q) = ||N(q) - N(p)|| over 4-adjacent valid pixel pairs.
EdgeList normal_dissimilarity(const NormalMap& n);

/// dis_D(p,q) = |D(q) - D(p)| over 4-adjacent valid pixel pairs.
EdgeList distance_dissimilarity(const DistanceMap& d);

/// Min-max normalization to [0,1]; all weights equal maps to all zeros.
EdgeList normalize_dissimilarity(EdgeList e);

/// Sum of the min-max-normalized normal and distance dissimilarities;
/// weights in [0,2]. Edges exist where both maps are valid at both ends.
EdgeList geometric_dissimilarity(const NormalMap& n, const DistanceMap& d);

/// Graph-based segmentation: merge components when the connecting edge weight
/// is at most min over both components of (max internal edge + k/size).
/// Deterministic: edges sorted by (weight, a, b).
SegmentLabels felzenszwalb_segment(const EdgeList& e, double k);

/// Union of segments strictly larger than min_region_size pixels.
PlaneMask filter_planar_regions(const SegmentLabels& s, int min_region_size = kDefaultMinRegionSize);

/// Per-pixel max incident edge weight, for inspection output.
Grid<double> max_incident_weight(const EdgeList& e);

}  // namespace ndg
