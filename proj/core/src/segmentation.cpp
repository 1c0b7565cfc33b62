#include "ndg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ndg {

namespace {

// 4-connectivity: right and down neighbor of each pixel where pred holds at
// both endpoints. Emission order fixed (per pixel: right, then down).
template <typename Pred, typename Weight>
EdgeList build_edges(int width, int height, Pred valid, Weight weight) {
    EdgeList e;
    e.width = width;
    e.height = height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!valid(x, y)) continue;
            int a = y * width + x;
            if (x + 1 < width && valid(x + 1, y)) {
                double w = weight(x, y, x + 1, y);
                if (!std::isfinite(w) || w < 0.0)
                    throw std::runtime_error("dissimilarity: invalid edge weight");
                e.edges.push_back({a, a + 1, w});
            }
            if (y + 1 < height && valid(x, y + 1)) {
                double w = weight(x, y, x, y + 1);
                if (!std::isfinite(w) || w < 0.0)
                    throw std::runtime_error("dissimilarity: invalid edge weight");
                e.edges.push_back({a, a + width, w});
            }
        }
    return e;
}

struct UnionFind {
    std::vector<int> parent, rank_, size_;
    explicit UnionFind(int n) : parent(n), rank_(n, 0), size_(n, 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    int join(int a, int b) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        size_[a] += size_[b];
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }
    int size(int root) { return size_[root]; }
};

}  // namespace

EdgeList normal_dissimilarity(const NormalMap& n) {
    return build_edges(
        n.width, n.height, [&](int x, int y) { return n.is_valid(x, y); },
        [&](int x0, int y0, int x1, int y1) { return (n.at(x1, y1) - n.at(x0, y0)).norm(); });
}

EdgeList distance_dissimilarity(const DistanceMap& d) {
    return build_edges(
        d.width, d.height, [&](int x, int y) { return d.is_valid(x, y); },
        [&](int x0, int y0, int x1, int y1) { return std::fabs(d.at(x1, y1) - d.at(x0, y0)); });
}

EdgeList normalize_dissimilarity(EdgeList e) {
    if (e.edges.empty()) return e;
    double lo = e.edges[0].w, hi = e.edges[0].w;
    for (const auto& ed : e.edges) {
        lo = std::min(lo, ed.w);
        hi = std::max(hi, ed.w);
    }
    if (hi == lo) {
        for (auto& ed : e.edges) ed.w = 0.0;
        return e;
    }
    double inv = 1.0 / (hi - lo);
    for (auto& ed : e.edges) ed.w = (ed.w - lo) * inv;
    return e;
}

EdgeList geometric_dissimilarity(const NormalMap& n, const DistanceMap& d) {
    if (n.width != d.width || n.height != d.height)
        throw std::invalid_argument("geometric_dissimilarity: shape mismatch");
    auto both = [&](int x, int y) { return n.is_valid(x, y) && d.is_valid(x, y); };
    EdgeList en = build_edges(n.width, n.height, both, [&](int x0, int y0, int x1, int y1) {
        return (n.at(x1, y1) - n.at(x0, y0)).norm();
    });
    EdgeList ed = build_edges(n.width, n.height, both, [&](int x0, int y0, int x1, int y1) {
        return std::fabs(d.at(x1, y1) - d.at(x0, y0));
    });
    en = normalize_dissimilarity(std::move(en));
    ed = normalize_dissimilarity(std::move(ed));
    for (size_t i = 0; i < en.edges.size(); ++i) en.edges[i].w += ed.edges[i].w;
    return en;
}

SegmentLabels felzenszwalb_segment(const EdgeList& e, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("felzenszwalb_segment: k must be positive");
    if (e.width < 1 || e.height < 1)
        throw std::invalid_argument("felzenszwalb_segment: empty grid");
    const int n = e.width * e.height;
    for (const auto& ed : e.edges)
        if (ed.a < 0 || ed.a >= n || ed.b < 0 || ed.b >= n)
            throw std::invalid_argument("felzenszwalb_segment: edge endpoint out of range");
    std::vector<EdgeList::Edge> edges = e.edges;
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });

    UnionFind uf(n);
    std::vector<double> threshold(n, k);  // Int(C) + k/|C|, starts at k/1
    for (const auto& ed : edges) {
        int ra = uf.find(ed.a), rb = uf.find(ed.b);
        if (ra == rb) continue;
        if (ed.w <= threshold[ra] && ed.w <= threshold[rb]) {
            int r = uf.join(ra, rb);
            threshold[r] = ed.w + k / uf.size(r);
        }
    }

    SegmentLabels out;
    out.width = e.width;
    out.height = e.height;
    out.labels.resize(n);
    std::vector<int> relabel(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int r = uf.find(i);
        if (relabel[r] < 0) relabel[r] = next++;
        out.labels[i] = relabel[r];
    }
    out.counts.assign(next, 0);
    for (int i = 0; i < n; ++i) ++out.counts[out.labels[i]];
    return out;
}

PlaneMask filter_planar_regions(const SegmentLabels& s, int min_region_size) {
    PlaneMask m;
    m.width = s.width;
    m.height = s.height;
    m.mask.assign(s.labels.size(), 0);
    std::vector<uint8_t> keep(s.counts.size(), 0);
    for (int id = 0; id < s.num_segments(); ++id)
        if (s.counts[id] > min_region_size) {
            keep[id] = 1;
            m.retained.push_back(id);
        }
    for (size_t i = 0; i < s.labels.size(); ++i)
        if (keep[s.labels[i]]) m.mask[i] = 255;
    return m;
}

Grid<double> max_incident_weight(const EdgeList& e) {
    Grid<double> g(e.width, e.height, 0.0);
    for (const auto& ed : e.edges) {
        g.v[ed.a] = std::max(g.v[ed.a], ed.w);
        g.v[ed.b] = std::max(g.v[ed.b], ed.w);
    }
    return g;
}

}  // namespace ndg
