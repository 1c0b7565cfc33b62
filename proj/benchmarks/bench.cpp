#include <benchmark/benchmark.h>

#include <random>

#include "ndg/camera.hpp"
#include "ndg/metrics.hpp"
#include "ndg/refinement.hpp"
#include "ndg/segmentation.hpp"
#include "ndg/synthetic.hpp"

using namespace ndg;

namespace {
const PlanarScene& scene() {
    static PlanarScene sc = generate(default_scene_spec());  // 160x120, 3 planes
    return sc;
}
}  // namespace

static void BM_DepthFromNormalDistance(benchmark::State& state) {
    const auto& sc = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(depth_from_normal_distance(sc.normal, sc.distance, sc.spec.k));
}
BENCHMARK(BM_DepthFromNormalDistance);

static void BM_NormalFromDepth(benchmark::State& state) {
    const auto& sc = scene();
    for (auto _ : state) benchmark::DoNotOptimize(normal_from_depth(sc.depth, sc.spec.k));
}
BENCHMARK(BM_NormalFromDepth);

static void BM_GeometricDissimilarity(benchmark::State& state) {
    const auto& sc = scene();
    for (auto _ : state) benchmark::DoNotOptimize(geometric_dissimilarity(sc.normal, sc.distance));
}
BENCHMARK(BM_GeometricDissimilarity);

static void BM_FelzenszwalbSegment(benchmark::State& state) {
    const auto& sc = scene();
    EdgeList e = geometric_dissimilarity(sc.normal, sc.distance);
    for (auto _ : state) benchmark::DoNotOptimize(felzenszwalb_segment(e, 0.3));
}
BENCHMARK(BM_FelzenszwalbSegment);

static void BM_SeparableConv(benchmark::State& state) {
    std::mt19937_64 rng(1);
    auto x = DiffTensor::leaf(16, 30, 40);
    x.fill_random(rng, -1.0, 1.0);
    auto w = SepConvWeights::random(16, 16, rng, 0.1);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(conv2d_separable(t, x, w));
    }
}
BENCHMARK(BM_SeparableConv);

static void BM_RefineStep(benchmark::State& state) {
    RefineConfig cfg;
    cfg.t_max = 1;
    std::mt19937_64 rng(2);
    GruWeights w = GruWeights::random(cfg, rng, 0.1);
    auto d1 = DiffTensor::leaf(1, 30, 40), d2 = DiffTensor::leaf(1, 30, 40);
    auto u = DiffTensor::leaf(1, 30, 40, 0.5);
    auto ctx = DiffTensor::leaf(cfg.context_channels, 30, 40);
    auto h0 = DiffTensor::leaf(cfg.hidden_channels, 30, 40);
    d1.fill_random(rng, 1.0, 3.0);
    d2.fill_random(rng, 1.0, 3.0);
    ctx.fill_random(rng, -1.0, 1.0);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(refine(t, d1, d2, u, u, ctx, h0, w, cfg));
    }
}
BENCHMARK(BM_RefineStep);

static void BM_Evaluate(benchmark::State& state) {
    const auto& sc = scene();
    DepthMap pred = sc.depth;
    for (auto& z : pred.z) z *= 1.01;
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(pred, sc.depth, {0.0, 80.0}));
}
BENCHMARK(BM_Evaluate);

BENCHMARK_MAIN();
