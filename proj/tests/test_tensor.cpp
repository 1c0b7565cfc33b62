#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ndg/tensor.hpp"

using namespace ndg;

TEST_CASE("conv identity kernel passes input through") {
    std::mt19937_64 rng(1);
    auto x = DiffTensor::leaf(3, 6, 7);
    x.fill_random(rng, -2.0, 2.0);
    auto w = SepConvWeights::identity(3);
    Tape t;
    auto y = conv2d_separable(t, x, w);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y.values()[i] == doctest::Approx(x.values()[i]).epsilon(1e-15));
}

TEST_CASE("all-ones depthwise on constant input sums the window") {
    auto x = DiffTensor::leaf(1, 5, 5, std::vector<double>(25, 3.0));
    auto w = SepConvWeights::zeros(1, 1);
    for (int i = 0; i < 25; ++i) w.depthwise.values()[i] = 1.0;
    w.pointwise.values()[0] = 1.0;
    Tape t;
    auto y = conv2d_separable(t, x, w);
    CHECK(y.at(0, 2, 2) == doctest::Approx(25 * 3.0));  // full 5x5 window at center
    CHECK(y.at(0, 0, 0) == doctest::Approx(9 * 3.0));   // corner sees 3x3 via zero pad
}

TEST_CASE("conv channel mismatch is a shape error") {
    auto x = DiffTensor::leaf(2, 4, 4);
    auto w = SepConvWeights::zeros(3, 1);
    Tape t;
    CHECK_THROWS_AS(conv2d_separable(t, x, w), std::invalid_argument);
}

TEST_CASE("conv gradient matches finite differences") {
    std::mt19937_64 rng(7);
    auto x = DiffTensor::leaf(2, 8, 8);
    x.fill_random(rng, -1.0, 1.0);
    auto w = SepConvWeights::random(2, 2, rng, 0.5);
    auto build = [&](Tape& t) { return sum_all(t, mul(t, conv2d_separable(t, x, w), conv2d_separable(t, x, w))); };
    CHECK(finite_diff_check(build, {x, w.depthwise, w.pointwise, w.bias}) < 1e-6);
}

TEST_CASE("conv is linear in its input with zero bias") {
    std::mt19937_64 rng(3);
    auto x = DiffTensor::leaf(2, 5, 5);
    auto y = DiffTensor::leaf(2, 5, 5);
    x.fill_random(rng, -1.0, 1.0);
    y.fill_random(rng, -1.0, 1.0);
    auto w = SepConvWeights::random(2, 3, rng, 0.5);
    w.bias = DiffTensor::leaf(3, 1, 1);  // zero bias
    const double a = 1.7, b = -0.4;
    auto combo = DiffTensor::leaf(2, 5, 5);
    for (size_t i = 0; i < x.size(); ++i) combo.values()[i] = a * x.values()[i] + b * y.values()[i];
    Tape t;
    auto fx = conv2d_separable(t, x, w);
    auto fy = conv2d_separable(t, y, w);
    auto fc = conv2d_separable(t, combo, w);
    for (size_t i = 0; i < fc.size(); ++i)
        CHECK(fc.values()[i] == doctest::Approx(a * fx.values()[i] + b * fy.values()[i]).epsilon(1e-12));
}

TEST_CASE("activations at zero") {
    auto x = DiffTensor::leaf(1, 1, 1, {0.0});
    Tape t;
    CHECK(activation(t, x, Activation::Sigmoid).item() == doctest::Approx(0.5));
    CHECK(activation(t, x, Activation::Tanh).item() == doctest::Approx(0.0));
}

TEST_CASE("activation gradients match finite differences") {
    std::mt19937_64 rng(11);
    auto x = DiffTensor::leaf(2, 4, 4);
    x.fill_random(rng, -3.0, 3.0);
    for (auto kind : {Activation::Sigmoid, Activation::Tanh}) {
        auto build = [&](Tape& t) {
            auto y = activation(t, x, kind);
            return sum_all(t, mul(t, y, y));
        };
        CHECK(finite_diff_check(build, {x}) < 1e-6);
    }
}

TEST_CASE("resize to the same size is the identity") {
    std::mt19937_64 rng(5);
    auto x = DiffTensor::leaf(2, 6, 9);
    x.fill_random(rng, -1.0, 1.0);
    Tape t;
    auto y = bilinear_resize(t, x, 6, 9);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y.values()[i] == doctest::Approx(x.values()[i]).epsilon(1e-14));
}

TEST_CASE("constant grid stays constant under upsampling") {
    auto x = DiffTensor::leaf(1, 3, 3, std::vector<double>(9, 4.2));
    Tape t;
    auto y = bilinear_resize(t, x, 12, 12);
    for (double v : y.values()) CHECK(v == doctest::Approx(4.2).epsilon(1e-14));
}

TEST_CASE("2x2 to 4x4 upsample hand values") {
    auto x = DiffTensor::leaf(1, 2, 2, {1.0, 3.0, 5.0, 7.0});
    Tape t;
    auto y = bilinear_resize(t, x, 4, 4);
    // Sample centers at (i+0.5)*0.5-0.5 with clamped neighbors.
    const double expect[16] = {1, 1.5, 2.5, 3, 2, 2.5, 3.5, 4, 4, 4.5, 5.5, 6, 5, 5.5, 6.5, 7};
    for (int i = 0; i < 16; ++i) CHECK(y.values()[i] == doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("resize preserves the value range") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        auto x = DiffTensor::leaf(1, 4 + trial, 5);
        x.fill_random(rng, -3.0, 3.0);
        double lo = *std::min_element(x.values().begin(), x.values().end());
        double hi = *std::max_element(x.values().begin(), x.values().end());
        Tape t;
        auto y = bilinear_resize(t, x, 11, 7);
        for (double v : y.values()) {
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
        }
    }
}

TEST_CASE("finite_diff_check on a linear function is exact") {
    std::mt19937_64 rng(17);
    auto x = DiffTensor::leaf(1, 3, 3);
    x.fill_random(rng, -1.0, 1.0);
    auto build = [&](Tape& t) { return sum_all(t, x); };
    CHECK(finite_diff_check(build, {x}) < 1e-9);
}

TEST_CASE("finite_diff_check rejects non-positive eps") {
    auto x = DiffTensor::leaf(1, 1, 1, {1.0});
    auto build = [&](Tape& t) { return sum_all(t, x); };
    CHECK_THROWS_AS(finite_diff_check(build, {x}, 0.0), std::invalid_argument);
}

TEST_CASE("differentiable ops pass the gradient oracle on several shapes") {
    std::mt19937_64 rng(23);
    for (auto [c, h, w] : {std::tuple{1, 3, 4}, {2, 5, 5}, {3, 2, 7}}) {
        auto x = DiffTensor::leaf(c, h, w);
        x.fill_random(rng, 0.3, 2.0);
        auto conv_w = SepConvWeights::random(c, 2, rng, 0.5);
        auto build = [&](Tape& t) {
            auto a = conv2d_separable(t, x, conv_w);
            a = activation(t, a, Activation::Tanh);
            a = bilinear_resize(t, a, h + 2, w + 1);
            a = add_const(t, a, 2.0);
            a = log_op(t, a);
            a = sqrt_op(t, mul(t, a, a));
            return sum_all(t, a);
        };
        CHECK(finite_diff_check(build, {x, conv_w.depthwise}) < 1e-5);
    }
}

TEST_CASE("non-finite values are rejected") {
    auto x = DiffTensor::leaf(1, 1, 1, {-1.0});
    Tape t;
    CHECK_THROWS(log_op(t, x));
}

TEST_CASE("concat splits gradients back to its parts") {
    std::mt19937_64 rng(29);
    auto a = DiffTensor::leaf(1, 3, 3);
    auto b = DiffTensor::leaf(2, 3, 3);
    a.fill_random(rng, -1.0, 1.0);
    b.fill_random(rng, -1.0, 1.0);
    auto build = [&](Tape& t) {
        auto c = concat_channels(t, {a, b});
        return sum_all(t, mul(t, c, c));
    };
    CHECK(finite_diff_check(build, {a, b}) < 1e-6);
}
