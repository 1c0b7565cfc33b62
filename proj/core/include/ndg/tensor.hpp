#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace ndg {

class Tape;

namespace detail {
struct TensorNode {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;
    std::vector<double> g;
};
}  // namespace detail

/// C×H×W grid of 64-bit floats with an associated gradient buffer.
///
/// A DiffTensor is a shared handle; ops record their backward closures on a
/// Tape. Leaf tensors (parameters, inputs) are created with DiffTensor::leaf
/// and may be reused across tapes.
class DiffTensor {
public:
    DiffTensor() = default;

    static DiffTensor leaf(int c, int h, int w, double fill = 0.0);
    static DiffTensor leaf(int c, int h, int w, std::vector<double> values);

    bool empty() const { return !node_; }
    int channels() const { return node_->c; }
    int height() const { return node_->h; }
    int width() const { return node_->w; }
    size_t size() const { return node_->v.size(); }

    double& at(int c, int y, int x) {
        return node_->v[(static_cast<size_t>(c) * node_->h + y) * node_->w + x];
    }
    double at(int c, int y, int x) const {
        return node_->v[(static_cast<size_t>(c) * node_->h + y) * node_->w + x];
    }
    double grad_at(int c, int y, int x) const {
        return node_->g[(static_cast<size_t>(c) * node_->h + y) * node_->w + x];
    }

    std::vector<double>& values() { return node_->v; }
    const std::vector<double>& values() const { return node_->v; }
    std::vector<double>& grad() { return node_->g; }
    const std::vector<double>& grad() const { return node_->g; }

    /// Scalar value of a (1,1,1) tensor.
    double item() const;

    void zero_grad();
    void fill_random(std::mt19937_64& rng, double lo, double hi);

    bool same_shape(const DiffTensor& o) const {
        return node_->c == o.node_->c && node_->h == o.node_->h && node_->w == o.node_->w;
    }

    detail::TensorNode* node() const { return node_.get(); }

private:
    explicit DiffTensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}
    std::shared_ptr<detail::TensorNode> node_;
    friend class Tape;
};

/// Records backward closures for one forward pass; replays them in reverse.
class Tape {
public:
    DiffTensor make(int c, int h, int w, double fill = 0.0);

    void record(std::function<void()> backward_fn) { ops_.push_back(std::move(backward_fn)); }

    /// Seeds d(scalar)/d(scalar) = 1 and propagates through all recorded ops.
    void backward(const DiffTensor& scalar_out);

    size_t num_ops() const { return ops_.size(); }

private:
    std::vector<std::function<void()>> ops_;
};

/// Separable 5×5 convolution weights: per-channel depthwise kernel followed
/// by a 1×1 pointwise mix plus bias.
struct SepConvWeights {
    DiffTensor depthwise;  // in_ch × 5 × 5
    DiffTensor pointwise;  // out_ch × in_ch × 1
    DiffTensor bias;       // out_ch × 1 × 1

    static SepConvWeights zeros(int in_ch, int out_ch);
    static SepConvWeights random(int in_ch, int out_ch, std::mt19937_64& rng, double scale);
    /// Depthwise kernel = centered delta, pointwise = identity, bias = 0.
    static SepConvWeights identity(int ch);

    int in_channels() const { return depthwise.channels(); }
    int out_channels() const { return bias.channels(); }
    std::vector<DiffTensor*> params() { return {&depthwise, &pointwise, &bias}; }
    void zero_grad();
};

enum class Activation { Sigmoid, Tanh };

// --- differentiable ops -----------------------------------------------------

DiffTensor conv2d_separable(Tape& t, const DiffTensor& x, SepConvWeights& w);
DiffTensor activation(Tape& t, const DiffTensor& x, Activation kind);
DiffTensor bilinear_resize(Tape& t, const DiffTensor& x, int out_h, int out_w);

DiffTensor add(Tape& t, const DiffTensor& a, const DiffTensor& b);
DiffTensor sub(Tape& t, const DiffTensor& a, const DiffTensor& b);
DiffTensor mul(Tape& t, const DiffTensor& a, const DiffTensor& b);
DiffTensor scale(Tape& t, const DiffTensor& a, double s);
DiffTensor add_const(Tape& t, const DiffTensor& a, double s);
DiffTensor abs_op(Tape& t, const DiffTensor& a);       // subgradient 0 at 0
DiffTensor sqrt_op(Tape& t, const DiffTensor& a);
DiffTensor log_op(Tape& t, const DiffTensor& a);
DiffTensor clamp_min(Tape& t, const DiffTensor& a, double m);
DiffTensor concat_channels(Tape& t, const std::vector<DiffTensor>& parts);
DiffTensor sum_all(Tape& t, const DiffTensor& a);      // -> (1,1,1)

/// Finite-difference gradient checker: the universal numerical oracle.
///
/// `build` constructs the scalar-valued graph on a fresh tape from the current
/// values of the `wrt` leaves. Returns the max over all entries of
/// |analytic − central difference| / max(1, |central difference|).
double finite_diff_check(const std::function<DiffTensor(Tape&)>& build,
                         const std::vector<DiffTensor>& wrt, double eps = 1e-5);

}  // namespace ndg
