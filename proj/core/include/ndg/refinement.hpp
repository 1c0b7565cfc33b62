#pragma once

#include <filesystem>

#include "ndg/tensor.hpp"
#include "ndg/types.hpp"

namespace ndg {

struct RefineConfig {
    int proj_channels = 16;
    int context_channels = 16;
    int hidden_channels = 32;
    int t_max = 3;
    double depth_floor = 1e-3;

    void validate() const;
};

/// Recurrent-cell weights: input projection (two separable convs), the three
/// gate convolutions, the two depth-update decoders, and an optional 1×1
/// hidden-init projection used when the concatenated head features do not
/// already have hidden_channels channels.
struct GruWeights {
    SepConvWeights proj1, proj2;      // 5 -> proj, proj -> proj
    SepConvWeights wz, wr, wh;        // hidden+input -> hidden
    SepConvWeights head1, head2;      // hidden -> 1
    DiffTensor init_proj;             // hidden × in × 1, empty when unused

    static GruWeights zeros(const RefineConfig& cfg);
    static GruWeights random(const RefineConfig& cfg, std::mt19937_64& rng, double scale = 0.1);

    std::vector<DiffTensor*> params();
    std::vector<std::pair<std::string, DiffTensor*>> named_params();
    void zero_grad();
};

/// Hidden state of the recurrence; entries stay in (-1, 1).
struct GruState {
    DiffTensor h;
};

struct RefinementInputs {
    DiffTensor d1, d2;    // 1×H×W depths at 1/4 resolution
    DiffTensor u1, u2;    // 1×H×W uncertainties
    DiffTensor dif;       // 1×H×W |d1 - d2|
    DiffTensor context;   // C_ctx×H×W image contextual feature
};

struct RefineResult {
    std::vector<DiffTensor> trace1, trace2;  // t_max iterates per head
    DiffTensor d1_final, d2_final;
    GruState state;
};

/// h0 = tanh(concat(pen1, pen2)), with a 1×1 projection first when the
/// channel count differs from hidden_channels.
DiffTensor init_hidden(Tape& t, const DiffTensor& pen1, const DiffTensor& pen2, GruWeights& w,
                       const RefineConfig& cfg);

/// I = concat(conv2(tanh(conv1(stack(d1,d2,u1,u2,dif)))), context).
DiffTensor build_input(Tape& t, const RefinementInputs& in, GruWeights& w);

/// One ConvGRU step: z and r gates, candidate, convex-combination update.
DiffTensor conv_gru_step(Tape& t, const DiffTensor& h, const DiffTensor& input, GruWeights& w);

/// Decodes (dD1, dD2) from the hidden state.
std::pair<DiffTensor, DiffTensor> depth_update_head(Tape& t, const DiffTensor& h, GruWeights& w);

/// Iterative additive refinement at 1/4 resolution. Depths are clamped to
/// depth_floor after each update; dif is recomputed per iteration.
RefineResult refine(Tape& t, const DiffTensor& d1, const DiffTensor& d2, const DiffTensor& u1,
                    const DiffTensor& u2, const DiffTensor& context, const DiffTensor& h0,
                    GruWeights& w, const RefineConfig& cfg);

/// Bilinear upsample both refined depths to full resolution and average.
DiffTensor fuse(Tape& t, const DiffTensor& d1_star, const DiffTensor& d2_star, int full_h,
                int full_w);

/// Fixed two-conv context stack over an RGB tensor downsampled to 1/4,
/// with weights drawn deterministically from the seed.
DiffTensor context_from_rgb(Tape& t, const DiffTensor& rgb, const RefineConfig& cfg,
                            uint64_t seed);

DepthMap to_depth_map(const DiffTensor& t);
DiffTensor from_depth_map(const DepthMap& d);

/// Weight persistence via the flat tensor container format.
void save_gru_weights(GruWeights& w, const std::filesystem::path& path);
GruWeights load_gru_weights(const std::filesystem::path& path, RefineConfig* cfg_out = nullptr);

}  // namespace ndg
