#pragma once

#include "ndg/segmentation.hpp"
#include "ndg/tensor.hpp"
#include "ndg/types.hpp"

namespace ndg {

/// All loss hyperparameters. Defaults follow the reference configuration
/// (lambda 1, 5, 0.25, 1, 0.01; kappa 10, eta 0.85; gamma 0.85, m 3).
struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 5.0;
    double lambda3 = 0.25;
    double lambda4 = 1.0;
    double lambda5 = 0.01;
    double kappa = 10.0;
    double eta = 0.85;
    double gamma = 0.85;
    int m_steps = 3;
    double b_tolerance = 0.2;

    void validate() const;
};

/// kappa * sqrt(mean(g^2) - eta * mean(g)^2) with g = ln pred - ln gt over
/// valid pixels.
DiffTensor silog_loss(Tape& t, const DiffTensor& pred, const DepthMap& gt,
                      double kappa = 10.0, double eta = 0.85);

/// sum_s gamma^(m-s) * (silog(preds1[s]) + silog(preds2[s])), s = 1..m.
DiffTensor multiscale_depth_loss(Tape& t, const std::vector<DiffTensor>& preds1,
                                 const std::vector<DiffTensor>& preds2, const DepthMap& gt,
                                 const LossWeights& w);

/// sum over valid pixels of 1 - dot(normalize(pred), gt). Raw 3-channel
/// predictions are unit-normalized internally (1e-12 guard).
DiffTensor normal_cosine_loss(Tape& t, const DiffTensor& pred_n, const NormalMap& gt);

/// sum over valid pixels of |pred - gt|; subgradient 0 at equality.
DiffTensor distance_l1_loss(Tape& t, const DiffTensor& pred_d, const DistanceMap& gt);

/// U_gt(p) = 1 - exp(-|pred - gt| / b); no gradient (target construction).
Grid<double> uncertainty_target(const DepthMap& pred, const DepthMap& gt, double b);
Grid<double> uncertainty_target(const DiffTensor& pred, const DepthMap& gt, double b);

/// sum |u1 - t1| + sum |u2 - t2| over pixels valid in both targets.
DiffTensor uncertainty_loss(Tape& t, const DiffTensor& u1, const DiffTensor& u2,
                            const Grid<double>& t1, const Grid<double>& t2);

/// dif(p) = |d1(p) - d2(p)|.
Grid<double> complementary_map(const DepthMap& d1, const DepthMap& d2);

/// L1 penalty on forward-difference spatial gradients of the normal and
/// distance tensors, restricted to the planar mask. Pairs that straddle the
/// mask boundary or a segment boundary are not counted.
DiffTensor plane_consistency_loss(Tape& t, const DiffTensor& n, const DiffTensor& dist,
                                  const PlaneMask& mask, const SegmentLabels& labels);

/// lambda1*L_D + lambda2*L_N + lambda3*L_dist + lambda4*L_U + lambda5*L_pc.
DiffTensor overall_loss(Tape& t, const DiffTensor& depth_loss, const DiffTensor& normal_loss,
                        const DiffTensor& distance_loss, const DiffTensor& uncertainty_loss,
                        const DiffTensor& plane_loss, const LossWeights& w);

}  // namespace ndg
