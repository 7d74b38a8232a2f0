#pragma once

#include <functional>
#include <vector>

#include "sdprop/affinity.hpp"
#include "sdprop/grid.hpp"
#include "sdprop/propagation.hpp"

namespace sdprop {

// Coarse-to-fine schedule. Scale 0 is the coarsest; dilation at scale k is
// base_dilation + k * dilation_increment. Defaults are the standard
// configuration: 4 scales, 8 iterations per scale, dilations 2,3,4,5.
struct PyramidConfig {
    int n_scales = 4;
    int iters_per_scale = 8;
    int base_dilation = 2;
    int dilation_increment = 1;

    int dilation_at(int scale) const { return base_dilation + scale * dilation_increment; }
    void validate() const;
};

// Per-scale inputs, index 0 = coarsest. Dims at scale k are
// ceil(full / 2^(n_scales-1-k)) per axis. GT depth is kept at the finest
// scale only; the loss builds its own GT pyramid.
struct ScaleBundle {
    std::vector<ColorGrid> color;
    std::vector<NormalGrid> normals;
    std::vector<SparseDepth> sparse;
    std::vector<AffinityField> affinity;
    std::vector<ConfidenceGrid> pixel_conf;
    DepthGrid gt_finest;  // may be empty (width 0) when no GT is available

    int n_scales() const { return int(color.size()); }
};

// Produces (affinity, pixel confidence) for one scale's inputs and kernel.
using AffinityProvider =
    std::function<std::pair<AffinityField, ConfidenceGrid>(const ColorGrid&, const NormalGrid&,
                                                           const KernelSpec&)>;

AffinityProvider make_bilateral_provider(const BilateralParams& params);

// Downsamples color/normals per scale, rescales sparse coordinates by power-
// of-two division (collisions keep the higher-confidence entry, ties the
// nearer depth), and runs the provider at every scale.
ScaleBundle build_scale_bundle(const ColorGrid& color, const NormalGrid& normals,
                               const SparseDepth& sparse, const DepthGrid& gt,
                               const PyramidConfig& cfg, const AffinityProvider& provider);

// Nearest-neighbor fill of the sparse entries (ties -> smaller depth).
DepthGrid coarse_init(const SparseDepth& sparse, int width, int height);

// Full coarse-to-fine run: initialize at scale 0, propagate, upsample,
// re-inject sparse depth, repeat. Returns the refined depth at every scale.
std::vector<DepthGrid> run_coarse_to_fine(const ScaleBundle& bundle, const PyramidConfig& cfg,
                                          PropagationMode mode);

// Invalid-aware GT pyramid for the loss, coarsest first.
std::vector<DepthGrid> build_gt_pyramid(const DepthGrid& gt_finest, int n_scales);

// Multi-scale L1: sum_s w_s * mean over valid-GT pixels |pred_s - gt_s|,
// w_s = 1 at the coarsest scale and +1 per finer scale.
double multiscale_loss(const std::vector<DepthGrid>& preds, const std::vector<DepthGrid>& gts);

// Inputs for fitting the bilateral affinity parameters.
struct TrainingScene {
    ColorGrid color;
    NormalGrid normals;
    SparseDepth sparse;
    DepthGrid gt;
};

// The fitting objective: multiscale_loss of the coarse-to-fine run under the
// given parameters (confidence_blend mode).
double bilateral_fit_loss(const TrainingScene& scene, const PyramidConfig& cfg,
                          const BilateralParams& params);

// Projected gradient descent with central finite differences and a
// backtracking guard; the returned parameters never lose to the initial ones.
BilateralParams fit_bilateral_params(const TrainingScene& scene, const PyramidConfig& cfg,
                                     BilateralParams init, int steps, double lr);

} // namespace sdprop
