#pragma once

#include <array>
#include <string>
#include <vector>

#include "sdprop/geometry.hpp"
#include "sdprop/grid.hpp"
#include "sdprop/kernel.hpp"
#include "sdprop/pyramid.hpp"
#include "sdprop/sparse.hpp"

namespace sdprop {

inline constexpr std::array<double, 6> kDeltaThresholds = {1.02, 1.05, 1.10,
                                                           1.25, 1.5625, 1.953125};

struct DepthMetrics {
    double rmse = 0.0;  // meters
    double rel = 0.0;
    std::array<double, 6> delta = {};  // percent inliers per kDeltaThresholds
    double irmse = 0.0;  // 1/m
    double imae = 0.0;   // 1/m
    size_t n_valid = 0;
};

// Over pixels where both GT and prediction are valid (> 0):
// rmse, rel = mean |p-g|/g, delta_tau = 100 * fraction with max(p/g, g/p) < tau.
DepthMetrics depth_metrics(const DepthGrid& pred, const DepthGrid& gt);

struct CloudMetrics {
    double accuracy = 0.0;      // percent of pred within threshold of GT
    double completeness = 0.0;  // percent of GT within threshold of pred
    double f1 = 0.0;            // harmonic mean, 0 if both are 0
    double threshold = 0.0;     // meters
};

CloudMetrics cloud_metrics(const PointCloud& pred, const PointCloud& gt, double threshold);

struct DistanceBin {
    double lo = 0.0;
    double hi = 0.0;
    double mean_rel = 0.0;
    size_t count = 0;
};

// Mean REL binned by each pixel's distance to the nearest sparse sample.
std::vector<DistanceBin> error_vs_distance(const DepthGrid& pred, const DepthGrid& gt,
                                           const SparseDepth& sparse, double bin_width);

struct ReachReport {
    MaskGrid mask;          // influence mask at the finest resolution
    int radius = 0;         // max Chebyshev distance from the impulse, finest pixels
    long long area = 0;     // popcount of mask
    double area_ratio = 0;  // vs the 24-iteration dilation-1 single-scale baseline
    int grid_w = 0, grid_h = 0;
};

// Influence mask of a centered impulse, measured by running the actual
// propagation pipeline (uniform all-positive affinities, hard injection,
// zero-initialized depth) and marking pixels whose value changed. Single
// scale when cfg.n_scales == 1; otherwise the full coarse-to-fine path with
// exact-doubling dims. Throws when the reach would touch the grid border.
ReachReport receptive_field(const PyramidConfig& cfg, int finest_w, int finest_h);

// Auto-sizes the grid so the reach fits, growing in 2^(n_scales-1) steps.
ReachReport receptive_field_autosize(const PyramidConfig& cfg);

// Key-value text (one "key value" line per metric) plus a small table.
std::string depth_metrics_kv(const DepthMetrics& m);
std::string depth_metrics_table(const DepthMetrics& m);
std::string cloud_metrics_kv(const CloudMetrics& m);

} // namespace sdprop
