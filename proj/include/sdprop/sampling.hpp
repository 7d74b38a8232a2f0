#pragma once

#include <vector>

#include "sdprop/grid.hpp"
#include "sdprop/sparse.hpp"

namespace sdprop {

enum class SampleMode { uniform, keypoint };

struct DetectorConfig {
    double response_threshold = 1e-4;
    int nms_radius = 4;
};

struct SamplerConfig {
    SampleMode mode = SampleMode::keypoint;
    int max_samples = 800;
    uint64_t rng_seed = 0;
    DetectorConfig detector;
};

struct Keypoint {
    int x = 0;
    int y = 0;
    double response = 0.0;
};

// Draw exactly max_samples distinct valid (nonzero) pixels without
// replacement; deterministic under rng_seed. Entry conf = 1.
SparseDepth sample_uniform(const DepthGrid& gt, const SamplerConfig& cfg);

// Corner detector standing in for a feature keypoint detector: Sobel
// gradients on luminance, 3x3 Gaussian-weighted structure tensor, response
// det - 0.04 trace^2, thresholded and non-maximum-suppressed. Result sorted
// by descending response, truncated to max_samples.
std::vector<Keypoint> detect_keypoints(const ColorGrid& img, const SamplerConfig& cfg);

// Greedy NMS: strongest first, suppress anything within (Euclidean) radius of
// a kept point. Ties break on (y, x) for determinism.
std::vector<Keypoint> nms_keypoints(std::vector<Keypoint> pts, int radius);

// Depth read at each detected keypoint; keypoints on invalid depth are
// skipped; capped at max_samples.
SparseDepth sample_keypoints(const DepthGrid& gt, const ColorGrid& img, const SamplerConfig& cfg);

// 0.299 R + 0.587 G + 0.114 B
Grid2D<double> to_luminance(const ColorGrid& img);

// precision = fraction of candidate points within radius of some reference
// point; recall = the converse.
struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};
PrecisionRecall distribution_pr(const SparseDepth& candidate, const SparseDepth& reference,
                                double radius);

} // namespace sdprop
