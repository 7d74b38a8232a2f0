#pragma once

#include "sdprop/grid.hpp"
#include "sdprop/kernel.hpp"
#include "sdprop/sparse.hpp"

namespace sdprop {

// Normalized per-pixel propagation weights. For every pixel,
// sum_k |w_k| <= 1 and w_center = 1 - sum_k w_k, so center + neighbors sum
// to 1 exactly. Neighbor order follows kernel.offsets.
struct AffinityField {
    int width = 0;
    int height = 0;
    KernelSpec kernel;
    std::vector<double> neighbor_w;  // width*height*K, pixel-major
    std::vector<double> center_w;    // width*height

    double neighbor(size_t pixel, int k) const { return neighbor_w[pixel * kernel.offsets.size() + k]; }
    double center(size_t pixel) const { return center_w[pixel]; }
};

// Abs-sum normalization: w_k = raw_k / max(sum_j |raw_j|, 1), center takes
// the remaining mass. This keeps each sweep a contraction regardless of raw
// weight signs. raw is pixel-major, K entries per pixel.
AffinityField normalize_affinity(const std::vector<double>& raw, const KernelSpec& kernel,
                                 int width, int height);

struct BilateralParams {
    double sigma_color = 0.25;   // on RGB distance, channels in [0,1]
    double sigma_normal = 0.5;   // radians
    double center_bias = 0.0;    // >= 0, shifts mass toward the center weight
};

// Hand-crafted affinity provider: raw_k =
//   exp(-|I_i - I_k|^2 / sigma_color^2 - angle(n_i, n_k)^2 / sigma_normal^2)
//     / (1 + center_bias),
// out-of-bounds neighbors get raw 0, then normalize_affinity.
AffinityField bilateral_affinity(const ColorGrid& img, const NormalGrid& normals,
                                 const KernelSpec& kernel, const BilateralParams& p);

// Default confidence provider: per-pixel confidence 1 everywhere, per-entry
// input confidence passed through from the sparse set.
struct ConfidencePair {
    ConfidenceGrid pixel_conf;
    std::vector<double> input_conf;
};
ConfidencePair default_confidence(const SparseDepth& sparse, const ColorGrid& img);

// Binary dump for inspection and golden-file tests: "AFF1" magic, u32 dims,
// neighbor count and dilation (the kernel id of the 3x3 family), then
// float32 weights per pixel (K neighbors followed by the center).
void write_affinity_dump(const std::string& path, const AffinityField& a);
AffinityField read_affinity_dump(const std::string& path);

} // namespace sdprop
