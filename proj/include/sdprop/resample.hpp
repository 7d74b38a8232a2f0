#pragma once

#include "sdprop/grid.hpp"

namespace sdprop {

// Block-mean downsample to ceil(w/2) x ceil(h/2). Partial boundary blocks are
// averaged over the pixels they cover. Requires w, h >= 2.
template <class V>
Grid2D<V> downsample_by_2(const Grid2D<V>& g);

// Depth variant: invalid (0) pixels are excluded from the block mean; the
// output is 0 only if every covered pixel is invalid.
DepthGrid downsample_depth_by_2(const DepthGrid& g);

// Normal variant: block mean re-normalized to unit length. A degenerate mean
// (opposing normals cancelling) falls back to the first covered normal.
NormalGrid downsample_normals_by_2(const NormalGrid& g);

// Bilinear upsample with half-pixel-center alignment, the one alignment
// convention used by the whole pyramid. Target dims must be in
// [2*dim - 1, 2*dim].
DepthGrid upsample_bilinear_by_2(const DepthGrid& g, int target_w, int target_h);

// Exact Euclidean distance from every pixel to the nearest true pixel.
// Requires at least one true pixel.
Grid2D<double> distance_to_nearest(const MaskGrid& mask);

} // namespace sdprop
