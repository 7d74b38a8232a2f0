#pragma once

#include <utility>
#include <vector>

#include "sdprop/grid.hpp"

namespace sdprop {

// Propagation geometry: neighbor offsets (excluding the center), a dilation
// factor applied to them, and the iteration count of the sweep.
struct KernelSpec {
    std::vector<std::pair<int, int>> offsets;  // (dx, dy), no (0,0), distinct
    int dilation = 1;
    int iterations = 0;

    int neighbor_count() const { return int(offsets.size()); }
    std::pair<int, int> effective_offset(int k) const {
        return {offsets[k].first * dilation, offsets[k].second * dilation};
    }
    void validate() const;
};

// The 8 offsets of the 3x3 ring, scaled by dilation.
KernelSpec kernel_3x3_dilated(int dilation, int iterations);

} // namespace sdprop
