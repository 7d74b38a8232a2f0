#include "sdprop/kernel.hpp"

#include <set>

namespace sdprop {

void KernelSpec::validate() const {
    if (dilation < 1)
        throw error("KernelSpec: dilation must be >= 1");
    if (iterations < 0)
        throw error("KernelSpec: iterations must be >= 0");
    std::set<std::pair<int, int>> seen;
    for (const auto& o : offsets) {
        if (o.first == 0 && o.second == 0)
            throw error("KernelSpec: (0,0) is not a neighbor offset");
        if (!seen.insert(o).second)
            throw error("KernelSpec: duplicate offset");
    }
}

KernelSpec kernel_3x3_dilated(int dilation, int iterations) {
    if (dilation < 1)
        throw error("kernel_3x3_dilated: dilation must be >= 1");
    KernelSpec k;
    k.dilation = dilation;
    k.iterations = iterations;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            if (dx != 0 || dy != 0)
                k.offsets.emplace_back(dx, dy);
    k.validate();
    return k;
}

} // namespace sdprop
