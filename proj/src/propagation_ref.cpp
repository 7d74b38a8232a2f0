#include "sdprop/propagation.hpp"

namespace sdprop {
namespace reference {

// Naive serial implementations, written straight from the update equations
// with no shared code or parallelism. They exist as the oracle for the
// OpenMP engine and as the benchmark baseline.

DepthGrid propagate_step_hard(const PropagationState& st) {
    if (st.mode != PropagationMode::hard_replace)
        throw error("reference::propagate_step_hard: wrong mode");
    const int w = st.depth.width, h = st.depth.height;
    const KernelSpec& kern = st.affinity.kernel;
    DepthGrid out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int32_t si = st.sparse_idx.at(x, y);
            if (si >= 0) {
                out.at(x, y) = st.sparse.entries[si].depth;
                continue;
            }
            size_t px = size_t(y) * w + x;
            double acc = st.affinity.center(px) * st.depth.at(x, y);
            for (int k = 0; k < kern.neighbor_count(); ++k) {
                auto [dx, dy] = kern.effective_offset(k);
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h)
                    continue;
                acc += st.affinity.neighbor(px, k) * st.depth.at(nx, ny);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

DepthGrid propagate_step_conf(const PropagationState& st) {
    if (st.mode != PropagationMode::confidence_blend)
        throw error("reference::propagate_step_conf: wrong mode");
    const int w = st.depth.width, h = st.depth.height;
    const KernelSpec& kern = st.affinity.kernel;
    DepthGrid out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t px = size_t(y) * w + x;
            double acc = st.affinity.center(px) * st.depth.at(x, y);
            for (int k = 0; k < kern.neighbor_count(); ++k) {
                auto [dx, dy] = kern.effective_offset(k);
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h)
                    continue;
                acc += st.pixel_conf.at(nx, ny) * st.affinity.neighbor(px, k) *
                       st.depth.at(nx, ny);
            }
            int32_t si = st.sparse_idx.at(x, y);
            if (si >= 0) {
                double cs = st.input_conf[si];
                acc = cs * st.sparse.entries[si].depth + (1.0 - cs) * acc;
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

DepthGrid run_propagation(const PropagationState& st, const KernelSpec& kernel) {
    if (kernel.offsets != st.affinity.kernel.offsets ||
        kernel.dilation != st.affinity.kernel.dilation)
        throw error("reference::run_propagation: kernel geometry mismatch");
    PropagationState cur = st;
    for (int t = 0; t < kernel.iterations; ++t) {
        cur.depth = cur.mode == PropagationMode::hard_replace
                        ? reference::propagate_step_hard(cur)
                        : reference::propagate_step_conf(cur);
    }
    return cur.depth;
}

} // namespace reference
} // namespace sdprop
