#include "sdprop/propagation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace sdprop {

PropagationState PropagationState::make(DepthGrid depth, SparseDepth sparse,
                                        AffinityField affinity, ConfidenceGrid pixel_conf,
                                        std::vector<double> input_conf, PropagationMode mode) {
    sparse.validate();
    if (depth.width != affinity.width || depth.height != affinity.height)
        throw error("PropagationState: depth and affinity dims differ");
    if (!depth.same_dims(sparse.width, sparse.height))
        throw error("PropagationState: depth and sparse host dims differ");
    if (!depth.same_dims(pixel_conf.width, pixel_conf.height))
        throw error("PropagationState: depth and confidence dims differ");
    if (input_conf.size() != sparse.entries.size())
        throw error("PropagationState: one input confidence per sparse entry required");
    for (double c : input_conf)
        if (!(c >= 0.0 && c <= 1.0))
            throw error("PropagationState: input confidence outside [0,1]");
    for (double c : pixel_conf.data)
        if (!(c >= 0.0 && c <= 1.0))
            throw error("PropagationState: pixel confidence outside [0,1]");

    PropagationState st;
    st.sparse_idx = sparse_index_map(sparse);
    st.depth = std::move(depth);
    st.sparse = std::move(sparse);
    st.affinity = std::move(affinity);
    st.pixel_conf = std::move(pixel_conf);
    st.input_conf = std::move(input_conf);
    st.mode = mode;
    if (st.mode == PropagationMode::hard_replace)
        for (const SparseEntry& e : st.sparse.entries)
            st.depth.at(e.x, e.y) = e.depth;
    return st;
}

namespace {

struct Offsets {
    int dx[32];
    int dy[32];
    int K;
    explicit Offsets(const KernelSpec& k) {
        K = k.neighbor_count();
        if (K > 32)
            throw error("propagation: more than 32 kernel offsets");
        for (int i = 0; i < K; ++i) {
            auto [x, y] = k.effective_offset(i);
            dx[i] = x;
            dy[i] = y;
        }
    }
};

// One Jacobi sweep reading `cur`, writing a fresh grid. Neighbor order is
// fixed per pixel, so the result is identical for any thread count.
DepthGrid sweep(const PropagationState& st, const DepthGrid& cur, bool use_conf) {
    const AffinityField& A = st.affinity;
    const int w = cur.width, h = cur.height;
    const Offsets off(A.kernel);
    const int K = off.K;
    DepthGrid out(w, h);
    const double* x = cur.data.data();
    const double* pc = st.pixel_conf.data.data();
    double* y = out.data.data();

#pragma omp parallel for schedule(static)
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const size_t px = size_t(row) * w + col;
            const double* wn = &A.neighbor_w[px * K];
            double acc = A.center_w[px] * x[px];
            if (use_conf) {
                for (int k = 0; k < K; ++k) {
                    int nx = col + off.dx[k], ny = row + off.dy[k];
                    if (nx >= 0 && nx < w && ny >= 0 && ny < h) {
                        size_t np = size_t(ny) * w + nx;
                        acc += pc[np] * wn[k] * x[np];
                    }
                }
            } else {
                for (int k = 0; k < K; ++k) {
                    int nx = col + off.dx[k], ny = row + off.dy[k];
                    if (nx >= 0 && nx < w && ny >= 0 && ny < h)
                        acc += wn[k] * x[size_t(ny) * w + nx];
                }
            }
            y[px] = acc;
        }
    }
    return out;
}

DepthGrid step_from(const PropagationState& st, const DepthGrid& cur) {
    if (st.mode == PropagationMode::hard_replace) {
        DepthGrid out = sweep(st, cur, false);
        for (const SparseEntry& e : st.sparse.entries)
            out.at(e.x, e.y) = e.depth;
        return out;
    }
    DepthGrid out = sweep(st, cur, true);
    for (size_t i = 0; i < st.sparse.entries.size(); ++i) {
        const SparseEntry& e = st.sparse.entries[i];
        const double cs = st.input_conf[i];
        out.at(e.x, e.y) = cs * e.depth + (1.0 - cs) * out.at(e.x, e.y);
    }
    return out;
}

#ifndef NDEBUG
// Range check per sweep. All-nonnegative normalized weights make each update
// a convex combination of previous values and sparse values; confidence < 1
// leaks mass toward 0, hence the 0 extension in that mode.
void assert_range(const PropagationState& st, const DepthGrid& prev, const DepthGrid& next) {
    bool nonneg = true;
    for (double v : st.affinity.neighbor_w)
        if (v < 0.0) {
            nonneg = false;
            break;
        }
    for (double v : st.affinity.center_w)
        if (v < 0.0) {
            nonneg = false;
            break;
        }
    if (!nonneg)
        return;
    double lo = prev.data[0], hi = prev.data[0];
    for (double v : prev.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const SparseEntry& e : st.sparse.entries) {
        lo = std::min(lo, e.depth);
        hi = std::max(hi, e.depth);
    }
    if (st.mode == PropagationMode::confidence_blend) {
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
    }
    const double slack = 1e-12 * std::max(std::abs(lo), std::abs(hi));
    for (double v : next.data)
        assert(v >= lo - slack && v <= hi + slack);
}
#endif

} // namespace

DepthGrid propagate_step_hard(const PropagationState& st) {
    if (st.mode != PropagationMode::hard_replace)
        throw error("propagate_step_hard: state mode is not hard_replace");
    return step_from(st, st.depth);
}

DepthGrid propagate_step_conf(const PropagationState& st) {
    if (st.mode != PropagationMode::confidence_blend)
        throw error("propagate_step_conf: state mode is not confidence_blend");
    return step_from(st, st.depth);
}

DepthGrid run_propagation(const PropagationState& st, const KernelSpec& kernel) {
    kernel.validate();
    if (kernel.offsets != st.affinity.kernel.offsets || kernel.dilation != st.affinity.kernel.dilation)
        throw error("run_propagation: kernel geometry does not match the affinity field");
    DepthGrid cur = st.depth;
    for (int t = 0; t < kernel.iterations; ++t) {
        DepthGrid next = step_from(st, cur);
#ifndef NDEBUG
        assert_range(st, cur, next);
#endif
        cur = std::move(next);
    }
    return cur;
}

} // namespace sdprop
