#pragma once

#include "sdprop/affinity.hpp"
#include "sdprop/grid.hpp"
#include "sdprop/kernel.hpp"
#include "sdprop/sparse.hpp"

namespace sdprop {

enum class PropagationMode { hard_replace, confidence_blend };

// Everything one Jacobi sweep needs. In hard_replace mode the constructor
// writes the sparse values into depth, so the "sparse pixels hold their input
// value exactly" invariant is true from step zero.
struct PropagationState {
    DepthGrid depth;
    SparseDepth sparse;
    AffinityField affinity;
    ConfidenceGrid pixel_conf;
    std::vector<double> input_conf;  // c^s per sparse entry, [0,1]
    PropagationMode mode = PropagationMode::hard_replace;

    Grid2D<int32_t> sparse_idx;  // -1 where no entry

    static PropagationState make(DepthGrid depth, SparseDepth sparse, AffinityField affinity,
                                 ConfidenceGrid pixel_conf, std::vector<double> input_conf,
                                 PropagationMode mode);
};

// One synchronous sweep: every pixel reads the previous iterate only, so the
// row loop parallelizes with results identical to the sequential order.
// Off-sparse pixels: x <- w_c x + sum_k w_k x_nb (out-of-bounds terms are 0).
// Sparse pixels: x <- s.
DepthGrid propagate_step_hard(const PropagationState& state);

// Confidence-weighted sweep: x' <- w_c x + sum_k conf_nb w_k x_nb everywhere,
// then sparse pixels blend x <- c^s s + (1 - c^s) x'.
DepthGrid propagate_step_conf(const PropagationState& state);

// Applies the step selected by state.mode kernel.iterations times; 0
// iterations returns state.depth unchanged. Accumulation is per-pixel in
// doubles with a fixed neighbor order, so results do not depend on the
// thread count.
DepthGrid run_propagation(const PropagationState& state, const KernelSpec& kernel);

namespace reference {

// Deliberately naive serial sweeps: a plain double loop over pixels and
// offsets, no OpenMP, no shared code with the engine above. These are the
// test oracle and the benchmark baseline.
DepthGrid propagate_step_hard(const PropagationState& state);
DepthGrid propagate_step_conf(const PropagationState& state);
DepthGrid run_propagation(const PropagationState& state, const KernelSpec& kernel);

} // namespace reference

} // namespace sdprop
