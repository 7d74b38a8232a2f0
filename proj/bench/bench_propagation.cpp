// Compares the OpenMP sweep against the naive serial reference at a few
// realistic sizes. Run with --benchmark_time_unit=ms for readable numbers.

#include <benchmark/benchmark.h>

#include "sdprop/metrics.hpp"
#include "sdprop/propagation.hpp"
#include "sdprop/rng.hpp"

using namespace sdprop;

namespace {

AffinityField random_affinity(int w, int h, const KernelSpec& kern, Rng& rng) {
    const size_t K = kern.offsets.size();
    std::vector<double> raw(size_t(w) * h * K, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (size_t k = 0; k < K; ++k) {
                int nx = x + kern.offsets[k].first * kern.dilation;
                int ny = y + kern.offsets[k].second * kern.dilation;
                if (nx >= 0 && nx < w && ny >= 0 && ny < h)
                    raw[(size_t(y) * w + x) * K + k] = rng.unit();
            }
    return normalize_affinity(raw, kern, w, h);
}

PropagationState make_state(int w, int h, int dilation, PropagationMode mode) {
    Rng rng(1234);
    KernelSpec kern = kernel_3x3_dilated(dilation, 1);
    DepthGrid depth(w, h);
    for (double& v : depth.data)
        v = 1.0 + 4.0 * rng.unit();
    SparseDepth sparse;
    sparse.width = w;
    sparse.height = h;
    for (int i = 0; i < w * h / 100; ++i) {
        int x = int(rng.bounded(uint64_t(w))), y = int(rng.bounded(uint64_t(h)));
        bool dup = false;
        for (const SparseEntry& e : sparse.entries)
            if (e.x == x && e.y == y) {
                dup = true;
                break;
            }
        if (!dup)
            sparse.entries.push_back({x, y, 2.0, 0.8});
    }
    std::vector<double> ic(sparse.entries.size(), 0.8);
    return PropagationState::make(std::move(depth), std::move(sparse),
                                  random_affinity(w, h, kern, rng), ConfidenceGrid(w, h, 1.0),
                                  std::move(ic), mode);
}

void bm_step_omp(benchmark::State& state) {
    const int w = int(state.range(0)), h = int(state.range(1));
    PropagationState st = make_state(w, h, int(state.range(2)), PropagationMode::hard_replace);
    for (auto _ : state) {
        DepthGrid out = propagate_step_hard(st);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}

void bm_step_serial_ref(benchmark::State& state) {
    const int w = int(state.range(0)), h = int(state.range(1));
    PropagationState st = make_state(w, h, int(state.range(2)), PropagationMode::hard_replace);
    for (auto _ : state) {
        DepthGrid out = reference::propagate_step_hard(st);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}

void bm_step_conf_omp(benchmark::State& state) {
    const int w = int(state.range(0)), h = int(state.range(1));
    PropagationState st = make_state(w, h, int(state.range(2)), PropagationMode::confidence_blend);
    for (auto _ : state) {
        DepthGrid out = propagate_step_conf(st);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}

void bm_step_conf_serial_ref(benchmark::State& state) {
    const int w = int(state.range(0)), h = int(state.range(1));
    PropagationState st = make_state(w, h, int(state.range(2)), PropagationMode::confidence_blend);
    for (auto _ : state) {
        DepthGrid out = reference::propagate_step_conf(st);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}

void bm_receptive_field_default(benchmark::State& state) {
    PyramidConfig cfg;  // defaults: 4 scales, 8 iters, dilations 2..5
    for (auto _ : state) {
        ReachReport r = receptive_field_autosize(cfg);
        benchmark::DoNotOptimize(r.area);
    }
}

} // namespace

BENCHMARK(bm_step_omp)->Args({320, 240, 1})->Args({320, 240, 2})->Args({960, 640, 2});
BENCHMARK(bm_step_serial_ref)->Args({320, 240, 1})->Args({320, 240, 2})->Args({960, 640, 2});
BENCHMARK(bm_step_conf_omp)->Args({320, 240, 2})->Args({960, 640, 2});
BENCHMARK(bm_step_conf_serial_ref)->Args({320, 240, 2})->Args({960, 640, 2});
BENCHMARK(bm_receptive_field_default)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
