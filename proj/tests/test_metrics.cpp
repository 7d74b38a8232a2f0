#include <doctest.h>

#include <cmath>

#include "sdprop/metrics.hpp"
#include "sdprop/sampling.hpp"
#include "sdprop/synth.hpp"
#include "test_util.hpp"

using namespace sdprop;

TEST_CASE("depth_metrics: exact match and threshold arithmetic") {
    DepthGrid g(4, 4, 2.0);
    DepthMetrics m = depth_metrics(g, g);
    CHECK(m.rmse == 0.0);
    CHECK(m.rel == 0.0);
    for (double d : m.delta)
        CHECK(d == 100.0);

    DepthGrid pred(1, 1, 1.03), gt(1, 1, 1.00);
    DepthMetrics m2 = depth_metrics(pred, gt);
    CHECK(m2.delta[0] == 0.0);    // 1.02
    CHECK(m2.delta[1] == 100.0);  // 1.05
    CHECK(m2.rel == doctest::Approx(0.03));
}

TEST_CASE("depth_metrics: brute-force oracle on random pairs") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        DepthGrid pred = testutil::random_depth(16, 16, rng);
        DepthGrid gt = testutil::random_depth(16, 16, rng);
        for (double& v : gt.data)
            if (rng.unit() < 0.2)
                v = 0.0;
        for (double& v : pred.data)
            if (rng.unit() < 0.1)
                v = 0.0;
        DepthMetrics m = depth_metrics(pred, gt);

        double se = 0, rel = 0, ise = 0, iae = 0;
        size_t n = 0, in102 = 0;
        for (int i = 0; i < 256; ++i) {
            double p = pred.data[i], g = gt.data[i];
            if (p <= 0 || g <= 0)
                continue;
            ++n;
            se += (p - g) * (p - g);
            rel += std::abs(p - g) / g;
            ise += (1 / p - 1 / g) * (1 / p - 1 / g);
            iae += std::abs(1 / p - 1 / g);
            if (std::max(p / g, g / p) < 1.02)
                ++in102;
        }
        REQUIRE(n > 0);
        CHECK(m.rmse == doctest::Approx(std::sqrt(se / n)).epsilon(1e-9));
        CHECK(m.rel == doctest::Approx(rel / n).epsilon(1e-9));
        CHECK(m.irmse == doctest::Approx(std::sqrt(ise / n)).epsilon(1e-9));
        CHECK(m.imae == doctest::Approx(iae / n).epsilon(1e-9));
        CHECK(m.delta[0] == doctest::Approx(100.0 * in102 / n).epsilon(1e-9));

        // monotone in tau
        for (int t = 1; t < 6; ++t)
            CHECK(m.delta[t] >= m.delta[t - 1]);
    }
}

TEST_CASE("depth_metrics: error when no overlap") {
    DepthGrid a(2, 2, 0.0), b(2, 2, 1.0);
    CHECK_THROWS_AS(depth_metrics(a, b), error);
}

TEST_CASE("cloud_metrics: identity, thresholds, harmonic mean") {
    PointCloud c;
    c.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CloudMetrics m = cloud_metrics(c, c, 0.01);
    CHECK(m.accuracy == 100.0);
    CHECK(m.completeness == 100.0);
    CHECK(m.f1 == 100.0);

    PointCloud a, b;
    a.points = {{0, 0, 0}};
    b.points = {{0.03, 0, 0}};
    CloudMetrics tight = cloud_metrics(a, b, 0.02);
    CHECK(tight.accuracy == 0.0);
    CHECK(tight.completeness == 0.0);
    CHECK(tight.f1 == 0.0);
    CloudMetrics loose = cloud_metrics(a, b, 0.05);
    CHECK(loose.f1 == 100.0);

    // harmonic-mean formula on synthetic values
    double acc = 24.9, comp = 86.5;
    double f1 = 2 * acc * comp / (acc + comp);
    CHECK(f1 == doctest::Approx(38.67).epsilon(1e-3));

    CHECK_THROWS_AS(cloud_metrics(PointCloud{}, c, 0.01), error);
}

TEST_CASE("cloud_metrics: grid accelerator matches the all-pairs oracle") {
    Rng rng(62);
    for (int trial = 0; trial < 4; ++trial) {
        PointCloud a, b;
        int na = 200 + int(rng.bounded(1800)), nb = 200 + int(rng.bounded(1800));
        for (int i = 0; i < na; ++i)
            a.points.push_back({4 * rng.unit() - 2, 4 * rng.unit() - 2, 4 * rng.unit()});
        for (int i = 0; i < nb; ++i)
            b.points.push_back({4 * rng.unit() - 2, 4 * rng.unit() - 2, 4 * rng.unit()});
        double threshold = 0.05 + 0.15 * rng.unit();
        CloudMetrics m = cloud_metrics(a, b, threshold);

        auto oracle = [&](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
            size_t hit = 0;
            for (const Vec3& p : from) {
                bool near = false;
                for (const Vec3& q : to)
                    if (dot(p - q, p - q) <= threshold * threshold) {
                        near = true;
                        break;
                    }
                hit += near;
            }
            return 100.0 * double(hit) / double(from.size());
        };
        CHECK(m.accuracy == doctest::Approx(oracle(a.points, b.points)).epsilon(1e-12));
        CHECK(m.completeness == doctest::Approx(oracle(b.points, a.points)).epsilon(1e-12));

        // symmetry: swapping clouds swaps accuracy and completeness
        CloudMetrics sw = cloud_metrics(b, a, threshold);
        CHECK(sw.accuracy == doctest::Approx(m.completeness).epsilon(1e-12));
        CHECK(sw.completeness == doctest::Approx(m.accuracy).epsilon(1e-12));
        CHECK(sw.f1 == doctest::Approx(m.f1).epsilon(1e-9));
    }
}

TEST_CASE("error_vs_distance: zeros, single bin, recomposition") {
    Rng rng(63);
    DepthGrid gt = testutil::random_depth(24, 18, rng);
    SparseDepth sparse = testutil::random_sparse(24, 18, 6, rng);

    auto bins0 = error_vs_distance(gt, gt, sparse, 4.0);
    for (const auto& b : bins0)
        CHECK(b.mean_rel == 0.0);

    DepthGrid pred = gt;
    for (double& v : pred.data)
        v += 0.2 * rng.unit();

    // one giant bin reproduces global REL
    auto one = error_vs_distance(pred, gt, sparse, 1e6);
    REQUIRE(one.size() == 1);
    DepthMetrics m = depth_metrics(pred, gt);
    CHECK(one[0].mean_rel == doctest::Approx(m.rel).epsilon(1e-12));

    // count-weighted bin means recompose global REL
    auto bins = error_vs_distance(pred, gt, sparse, 3.0);
    double wsum = 0;
    size_t total = 0;
    for (const auto& b : bins) {
        wsum += b.mean_rel * double(b.count);
        total += b.count;
    }
    CHECK(total == m.n_valid);
    CHECK(wsum / double(total) == doctest::Approx(m.rel).epsilon(1e-9));
}

TEST_CASE("error grows less with distance under the long-reach config") {
    // keypoint-sampled far-wall scene: compare the far-distance bins of the
    // single-scale dilation-1 run against the full coarse-to-fine run
    SceneSpec spec = make_scene(SceneLayout::far_wall, 320, 240);
    ViewRender r = std::move(render_scene(spec)[0]);
    SamplerConfig scfg;
    scfg.max_samples = 800;
    TrainingScene t;
    t.sparse = sample_keypoints(r.depth, r.color, scfg);
    t.color = std::move(r.color);
    t.normals = std::move(r.normals);
    t.gt = std::move(r.depth);
    REQUIRE(!t.sparse.entries.empty());

    auto finest = [&](const PyramidConfig& cfg) {
        ScaleBundle b = build_scale_bundle(t.color, t.normals, t.sparse, t.gt, cfg,
                                           make_bilateral_provider({}));
        return run_coarse_to_fine(b, cfg, PropagationMode::hard_replace).back();
    };
    PyramidConfig full;  // defaults: long reach
    PyramidConfig plain;
    plain.n_scales = 1;
    plain.iters_per_scale = 24;
    plain.base_dilation = 1;

    const double bin_w = 16.0;
    auto bins_full = error_vs_distance(finest(full), t.gt, t.sparse, bin_w);
    auto bins_plain = error_vs_distance(finest(plain), t.gt, t.sparse, bin_w);
    REQUIRE(bins_plain.size() >= 4);
    // the farthest populated bins are where the reach difference shows
    size_t last = bins_plain.size() - 1;
    while (last > 0 && bins_plain[last].count < 100)
        --last;
    CHECK(bins_plain[last].lo >= 48.0);
    CHECK(bins_full[last].mean_rel < bins_plain[last].mean_rel);
    CHECK(bins_full[last - 1].mean_rel < bins_plain[last - 1].mean_rel);
}

TEST_CASE("receptive_field: baseline radius 24, area 2401") {
    PyramidConfig base;
    base.n_scales = 1;
    base.iters_per_scale = 24;
    base.base_dilation = 1;
    ReachReport r = receptive_field_autosize(base);
    CHECK(r.radius == 24);
    CHECK(r.area == 2401);
    CHECK(r.area_ratio == doctest::Approx(1.0));
}

TEST_CASE("receptive_field: single-scale mask is the dilation sublattice ball") {
    // offsets are multiples of d, so a lone impulse reaches only pixels at
    // offsets divisible by d: radius d*t, (2t+1)^2 pixels
    PyramidConfig cfg;
    cfg.n_scales = 1;
    cfg.iters_per_scale = 8;
    cfg.base_dilation = 2;
    ReachReport r = receptive_field_autosize(cfg);
    CHECK(r.radius == 16);
    CHECK(r.area == (2 * 8 + 1) * (2 * 8 + 1));
}

namespace {

// independent 1D influence simulation per axis: stride-d dilation per
// sweep (impulse pixel pinned), bilinear support across each upsample
struct AxisSim {
    std::vector<char> set;
    int center;
};

AxisSim axis_oracle(const PyramidConfig& cfg, int coarse_dim, int coarse_center) {
    AxisSim s;
    s.set.assign(coarse_dim, 0);
    s.center = coarse_center;
    s.set[coarse_center] = 1;
    for (int k = 0; k < cfg.n_scales; ++k) {
        int d = cfg.dilation_at(k);
        for (int it = 0; it < cfg.iters_per_scale; ++it) {
            std::vector<char> next(s.set.size(), 0);
            for (int x = 0; x < int(s.set.size()); ++x)
                for (int m : {-d, 0, d}) {
                    int src = x - m;
                    if (src >= 0 && src < int(s.set.size()) && s.set[src])
                        next[x] = 1;
                }
            next[s.center] = 1;  // hard-injected impulse
            s.set = std::move(next);
        }
        if (k < cfg.n_scales - 1) {
            int fine_dim = int(s.set.size()) * 2;
            std::vector<char> fine(fine_dim, 0);
            for (int X = 0; X < fine_dim; ++X) {
                double u = (X + 0.5) * 0.5 - 0.5;
                int i0 = std::max(0, std::min(int(std::floor(u)), int(s.set.size()) - 1));
                int i1 = std::min(i0 + 1, int(s.set.size()) - 1);
                fine[X] = s.set[i0] || s.set[i1];
            }
            s.set = std::move(fine);
            s.center *= 2;
        }
    }
    return s;
}

} // namespace

TEST_CASE("receptive_field: pipeline mask equals the per-axis product oracle") {
    // configurations whose masks factor into per-axis sets: single-scale
    // (any dilation), and multi-scale with coarsest dilation <= 2
    PyramidConfig cfgs[3];
    cfgs[0].n_scales = 2;
    cfgs[0].iters_per_scale = 3;
    cfgs[0].base_dilation = 1;
    cfgs[0].dilation_increment = 1;
    cfgs[1].n_scales = 3;
    cfgs[1].iters_per_scale = 2;
    cfgs[1].base_dilation = 2;
    cfgs[1].dilation_increment = 1;
    cfgs[2].n_scales = 1;
    cfgs[2].iters_per_scale = 5;
    cfgs[2].base_dilation = 3;
    cfgs[2].dilation_increment = 0;

    for (const PyramidConfig& cfg : cfgs) {
        ReachReport r = receptive_field_autosize(cfg);
        const int div = 1 << (cfg.n_scales - 1);
        AxisSim sx = axis_oracle(cfg, r.grid_w / div, r.grid_w / div / 2);
        AxisSim sy = axis_oracle(cfg, r.grid_h / div, r.grid_h / div / 2);
        REQUIRE(int(sx.set.size()) == r.grid_w);
        for (int y = 0; y < r.grid_h; ++y)
            for (int x = 0; x < r.grid_w; ++x) {
                bool inside = sx.set[x] && sy.set[y];
                CHECK(bool(r.mask.at(x, y)) == inside);
            }
    }
}

TEST_CASE("receptive_field: reach exceeding the grid is an error") {
    PyramidConfig cfg;
    cfg.n_scales = 1;
    cfg.iters_per_scale = 24;
    cfg.base_dilation = 1;
    CHECK_THROWS_AS(receptive_field(cfg, 32, 32), error);
}

TEST_CASE("metrics text formats carry the key lines") {
    DepthGrid g(2, 2, 1.0);
    DepthMetrics m = depth_metrics(g, g);
    std::string kv = depth_metrics_kv(m);
    CHECK(kv.find("rmse 0") != std::string::npos);
    CHECK(kv.find("delta_1.02 100") != std::string::npos);
    CHECK(kv.find("n_valid 4") != std::string::npos);
}
