#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "sdprop/sampling.hpp"
#include "sdprop/synth.hpp"
#include "test_util.hpp"

using namespace sdprop;

TEST_CASE("sample_uniform: exhaustive draw covers every pixel once") {
    DepthGrid g(5, 4, 2.0);
    SamplerConfig cfg;
    cfg.max_samples = 20;
    cfg.rng_seed = 1;
    SparseDepth s = sample_uniform(g, cfg);
    REQUIRE(s.entries.size() == 20);
    std::set<std::pair<int, int>> seen;
    for (const SparseEntry& e : s.entries) {
        CHECK(e.depth == 2.0);
        CHECK(e.conf == 1.0);
        seen.insert({e.x, e.y});
    }
    CHECK(seen.size() == 20);
}

TEST_CASE("sample_uniform: deterministic under seed, sensitive to it") {
    Rng rng(2);
    DepthGrid g = testutil::random_depth(30, 30, rng);
    SamplerConfig cfg;
    cfg.max_samples = 50;
    cfg.rng_seed = 77;
    SparseDepth a = sample_uniform(g, cfg);
    SparseDepth b = sample_uniform(g, cfg);
    REQUIRE(a.entries.size() == b.entries.size());
    for (size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].x == b.entries[i].x);
        CHECK(a.entries[i].y == b.entries[i].y);
    }
    cfg.rng_seed = 78;
    SparseDepth c = sample_uniform(g, cfg);
    bool same = true;
    for (size_t i = 0; i < a.entries.size() && same; ++i)
        same = a.entries[i].x == c.entries[i].x && a.entries[i].y == c.entries[i].y;
    CHECK(!same);
}

TEST_CASE("sample_uniform: rejects insufficient valid pixels") {
    DepthGrid g(4, 4, 0.0);
    g.at(0, 0) = 1.0;
    SamplerConfig cfg;
    cfg.max_samples = 2;
    CHECK_THROWS_AS(sample_uniform(g, cfg), error);
}

TEST_CASE("sample_uniform: skips invalid pixels entirely") {
    DepthGrid g(10, 10, 0.0);
    for (int x = 0; x < 10; ++x)
        g.at(x, 3) = 5.0;
    SamplerConfig cfg;
    cfg.max_samples = 10;
    cfg.rng_seed = 3;
    SparseDepth s = sample_uniform(g, cfg);
    for (const SparseEntry& e : s.entries)
        CHECK(e.y == 3);
}

TEST_CASE("sample_uniform: per-pixel frequency is uniform (statistical)") {
    // 10^4 draws of 100 samples from a fully valid 100x100 grid. Per pixel
    // the selection count is Binomial(10^4, 0.01): mean 100, sigma ~9.95.
    // Individual pixels may exceed 3 sigma (expected rate 0.27%); the check
    // is that the outlier rate stays below 1% and the grand total is exact.
    const int W = 100, draws = 10000, m = 100;
    DepthGrid g(W, W, 1.0);
    std::vector<uint32_t> counts(size_t(W) * W, 0);
    SamplerConfig cfg;
    cfg.max_samples = m;
    for (int d = 0; d < draws; ++d) {
        cfg.rng_seed = uint64_t(d);
        SparseDepth s = sample_uniform(g, cfg);
        for (const SparseEntry& e : s.entries)
            ++counts[size_t(e.y) * W + e.x];
    }
    const double p = double(m) / (W * W);
    const double mean = draws * p;
    const double sigma = std::sqrt(draws * p * (1 - p));
    long long total = 0;
    int outliers = 0;
    for (uint32_t c : counts) {
        total += c;
        if (std::abs(double(c) - mean) > 3 * sigma)
            ++outliers;
    }
    CHECK(total == (long long)draws * m);
    CHECK(outliers < W * W / 100);
}

namespace {

// one high-contrast X-junction at (cx, cy) in a flat field
ColorGrid single_corner_image(int w, int h, int cx, int cy) {
    ColorGrid img(w, h, Rgb{0.9f, 0.9f, 0.9f});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool dark = (x < cx) == (y < cy);
            img.at(x, y) = dark ? Rgb{0.1f, 0.1f, 0.1f} : Rgb{0.9f, 0.9f, 0.9f};
        }
    return img;
}

} // namespace

TEST_CASE("detect_keypoints: constant image yields nothing") {
    ColorGrid img(32, 32, Rgb{0.5f, 0.5f, 0.5f});
    SamplerConfig cfg;
    CHECK(detect_keypoints(img, cfg).empty());
}

TEST_CASE("detect_keypoints: single checkerboard corner found within 1 px") {
    ColorGrid img = single_corner_image(33, 33, 16, 16);
    SamplerConfig cfg;
    std::vector<Keypoint> kps = detect_keypoints(img, cfg);
    REQUIRE(!kps.empty());
    // strongest response within 1 px of the junction (corner sits between
    // pixels 15 and 16)
    CHECK(std::abs(kps[0].x - 15.5) <= 1.0);
    CHECK(std::abs(kps[0].y - 15.5) <= 1.0);
}

TEST_CASE("nms: of two close corners only the stronger survives") {
    std::vector<Keypoint> pts = {{10, 10, 5.0}, {13, 10, 7.0}};
    std::vector<Keypoint> kept = nms_keypoints(pts, 5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].x == 13);
}

TEST_CASE("nms: points beyond the radius both survive, sorted by response") {
    std::vector<Keypoint> pts = {{10, 10, 5.0}, {30, 10, 7.0}, {50, 10, 6.0}};
    std::vector<Keypoint> kept = nms_keypoints(pts, 5);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].response == 7.0);
    CHECK(kept[1].response == 6.0);
}

TEST_CASE("sample_keypoints: entries capped and invalid depth skipped") {
    ColorGrid img = single_corner_image(33, 33, 16, 16);
    DepthGrid gt(33, 33, 3.0);
    SamplerConfig cfg;
    SparseDepth s = sample_keypoints(gt, img, cfg);
    std::vector<Keypoint> kps = detect_keypoints(img, cfg);
    CHECK(s.entries.size() == std::min(kps.size(), size_t(cfg.max_samples)));

    // knock out the depth under every keypoint: all skipped
    DepthGrid holes = gt;
    for (const Keypoint& k : kps)
        holes.at(k.x, k.y) = 0.0;
    CHECK(sample_keypoints(holes, img, cfg).entries.empty());
}

TEST_CASE("keypoint samples concentrate in the textured half") {
    SceneSpec spec = make_scene(SceneLayout::two_walls, 160, 120);
    ViewRender r = std::move(render_scene(spec)[0]);
    SamplerConfig cfg;
    cfg.max_samples = 200;
    SparseDepth kp = sample_keypoints(r.depth, r.color, cfg);
    REQUIRE(kp.entries.size() >= 20);

    cfg.rng_seed = 5;
    SparseDepth uni = sample_uniform(r.depth, cfg);

    auto in_mask_fraction = [&](const SparseDepth& s) {
        int in = 0;
        for (const SparseEntry& e : s.entries)
            in += r.texture_mask.at(e.x, e.y) ? 1 : 0;
        return double(in) / double(s.entries.size());
    };
    double f_kp = in_mask_fraction(kp), f_uni = in_mask_fraction(uni);
    CHECK(f_kp >= 2.0 * f_uni);
}

TEST_CASE("distribution_pr: identity, disjoint and brute-force oracle") {
    SparseDepth a;
    a.width = a.height = 64;
    a.entries = {{3, 3, 1.0, 1.0}, {40, 9, 1.0, 1.0}};
    PrecisionRecall self = distribution_pr(a, a, 2.0);
    CHECK(self.precision == 1.0);
    CHECK(self.recall == 1.0);

    SparseDepth b = a;
    b.entries = {{20, 50, 1.0, 1.0}};
    PrecisionRecall pr = distribution_pr(a, b, 1.0);
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 0.0);

    // random 50 vs 50, radius 4: brute-force oracle
    Rng rng(6);
    SparseDepth c = testutil::random_sparse(64, 64, 50, rng);
    SparseDepth d = testutil::random_sparse(64, 64, 50, rng);
    PrecisionRecall got = distribution_pr(c, d, 4.0);
    int hits = 0;
    for (const SparseEntry& p : c.entries) {
        bool near = false;
        for (const SparseEntry& q : d.entries)
            near |= (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) <= 16;
        hits += near;
    }
    CHECK(got.precision == doctest::Approx(hits / 50.0));

    // symmetry: swapping the sets exchanges precision and recall
    PrecisionRecall swapped = distribution_pr(d, c, 4.0);
    CHECK(swapped.precision == doctest::Approx(got.recall));
    CHECK(swapped.recall == doctest::Approx(got.precision));

    SparseDepth empty;
    empty.width = empty.height = 64;
    CHECK_THROWS_AS(distribution_pr(empty, a, 2.0), error);
}

TEST_CASE("sparse depth text format round-trips at 9 digits") {
    std::string dir = testutil::scratch_dir("sparse_io");
    Rng rng(8);
    SparseDepth s = testutil::random_sparse(100, 80, 40, rng, true);
    write_sparse_depth(dir + "/a.txt", s);
    SparseDepth r = read_sparse_depth(dir + "/a.txt");
    REQUIRE(r.entries.size() == s.entries.size());
    CHECK(r.width == s.width);
    for (size_t i = 0; i < s.entries.size(); ++i) {
        CHECK(r.entries[i].x == s.entries[i].x);
        CHECK(r.entries[i].y == s.entries[i].y);
        CHECK(r.entries[i].depth == doctest::Approx(s.entries[i].depth).epsilon(1e-8));
        CHECK(r.entries[i].conf == doctest::Approx(s.entries[i].conf).epsilon(1e-8));
    }

    // lossless at the stored precision: a second write reproduces the bytes
    write_sparse_depth(dir + "/b.txt", r);
    std::ifstream fa(dir + "/a.txt"), fb(dir + "/b.txt");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("sparse depth reader rejects bad headers and bad entries") {
    std::string dir = testutil::scratch_dir("sparse_bad");
    {
        std::ofstream f(dir + "/bad1.txt");
        f << "sparse_dept 4 4 0\n";
    }
    CHECK_THROWS_AS(read_sparse_depth(dir + "/bad1.txt"), error);
    {
        std::ofstream f(dir + "/bad2.txt");
        f << "sparse_depth 4 4 1\n9 0 1.0 1.0\n";  // out of bounds
    }
    CHECK_THROWS_AS(read_sparse_depth(dir + "/bad2.txt"), error);
    {
        std::ofstream f(dir + "/bad3.txt");
        f << "sparse_depth 4 4 2\n1 1 1.0 1.0\n1 1 2.0 1.0\n";  // duplicate
    }
    CHECK_THROWS_AS(read_sparse_depth(dir + "/bad3.txt"), error);
}
