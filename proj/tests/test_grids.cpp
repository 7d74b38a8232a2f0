#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sdprop/image_io.hpp"
#include "sdprop/resample.hpp"
#include "sdprop/rng.hpp"
#include "test_util.hpp"

using namespace sdprop;

namespace {

// independent block-mean oracle: straight double loop, invalid-aware
DepthGrid block_mean_oracle(const DepthGrid& g) {
    DepthGrid out((g.width + 1) / 2, (g.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy)
        for (int ox = 0; ox < out.width; ++ox) {
            double sum = 0;
            int n = 0;
            for (int y = 2 * oy; y < std::min(2 * oy + 2, g.height); ++y)
                for (int x = 2 * ox; x < std::min(2 * ox + 2, g.width); ++x)
                    if (g.at(x, y) > 0) {
                        sum += g.at(x, y);
                        ++n;
                    }
            out.at(ox, oy) = n ? sum / n : 0.0;
        }
    return out;
}

} // namespace

TEST_CASE("downsample: constant and invalid-exclusion examples") {
    DepthGrid g(2, 2, 1.0);
    DepthGrid d = downsample_depth_by_2(g);
    CHECK(d.width == 1);
    CHECK(d.height == 1);
    CHECK(d.at(0, 0) == 1.0);

    DepthGrid g2(2, 2, 0.0);
    g2.at(0, 0) = 4.0;
    CHECK(downsample_depth_by_2(g2).at(0, 0) == 4.0);

    DepthGrid g3(2, 2, 0.0);
    CHECK(downsample_depth_by_2(g3).at(0, 0) == 0.0);
}

TEST_CASE("downsample: random grids match the block-mean oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        int w = 2 + int(rng.bounded(9)), h = 2 + int(rng.bounded(9));
        DepthGrid g = testutil::random_depth(w, h, rng);
        // sprinkle invalids
        for (double& v : g.data)
            if (rng.unit() < 0.3)
                v = 0.0;
        DepthGrid got = downsample_depth_by_2(g);
        DepthGrid want = block_mean_oracle(g);
        REQUIRE(got.width == want.width);
        REQUIRE(got.height == want.height);
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-14));
    }
}

TEST_CASE("downsample: 6x4 full-validity grid matches plain mean oracle") {
    Rng rng(7);
    DepthGrid g = testutil::random_depth(6, 4, rng);
    DepthGrid got = downsample_by_2(g);
    DepthGrid want = block_mean_oracle(g);  // no invalids present, so same rule
    for (size_t i = 0; i < got.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-14));
}

TEST_CASE("downsample: rejects sub-2x2 input") {
    DepthGrid g(1, 4, 1.0);
    CHECK_THROWS_AS(downsample_depth_by_2(g), error);
}

TEST_CASE("upsample: constant extension and closed-form ramp") {
    DepthGrid one(1, 1, 5.0);
    DepthGrid up = upsample_bilinear_by_2(one, 2, 2);
    for (double v : up.data)
        CHECK(v == 5.0);

    // 2x1 ramp [0,2] -> 4x1 at half-pixel centers: u = X/2 - 0.25
    DepthGrid ramp(2, 1);
    ramp.at(0, 0) = 0.0;
    ramp.at(1, 0) = 2.0;
    DepthGrid up2 = upsample_bilinear_by_2(ramp, 4, 1);
    CHECK(up2.at(0, 0) == doctest::Approx(0.0));
    CHECK(up2.at(1, 0) == doctest::Approx(0.5));
    CHECK(up2.at(2, 0) == doctest::Approx(1.5));
    CHECK(up2.at(3, 0) == doctest::Approx(2.0));
    // endpoint-mean preservation: the output means equal the input values
    CHECK((up2.at(0, 0) + up2.at(1, 0)) / 2 + (up2.at(2, 0) + up2.at(3, 0)) / 2 ==
          doctest::Approx(ramp.at(0, 0) + ramp.at(1, 0)));
}

TEST_CASE("upsample: rejects inconsistent target dims") {
    DepthGrid g(4, 4, 1.0);
    CHECK_THROWS_AS(upsample_bilinear_by_2(g, 9, 8), error);
    CHECK_THROWS_AS(upsample_bilinear_by_2(g, 8, 6), error);
}

TEST_CASE("downsample then upsample reproduces constant grids exactly") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        int w = 2 + int(rng.bounded(30)), h = 2 + int(rng.bounded(30));
        double c = 0.1 + 9 * rng.unit();
        DepthGrid g(w, h, c);
        DepthGrid down = downsample_depth_by_2(g);
        DepthGrid up = upsample_bilinear_by_2(down, w, h);
        for (double v : up.data)
            CHECK(v == c);  // bit-exact
    }
}

TEST_CASE("distance_to_nearest: trivial cases") {
    MaskGrid all(4, 4, 1);
    Grid2D<double> d = distance_to_nearest(all);
    for (double v : d.data)
        CHECK(v == 0.0);

    MaskGrid one(8, 8, 0);
    one.at(0, 0) = 1;
    CHECK(distance_to_nearest(one).at(3, 4) == doctest::Approx(5.0));

    MaskGrid none(4, 4, 0);
    CHECK_THROWS_AS(distance_to_nearest(none), error);
}

TEST_CASE("distance_to_nearest matches brute force on random masks") {
    Rng rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        int w = 8 + int(rng.bounded(57)), h = 8 + int(rng.bounded(57));
        MaskGrid m(w, h, 0);
        int count = 1 + int(rng.bounded(20));
        for (int i = 0; i < count; ++i)
            m.at(int(rng.bounded(uint64_t(w))), int(rng.bounded(uint64_t(h)))) = 1;
        Grid2D<double> got = distance_to_nearest(m);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double best = 1e300;
                for (int sy = 0; sy < h; ++sy)
                    for (int sx = 0; sx < w; ++sx)
                        if (m.at(sx, sy)) {
                            double d2 = double(x - sx) * (x - sx) + double(y - sy) * (y - sy);
                            best = std::min(best, d2);
                        }
                CHECK(got.at(x, y) == doctest::Approx(std::sqrt(best)).epsilon(1e-12));
            }
    }
}

TEST_CASE("grid operations leave inputs unmodified") {
    Rng rng(5);
    DepthGrid g = testutil::random_depth(6, 6, rng);
    DepthGrid copy = g;
    (void)downsample_depth_by_2(g);
    (void)upsample_bilinear_by_2(g, 12, 12);
    CHECK(g == copy);
}

TEST_CASE("PFM round-trips depth and normals") {
    std::string dir = testutil::scratch_dir("pfm");
    Rng rng(9);
    DepthGrid g = testutil::random_depth(7, 5, rng);
    for (double& v : g.data)
        v = double(float(v));  // PFM stores float32
    write_pfm(dir + "/d.pfm", g);
    DepthGrid r = read_pfm(dir + "/d.pfm");
    CHECK(r == g);

    NormalGrid n(3, 4, Vec3{0, 0, -1});
    n.at(1, 2) = {0.6, 0.8, 0.0};
    write_pfm_normals(dir + "/n.pfm", n);
    NormalGrid rn = read_pfm_normals(dir + "/n.pfm");
    REQUIRE(rn.same_dims(3, 4));
    CHECK(rn.at(1, 2).x == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(rn.at(0, 0).z == -1.0);
}

TEST_CASE("PFM reader rejects wrong magic and truncation") {
    std::string dir = testutil::scratch_dir("pfm_bad");
    DepthGrid g(2, 2, 1.0);
    write_pfm(dir + "/d.pfm", g);
    CHECK_THROWS_AS(read_pfm_normals(dir + "/d.pfm"), error);  // Pf opened as PF

    // truncate the payload
    {
        std::filesystem::resize_file(dir + "/d.pfm",
                                     std::filesystem::file_size(dir + "/d.pfm") - 4);
        CHECK_THROWS_AS(read_pfm(dir + "/d.pfm"), error);
    }
}

TEST_CASE("PGM16 depth quantizes to millimeters") {
    std::string dir = testutil::scratch_dir("pgm");
    DepthGrid g(3, 2, 0.0);
    g.at(0, 0) = 1.2345;
    g.at(2, 1) = 60.0;
    write_pgm16_depth(dir + "/d.pgm", g);
    DepthGrid r = read_pgm16_depth(dir + "/d.pgm");
    CHECK(r.at(0, 0) == doctest::Approx(1.2345).epsilon(1e-3));
    CHECK(r.at(1, 0) == 0.0);
    CHECK(r.at(2, 1) == doctest::Approx(60.0));
}

TEST_CASE("PPM round-trips 8-bit color") {
    std::string dir = testutil::scratch_dir("ppm");
    ColorGrid c(4, 3, Rgb{0.25f, 0.5f, 1.0f});
    c.at(2, 1) = {0, 0, 0};
    write_ppm(dir + "/c.ppm", c);
    ColorGrid r = read_ppm(dir + "/c.ppm");
    CHECK(r.at(0, 0).g == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(r.at(2, 1).r == 0.f);
}

TEST_CASE("mask PGM round-trips") {
    std::string dir = testutil::scratch_dir("mask");
    MaskGrid m(5, 4, 0);
    m.at(3, 2) = 1;
    write_pgm_mask(dir + "/m.pgm", m);
    CHECK(read_pgm_mask(dir + "/m.pgm") == m);
}
