#include "sdprop/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdprop {

namespace {

void check_downsample_dims(int w, int h) {
    if (w < 2 || h < 2)
        throw error("downsample_by_2: dimensions must be >= 2");
}

// Covered input range of output pixel o along one axis: {2o, 2o+1} clipped.
inline int block_end(int o, int dim) { return std::min(2 * o + 2, dim); }

} // namespace

template <class V>
Grid2D<V> downsample_by_2(const Grid2D<V>& g);

// Generic scalar/struct mean is instantiated per type below; blocks have
// 1, 2 or 4 pixels, summed pairwise so constant fields survive bit-exactly.
template <>
Grid2D<double> downsample_by_2(const Grid2D<double>& g) {
    check_downsample_dims(g.width, g.height);
    Grid2D<double> out((g.width + 1) / 2, (g.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            int x0 = 2 * ox, x1 = block_end(ox, g.width);
            int y0 = 2 * oy, y1 = block_end(oy, g.height);
            double rows[2] = {0, 0};
            int n = 0;
            for (int y = y0; y < y1; ++y) {
                double r = 0;
                for (int x = x0; x < x1; ++x) {
                    r += g.at(x, y);
                    ++n;
                }
                rows[y - y0] = r;
            }
            out.at(ox, oy) = (rows[0] + rows[1]) / n;
        }
    }
    return out;
}

template <>
Grid2D<Rgb> downsample_by_2(const Grid2D<Rgb>& g) {
    check_downsample_dims(g.width, g.height);
    Grid2D<Rgb> out((g.width + 1) / 2, (g.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            int x0 = 2 * ox, x1 = block_end(ox, g.width);
            int y0 = 2 * oy, y1 = block_end(oy, g.height);
            double r = 0, gg = 0, b = 0;
            int n = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    const Rgb& c = g.at(x, y);
                    r += c.r;
                    gg += c.g;
                    b += c.b;
                    ++n;
                }
            out.at(ox, oy) = {float(r / n), float(gg / n), float(b / n)};
        }
    }
    return out;
}

DepthGrid downsample_depth_by_2(const DepthGrid& g) {
    check_downsample_dims(g.width, g.height);
    DepthGrid out((g.width + 1) / 2, (g.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            int x0 = 2 * ox, x1 = block_end(ox, g.width);
            int y0 = 2 * oy, y1 = block_end(oy, g.height);
            double v[4];
            int n = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    double d = g.at(x, y);
                    if (d > 0.0)
                        v[n++] = d;
                }
            double m = 0.0;
            if (n == 4)
                m = ((v[0] + v[1]) + (v[2] + v[3])) / 4;
            else if (n > 0) {
                double s = 0;
                for (int i = 0; i < n; ++i)
                    s += v[i];
                m = s / n;
            }
            out.at(ox, oy) = m;
        }
    }
    return out;
}

NormalGrid downsample_normals_by_2(const NormalGrid& g) {
    check_downsample_dims(g.width, g.height);
    NormalGrid out((g.width + 1) / 2, (g.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
            int x0 = 2 * ox, x1 = block_end(ox, g.width);
            int y0 = 2 * oy, y1 = block_end(oy, g.height);
            Vec3 sum{};
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    sum += g.at(x, y);
            double len = norm(sum);
            out.at(ox, oy) = len > 1e-12 ? sum / len : g.at(x0, y0);
        }
    }
    return out;
}

DepthGrid upsample_bilinear_by_2(const DepthGrid& g, int target_w, int target_h) {
    if (target_w < 2 * g.width - 1 || target_w > 2 * g.width || target_h < 2 * g.height - 1 ||
        target_h > 2 * g.height)
        throw error("upsample_bilinear_by_2: target dims inconsistent with 2x scaling");

    DepthGrid out(target_w, target_h);
    const double sx = double(g.width) / target_w;
    const double sy = double(g.height) / target_h;

#pragma omp parallel for schedule(static)
    for (int Y = 0; Y < target_h; ++Y) {
        double v = (Y + 0.5) * sy - 0.5;
        int y0 = std::clamp(int(std::floor(v)), 0, g.height - 1);
        int y1 = std::min(y0 + 1, g.height - 1);
        double fy = std::clamp(v - std::floor(v), 0.0, 1.0);
        if (v < 0)
            fy = 0.0;
        for (int X = 0; X < target_w; ++X) {
            double u = (X + 0.5) * sx - 0.5;
            int x0 = std::clamp(int(std::floor(u)), 0, g.width - 1);
            int x1 = std::min(x0 + 1, g.width - 1);
            double fx = std::clamp(u - std::floor(u), 0.0, 1.0);
            if (u < 0)
                fx = 0.0;
            // lerp form keeps constant fields bit-exact
            double top = g.at(x0, y0) + fx * (g.at(x1, y0) - g.at(x0, y0));
            double bot = g.at(x0, y1) + fx * (g.at(x1, y1) - g.at(x0, y1));
            out.at(X, Y) = top + fy * (bot - top);
        }
    }
    return out;
}

namespace {

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q)
            ++k;
        double dq = q - double(v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

} // namespace

Grid2D<double> distance_to_nearest(const MaskGrid& mask) {
    bool any = false;
    for (uint8_t m : mask.data)
        if (m) {
            any = true;
            break;
        }
    if (!any)
        throw error("distance_to_nearest: mask has no true pixel");

    const int w = mask.width, h = mask.height;
    // large finite stand-in for "no seed in this column" so the envelope
    // arithmetic never hits inf - inf
    const double inf = 1e100;
    Grid2D<double> sq(w, h);

    // columns first
#pragma omp parallel
    {
        std::vector<double> f(std::max(w, h)), d(std::max(w, h));
        std::vector<int> v(std::max(w, h));
        std::vector<double> z(std::max(w, h) + 1);
#pragma omp for schedule(static)
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y)
                f[y] = mask.at(x, y) ? 0.0 : inf;
            edt_1d(f.data(), d.data(), h, v.data(), z.data());
            for (int y = 0; y < h; ++y)
                sq.at(x, y) = d[y];
        }
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x)
                f[x] = sq.at(x, y);
            edt_1d(f.data(), d.data(), w, v.data(), z.data());
            for (int x = 0; x < w; ++x)
                sq.at(x, y) = d[x];
        }
    }

    for (double& s : sq.data)
        s = std::sqrt(s);
    return sq;
}

} // namespace sdprop
