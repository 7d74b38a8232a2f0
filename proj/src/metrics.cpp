#include "sdprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sdprop/propagation.hpp"
#include "sdprop/resample.hpp"

namespace sdprop {

DepthMetrics depth_metrics(const DepthGrid& pred, const DepthGrid& gt) {
    if (!pred.same_dims(gt.width, gt.height))
        throw error("depth_metrics: dims differ");
    DepthMetrics m;
    double se = 0, rel = 0, ise = 0, iae = 0;
    size_t inliers[6] = {};
    size_t n = 0;
    for (size_t i = 0; i < gt.size(); ++i) {
        double g = gt.data[i], p = pred.data[i];
        if (g <= 0.0 || p <= 0.0)
            continue;
        ++n;
        double d = p - g;
        se += d * d;
        rel += std::abs(d) / g;
        double ig = 1.0 / g, ip = 1.0 / p;
        ise += (ip - ig) * (ip - ig);
        iae += std::abs(ip - ig);
        double ratio = std::max(p / g, g / p);
        for (int t = 0; t < 6; ++t)
            if (ratio < kDeltaThresholds[t])
                ++inliers[t];
    }
    if (n == 0)
        throw error("depth_metrics: no pixel valid in both grids");
    m.rmse = std::sqrt(se / double(n));
    m.rel = rel / double(n);
    m.irmse = std::sqrt(ise / double(n));
    m.imae = iae / double(n);
    for (int t = 0; t < 6; ++t)
        m.delta[t] = 100.0 * double(inliers[t]) / double(n);
    m.n_valid = n;
    return m;
}

namespace {

// Uniform-grid hash over cells of edge `threshold`; any point within the
// threshold of a query lives in one of the 27 surrounding cells.
class NearWithin {
public:
    NearWithin(const std::vector<Vec3>& pts, double threshold) : pts_(pts), h_(threshold) {
        cells_.reserve(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            cells_.push_back({key(pts[i]), i});
        std::sort(cells_.begin(), cells_.end());
    }

    bool any_within(const Vec3& q, double threshold) const {
        const double t2 = threshold * threshold;
        long long cx = coord(q.x), cy = coord(q.y), cz = coord(q.z);
        for (long long dz = -1; dz <= 1; ++dz)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dx = -1; dx <= 1; ++dx) {
                    long long k = pack(cx + dx, cy + dy, cz + dz);
                    auto lo = std::lower_bound(cells_.begin(), cells_.end(),
                                               std::pair<long long, size_t>{k, 0});
                    for (auto it = lo; it != cells_.end() && it->first == k; ++it) {
                        const Vec3& p = pts_[it->second];
                        double ddx = p.x - q.x, ddy = p.y - q.y, ddz = p.z - q.z;
                        if (ddx * ddx + ddy * ddy + ddz * ddz <= t2)
                            return true;
                    }
                }
        return false;
    }

private:
    long long coord(double v) const { return (long long)std::floor(v / h_); }
    long long key(const Vec3& p) const { return pack(coord(p.x), coord(p.y), coord(p.z)); }
    static long long pack(long long x, long long y, long long z) {
        return ((x & 0x1fffff) << 42) | ((y & 0x1fffff) << 21) | (z & 0x1fffff);
    }

    const std::vector<Vec3>& pts_;
    double h_;
    std::vector<std::pair<long long, size_t>> cells_;
};

double pct_covered(const std::vector<Vec3>& from, const NearWithin& idx, double threshold) {
    long long hit = 0;
#pragma omp parallel for schedule(static) reduction(+ : hit)
    for (long long i = 0; i < (long long)from.size(); ++i)
        if (idx.any_within(from[i], threshold))
            ++hit;
    return 100.0 * double(hit) / double(from.size());
}

} // namespace

CloudMetrics cloud_metrics(const PointCloud& pred, const PointCloud& gt, double threshold) {
    if (pred.points.empty() || gt.points.empty())
        throw error("cloud_metrics: empty point cloud");
    if (!(threshold > 0.0))
        throw error("cloud_metrics: threshold must be > 0");
    NearWithin gt_idx(gt.points, threshold);
    NearWithin pred_idx(pred.points, threshold);
    CloudMetrics m;
    m.threshold = threshold;
    m.accuracy = pct_covered(pred.points, gt_idx, threshold);
    m.completeness = pct_covered(gt.points, pred_idx, threshold);
    m.f1 = (m.accuracy + m.completeness) > 0.0
               ? 2.0 * m.accuracy * m.completeness / (m.accuracy + m.completeness)
               : 0.0;
    return m;
}

std::vector<DistanceBin> error_vs_distance(const DepthGrid& pred, const DepthGrid& gt,
                                           const SparseDepth& sparse, double bin_width) {
    if (!pred.same_dims(gt.width, gt.height))
        throw error("error_vs_distance: dims differ");
    if (sparse.entries.empty())
        throw error("error_vs_distance: sparse set is empty");
    if (!(bin_width > 0.0))
        throw error("error_vs_distance: bin width must be > 0");

    MaskGrid mask(gt.width, gt.height, 0);
    for (const SparseEntry& e : sparse.entries)
        mask.at(e.x, e.y) = 1;
    Grid2D<double> dist = distance_to_nearest(mask);

    std::vector<double> sums;
    std::vector<size_t> counts;
    size_t n = 0;
    for (size_t i = 0; i < gt.size(); ++i) {
        double g = gt.data[i], p = pred.data[i];
        if (g <= 0.0 || p <= 0.0)
            continue;
        ++n;
        size_t bin = size_t(dist.data[i] / bin_width);
        if (bin >= sums.size()) {
            sums.resize(bin + 1, 0.0);
            counts.resize(bin + 1, 0);
        }
        sums[bin] += std::abs(p - g) / g;
        ++counts[bin];
    }
    if (n == 0)
        throw error("error_vs_distance: no pixel valid in both grids");

    std::vector<DistanceBin> bins;
    for (size_t b = 0; b < sums.size(); ++b) {
        DistanceBin db;
        db.lo = double(b) * bin_width;
        db.hi = double(b + 1) * bin_width;
        db.count = counts[b];
        db.mean_rel = counts[b] ? sums[b] / double(counts[b]) : 0.0;
        bins.push_back(db);
    }
    return bins;
}

namespace {

AffinityField uniform_affinity(int w, int h, const KernelSpec& kernel) {
    std::vector<double> raw(size_t(w) * h * kernel.offsets.size(), 0.0);
    const size_t K = kernel.offsets.size();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (size_t k = 0; k < K; ++k) {
                auto [dx, dy] = kernel.effective_offset(int(k));
                int nx = x + dx, ny = y + dy;
                if (nx >= 0 && nx < w && ny >= 0 && ny < h)
                    raw[(size_t(y) * w + x) * K + k] = 1.0;
            }
    return normalize_affinity(raw, kernel, w, h);
}

struct ImpulseResult {
    MaskGrid mask;
    int radius = 0;
    long long area = 0;
};

// Runs the propagation pipeline on a zero grid with a single hard-injected
// impulse: per scale with uniform positive affinities, then bilinear
// upsampling, as in the coarse-to-fine path. Dims must halve exactly.
ImpulseResult impulse_mask(const PyramidConfig& cfg, int fw, int fh) {
    cfg.validate();
    const int n = cfg.n_scales;
    const int div = 1 << (n - 1);
    if (fw % div || fh % div)
        throw error("receptive_field: dims must be divisible by 2^(n_scales-1)");

    int w = fw / div, h = fh / div;
    int cx = w / 2, cy = h / 2;
    DepthGrid depth(w, h, 0.0);
    for (int k = 0; k < n; ++k) {
        KernelSpec kern = kernel_3x3_dilated(cfg.dilation_at(k), cfg.iters_per_scale);
        SparseDepth imp;
        imp.width = w;
        imp.height = h;
        imp.entries.push_back({cx, cy, 1.0, 1.0});
        PropagationState st =
            PropagationState::make(std::move(depth), imp, uniform_affinity(w, h, kern),
                                   ConfidenceGrid(w, h, 1.0), {1.0}, PropagationMode::hard_replace);
        depth = run_propagation(st, kern);
        if (k < n - 1) {
            w *= 2;
            h *= 2;
            cx *= 2;
            cy *= 2;
            depth = upsample_bilinear_by_2(depth, w, h);
        }
    }

    ImpulseResult res;
    res.mask = MaskGrid(fw, fh, 0);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            if (depth.at(x, y) != 0.0) {
                res.mask.at(x, y) = 1;
                ++res.area;
                res.radius = std::max(res.radius, std::max(std::abs(x - cx), std::abs(y - cy)));
                if (x == 0 || y == 0 || x == fw - 1 || y == fh - 1)
                    throw error("receptive_field: reach exceeds grid, enlarge grid");
            }
        }
    return res;
}

// Per-axis influence interval, same recurrence the pipeline realizes:
// expand by dilation*iters per scale, then [a,b] -> [2a-1, 2b+2] across each
// exact-doubling bilinear upsample.
std::pair<int, int> analytic_interval(const PyramidConfig& cfg, int center_coarse) {
    int a = center_coarse, b = center_coarse;
    for (int k = 0; k < cfg.n_scales; ++k) {
        int r = cfg.dilation_at(k) * cfg.iters_per_scale;
        a -= r;
        b += r;
        if (k < cfg.n_scales - 1) {
            a = 2 * a - 1;
            b = 2 * b + 2;
        }
    }
    return {a, b};
}

} // namespace

ReachReport receptive_field(const PyramidConfig& cfg, int finest_w, int finest_h) {
    ImpulseResult r = impulse_mask(cfg, finest_w, finest_h);
    ReachReport rep;
    rep.mask = std::move(r.mask);
    rep.radius = r.radius;
    rep.area = r.area;
    rep.grid_w = finest_w;
    rep.grid_h = finest_h;
    // ratio is against the 24-iteration, dilation-1, single-scale baseline
    PyramidConfig base;
    base.n_scales = 1;
    base.iters_per_scale = 24;
    base.base_dilation = 1;
    const int bw = 2 * 24 + 9;
    ImpulseResult br = impulse_mask(base, bw, bw);
    rep.area_ratio = double(rep.area) / double(br.area);
    return rep;
}

ReachReport receptive_field_autosize(const PyramidConfig& cfg) {
    cfg.validate();
    const int div = 1 << (cfg.n_scales - 1);
    int c0 = 8;  // coarsest center guess; interval math below fixes the size
    for (;;) {
        auto [a, b] = analytic_interval(cfg, c0);
        if (a >= 1) {
            int need = b + 2;
            int fw = ((need + div - 1) / div) * div;
            int coarse = fw / div;
            // run with the center the pipeline will actually use
            auto [a2, b2] = analytic_interval(cfg, coarse / 2);
            if (a2 >= 1 && b2 <= fw - 2)
                return receptive_field(cfg, fw, fw);
        }
        c0 *= 2;
        if (c0 > (1 << 22))
            throw error("receptive_field_autosize: configuration reach too large");
    }
}

std::string depth_metrics_kv(const DepthMetrics& m) {
    std::ostringstream ss;
    ss.precision(9);
    ss << "rmse " << m.rmse << "\n";
    ss << "rel " << m.rel << "\n";
    static const char* names[6] = {"1.02", "1.05", "1.10", "1.25", "1.25^2", "1.25^3"};
    for (int t = 0; t < 6; ++t)
        ss << "delta_" << names[t] << " " << m.delta[t] << "\n";
    ss << "irmse " << m.irmse << "\n";
    ss << "imae " << m.imae << "\n";
    ss << "n_valid " << m.n_valid << "\n";
    return ss.str();
}

std::string depth_metrics_table(const DepthMetrics& m) {
    char buf[256];
    std::string out;
    out += "  metric        value\n";
    std::snprintf(buf, sizeof buf, "  rmse     %10.4f m\n", m.rmse);
    out += buf;
    std::snprintf(buf, sizeof buf, "  rel      %10.4f\n", m.rel);
    out += buf;
    static const char* names[6] = {"1.02  ", "1.05  ", "1.10  ", "1.25  ", "1.25^2", "1.25^3"};
    for (int t = 0; t < 6; ++t) {
        std::snprintf(buf, sizeof buf, "  d_%s %9.2f %%\n", names[t], m.delta[t]);
        out += buf;
    }
    return out;
}

std::string cloud_metrics_kv(const CloudMetrics& m) {
    std::ostringstream ss;
    ss.precision(9);
    ss << "threshold " << m.threshold << "\n";
    ss << "accuracy " << m.accuracy << "\n";
    ss << "completeness " << m.completeness << "\n";
    ss << "f1 " << m.f1 << "\n";
    return ss.str();
}

} // namespace sdprop
