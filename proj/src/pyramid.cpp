#include "sdprop/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "sdprop/resample.hpp"

namespace sdprop {

void PyramidConfig::validate() const {
    if (n_scales < 1)
        throw error("PyramidConfig: n_scales must be >= 1");
    if (iters_per_scale < 0)
        throw error("PyramidConfig: iters_per_scale must be >= 0");
    for (int k = 0; k < n_scales; ++k)
        if (dilation_at(k) < 1)
            throw error("PyramidConfig: dilation must stay >= 1 at every scale");
}

AffinityProvider make_bilateral_provider(const BilateralParams& params) {
    return [params](const ColorGrid& color, const NormalGrid& normals, const KernelSpec& kernel) {
        AffinityField aff = bilateral_affinity(color, normals, kernel, params);
        return std::make_pair(std::move(aff), ConfidenceGrid(color.width, color.height, 1.0));
    };
}

namespace {

// Coordinate division by 2^shift; colliding entries keep the higher
// confidence, ties the nearer depth. Output in row-major pixel order.
SparseDepth rescale_sparse(const SparseDepth& fine, int shift, int w, int h) {
    if (shift == 0)
        return fine;
    Grid2D<int32_t> best(w, h, -1);
    for (size_t i = 0; i < fine.entries.size(); ++i) {
        const SparseEntry& e = fine.entries[i];
        int cx = std::min(e.x >> shift, w - 1);
        int cy = std::min(e.y >> shift, h - 1);
        int32_t& slot = best.at(cx, cy);
        if (slot < 0) {
            slot = int32_t(i);
            continue;
        }
        const SparseEntry& cur = fine.entries[slot];
        if (e.conf > cur.conf || (e.conf == cur.conf && e.depth < cur.depth))
            slot = int32_t(i);
    }
    SparseDepth out;
    out.width = w;
    out.height = h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int32_t i = best.at(x, y);
            if (i >= 0) {
                const SparseEntry& e = fine.entries[i];
                out.entries.push_back({x, y, e.depth, e.conf});
            }
        }
    return out;
}

} // namespace

ScaleBundle build_scale_bundle(const ColorGrid& color, const NormalGrid& normals,
                               const SparseDepth& sparse, const DepthGrid& gt,
                               const PyramidConfig& cfg, const AffinityProvider& provider) {
    cfg.validate();
    sparse.validate();
    if (!color.same_dims(normals.width, normals.height) ||
        !color.same_dims(sparse.width, sparse.height))
        throw error("build_scale_bundle: input dims differ");
    const int min_dim = 1 << (cfg.n_scales - 1);
    if (color.width < min_dim || color.height < min_dim)
        throw error("build_scale_bundle: dims too small for the scale count");

    const int n = cfg.n_scales;
    ScaleBundle b;
    b.color.resize(n);
    b.normals.resize(n);
    b.sparse.resize(n);
    b.affinity.reserve(n);
    b.pixel_conf.reserve(n);

    b.color[n - 1] = color;
    b.normals[n - 1] = normals;
    for (int k = n - 2; k >= 0; --k) {
        b.color[k] = downsample_by_2(b.color[k + 1]);
        b.normals[k] = downsample_normals_by_2(b.normals[k + 1]);
    }
    for (int k = 0; k < n; ++k) {
        int shift = n - 1 - k;
        b.sparse[k] = rescale_sparse(sparse, shift, b.color[k].width, b.color[k].height);
        KernelSpec kern = kernel_3x3_dilated(cfg.dilation_at(k), cfg.iters_per_scale);
        auto [aff, conf] = provider(b.color[k], b.normals[k], kern);
        b.affinity.push_back(std::move(aff));
        b.pixel_conf.push_back(std::move(conf));
    }
    b.gt_finest = gt;
    return b;
}

DepthGrid coarse_init(const SparseDepth& sparse, int width, int height) {
    sparse.validate();
    if (sparse.entries.empty())
        throw error("coarse_init: sparse set is empty");
    DepthGrid out(width, height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double best_d2 = 0.0, best_depth = 0.0;
            bool first = true;
            for (const SparseEntry& e : sparse.entries) {
                double dx = x - e.x, dy = y - e.y;
                double d2 = dx * dx + dy * dy;
                if (first || d2 < best_d2 || (d2 == best_d2 && e.depth < best_depth)) {
                    best_d2 = d2;
                    best_depth = e.depth;
                    first = false;
                }
            }
            out.at(x, y) = best_depth;
        }
    return out;
}

std::vector<DepthGrid> run_coarse_to_fine(const ScaleBundle& bundle, const PyramidConfig& cfg,
                                          PropagationMode mode) {
    cfg.validate();
    if (bundle.n_scales() != cfg.n_scales)
        throw error("run_coarse_to_fine: bundle scale count does not match the config");

    std::vector<DepthGrid> outs;
    outs.reserve(cfg.n_scales);
    DepthGrid cur;
    for (int k = 0; k < cfg.n_scales; ++k) {
        const int w = bundle.color[k].width, h = bundle.color[k].height;
        if (k == 0)
            cur = coarse_init(bundle.sparse[0], w, h);
        else
            cur = upsample_bilinear_by_2(cur, w, h);

        KernelSpec kern = kernel_3x3_dilated(cfg.dilation_at(k), cfg.iters_per_scale);
        std::vector<double> input_conf;
        input_conf.reserve(bundle.sparse[k].entries.size());
        for (const SparseEntry& e : bundle.sparse[k].entries)
            input_conf.push_back(e.conf);
        PropagationState st =
            PropagationState::make(std::move(cur), bundle.sparse[k], bundle.affinity[k],
                                   bundle.pixel_conf[k], std::move(input_conf), mode);
        cur = run_propagation(st, kern);
        outs.push_back(cur);
    }
    return outs;
}

std::vector<DepthGrid> build_gt_pyramid(const DepthGrid& gt_finest, int n_scales) {
    std::vector<DepthGrid> gts(n_scales);
    gts[n_scales - 1] = gt_finest;
    for (int k = n_scales - 2; k >= 0; --k)
        gts[k] = downsample_depth_by_2(gts[k + 1]);
    return gts;
}

double multiscale_loss(const std::vector<DepthGrid>& preds, const std::vector<DepthGrid>& gts) {
    if (preds.size() != gts.size() || preds.empty())
        throw error("multiscale_loss: prediction/GT scale counts differ");
    double loss = 0.0;
    for (size_t s = 0; s < preds.size(); ++s) {
        const DepthGrid& p = preds[s];
        const DepthGrid& g = gts[s];
        if (!p.same_dims(g.width, g.height))
            throw error("multiscale_loss: dims differ at a scale");
        double sum = 0.0;
        size_t n = 0;
        for (size_t i = 0; i < g.size(); ++i) {
            if (g.data[i] > 0.0) {
                sum += std::abs(p.data[i] - g.data[i]);
                ++n;
            }
        }
        if (n == 0)
            throw error("multiscale_loss: a scale has no valid GT pixel");
        loss += double(s + 1) * (sum / double(n));
    }
    if (!std::isfinite(loss))
        throw error("multiscale_loss: non-finite loss");
    return loss;
}

double bilateral_fit_loss(const TrainingScene& scene, const PyramidConfig& cfg,
                          const BilateralParams& params) {
    ScaleBundle b = build_scale_bundle(scene.color, scene.normals, scene.sparse, scene.gt, cfg,
                                       make_bilateral_provider(params));
    std::vector<DepthGrid> preds = run_coarse_to_fine(b, cfg, PropagationMode::confidence_blend);
    return multiscale_loss(preds, build_gt_pyramid(scene.gt, cfg.n_scales));
}

namespace {

BilateralParams clamp_params(BilateralParams p) {
    p.sigma_color = std::max(p.sigma_color, 1e-3);
    p.sigma_normal = std::max(p.sigma_normal, 1e-3);
    p.center_bias = std::max(p.center_bias, 0.0);
    return p;
}

} // namespace

BilateralParams fit_bilateral_params(const TrainingScene& scene, const PyramidConfig& cfg,
                                     BilateralParams init, int steps, double lr) {
    BilateralParams cur = clamp_params(init);
    if (steps == 0)
        return cur;
    double f = bilateral_fit_loss(scene, cfg, cur);

    auto get = [](BilateralParams& p, int i) -> double& {
        return i == 0 ? p.sigma_color : i == 1 ? p.sigma_normal : p.center_bias;
    };

    for (int step = 0; step < steps; ++step) {
        // central differences, h scaled to the parameter
        double grad[3];
        for (int i = 0; i < 3; ++i) {
            BilateralParams lo = cur, hi = cur;
            double h = 1e-5 * std::max(1.0, std::abs(get(cur, i)));
            get(hi, i) += h;
            get(lo, i) -= h;
            lo = clamp_params(lo);
            grad[i] = (bilateral_fit_loss(scene, cfg, hi) - bilateral_fit_loss(scene, cfg, lo)) /
                      (get(hi, i) - get(lo, i));
        }
        bool improved = false;
        double step_len = lr;
        for (int tries = 0; tries < 24; ++tries) {
            BilateralParams cand = cur;
            for (int i = 0; i < 3; ++i)
                get(cand, i) -= step_len * grad[i];
            cand = clamp_params(cand);
            double fc = bilateral_fit_loss(scene, cfg, cand);
            if (fc < f) {
                cur = cand;
                f = fc;
                improved = true;
                break;
            }
            step_len *= 0.5;
        }
        if (!improved)
            break;  // no descent direction at this scale; keep the best seen
    }
    return cur;
}

} // namespace sdprop
