#include "sdprop/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "sdprop/rng.hpp"

namespace sdprop {

Grid2D<double> to_luminance(const ColorGrid& img) {
    Grid2D<double> lum(img.width, img.height);
    for (size_t i = 0; i < img.size(); ++i) {
        const Rgb& c = img.data[i];
        lum.data[i] = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
    return lum;
}

SparseDepth sample_uniform(const DepthGrid& gt, const SamplerConfig& cfg) {
    if (cfg.max_samples < 1)
        throw error("sample_uniform: max_samples must be >= 1");
    std::vector<int32_t> valid;
    valid.reserve(gt.size());
    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x)
            if (gt.at(x, y) > 0.0)
                valid.push_back(int32_t(y * gt.width + x));
    if (int(valid.size()) < cfg.max_samples)
        throw error("sample_uniform: fewer valid pixels than max_samples");

    // partial Fisher-Yates: first max_samples slots are the draw
    Rng rng(cfg.rng_seed);
    const size_t n = valid.size();
    for (int i = 0; i < cfg.max_samples; ++i) {
        size_t j = i + size_t(rng.bounded(n - i));
        std::swap(valid[i], valid[j]);
    }

    SparseDepth s;
    s.width = gt.width;
    s.height = gt.height;
    s.entries.reserve(cfg.max_samples);
    for (int i = 0; i < cfg.max_samples; ++i) {
        int x = valid[i] % gt.width, y = valid[i] / gt.width;
        s.entries.push_back({x, y, gt.at(x, y), 1.0});
    }
    return s;
}

namespace {

// Harris response over luminance: Sobel/8 gradients, 3x3 binomial-weighted
// structure tensor, R = det - 0.04 trace^2. The two outermost pixel rings
// carry no response (gradient + smoothing support).
Grid2D<double> corner_response(const Grid2D<double>& lum) {
    const int w = lum.width, h = lum.height;
    Grid2D<double> ix(w, h), iy(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            double gx = (lum.at(x + 1, y - 1) + 2 * lum.at(x + 1, y) + lum.at(x + 1, y + 1)) -
                        (lum.at(x - 1, y - 1) + 2 * lum.at(x - 1, y) + lum.at(x - 1, y + 1));
            double gy = (lum.at(x - 1, y + 1) + 2 * lum.at(x, y + 1) + lum.at(x + 1, y + 1)) -
                        (lum.at(x - 1, y - 1) + 2 * lum.at(x, y - 1) + lum.at(x + 1, y - 1));
            ix.at(x, y) = gx / 8.0;
            iy.at(x, y) = gy / 8.0;
        }

    static const double k3[3] = {1.0 / 4, 2.0 / 4, 1.0 / 4};
    Grid2D<double> resp(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x) {
            double a = 0, b = 0, c = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    double wgt = k3[dx + 1] * k3[dy + 1];
                    double gx = ix.at(x + dx, y + dy), gy = iy.at(x + dx, y + dy);
                    a += wgt * gx * gx;
                    b += wgt * gy * gy;
                    c += wgt * gx * gy;
                }
            double tr = a + b;
            resp.at(x, y) = (a * b - c * c) - 0.04 * tr * tr;
        }
    return resp;
}

} // namespace

std::vector<Keypoint> nms_keypoints(std::vector<Keypoint> pts, int radius) {
    if (radius < 1)
        throw error("nms_keypoints: radius must be >= 1");
    std::sort(pts.begin(), pts.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response)
            return a.response > b.response;
        if (a.y != b.y)
            return a.y < b.y;
        return a.x < b.x;
    });
    const double r2 = double(radius) * radius;
    std::vector<Keypoint> kept;
    for (const Keypoint& p : pts) {
        bool suppressed = false;
        for (const Keypoint& q : kept) {
            double dx = p.x - q.x, dy = p.y - q.y;
            if (dx * dx + dy * dy <= r2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed)
            kept.push_back(p);
    }
    return kept;
}

std::vector<Keypoint> detect_keypoints(const ColorGrid& img, const SamplerConfig& cfg) {
    if (img.width < 8 || img.height < 8)
        throw error("detect_keypoints: image must be at least 8x8");
    if (cfg.max_samples < 1)
        throw error("detect_keypoints: max_samples must be >= 1");
    Grid2D<double> resp = corner_response(to_luminance(img));
    std::vector<Keypoint> cand;
    for (int y = 0; y < resp.height; ++y)
        for (int x = 0; x < resp.width; ++x)
            if (resp.at(x, y) > cfg.detector.response_threshold)
                cand.push_back({x, y, resp.at(x, y)});
    std::vector<Keypoint> kept = nms_keypoints(std::move(cand), cfg.detector.nms_radius);
    if (int(kept.size()) > cfg.max_samples)
        kept.resize(cfg.max_samples);
    return kept;
}

SparseDepth sample_keypoints(const DepthGrid& gt, const ColorGrid& img, const SamplerConfig& cfg) {
    if (!gt.same_dims(img.width, img.height))
        throw error("sample_keypoints: depth and image dims differ");
    std::vector<Keypoint> kps = detect_keypoints(img, cfg);
    SparseDepth s;
    s.width = gt.width;
    s.height = gt.height;
    for (const Keypoint& k : kps) {
        double d = gt.at(k.x, k.y);
        if (d <= 0.0)
            continue;  // invalid depth under the keypoint
        s.entries.push_back({k.x, k.y, d, 1.0});
        if (int(s.entries.size()) == cfg.max_samples)
            break;
    }
    return s;
}

PrecisionRecall distribution_pr(const SparseDepth& candidate, const SparseDepth& reference,
                                double radius) {
    if (candidate.width != reference.width || candidate.height != reference.height)
        throw error("distribution_pr: host dims differ");
    if (candidate.entries.empty() || reference.entries.empty())
        throw error("distribution_pr: empty point set");
    const double r2 = radius * radius;
    auto covered = [&](const std::vector<SparseEntry>& from, const std::vector<SparseEntry>& by) {
        size_t hit = 0;
        for (const SparseEntry& p : from) {
            for (const SparseEntry& q : by) {
                double dx = p.x - q.x, dy = p.y - q.y;
                if (dx * dx + dy * dy <= r2) {
                    ++hit;
                    break;
                }
            }
        }
        return double(hit) / double(from.size());
    };
    return {covered(candidate.entries, reference.entries),
            covered(reference.entries, candidate.entries)};
}

} // namespace sdprop
