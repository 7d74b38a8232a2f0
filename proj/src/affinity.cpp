#include "sdprop/affinity.hpp"

#include <cmath>
#include <fstream>

#include "sdprop/kernel.hpp"

namespace sdprop {

AffinityField normalize_affinity(const std::vector<double>& raw, const KernelSpec& kernel,
                                 int width, int height) {
    kernel.validate();
    const size_t npx = size_t(width) * height;
    const size_t K = kernel.offsets.size();
    if (raw.size() != npx * K)
        throw error("normalize_affinity: raw weight count mismatch");
    for (double v : raw)
        if (!std::isfinite(v))
            throw error("normalize_affinity: non-finite raw weight");

    AffinityField f;
    f.width = width;
    f.height = height;
    f.kernel = kernel;
    f.neighbor_w.resize(npx * K);
    f.center_w.resize(npx);

#pragma omp parallel for schedule(static)
    for (long long p = 0; p < (long long)npx; ++p) {
        double abs_sum = 0.0;
        for (size_t k = 0; k < K; ++k)
            abs_sum += std::abs(raw[p * K + k]);
        const double denom = abs_sum > 1.0 ? abs_sum : 1.0;
        double sum = 0.0;
        for (size_t k = 0; k < K; ++k) {
            double w = raw[p * K + k] / denom;
            f.neighbor_w[p * K + k] = w;
            sum += w;
        }
        f.center_w[p] = 1.0 - sum;
    }
    return f;
}

AffinityField bilateral_affinity(const ColorGrid& img, const NormalGrid& normals,
                                 const KernelSpec& kernel, const BilateralParams& p) {
    if (!img.same_dims(normals.width, normals.height))
        throw error("bilateral_affinity: image and normal dims differ");
    if (!(p.sigma_color > 0.0) || !(p.sigma_normal > 0.0) || p.center_bias < 0.0)
        throw error("bilateral_affinity: sigmas must be > 0 and center_bias >= 0");
    kernel.validate();

    const int w = img.width, h = img.height;
    const size_t K = kernel.offsets.size();
    const double inv_sc2 = 1.0 / (p.sigma_color * p.sigma_color);
    const double inv_sn2 = 1.0 / (p.sigma_normal * p.sigma_normal);
    const double gain = 1.0 / (1.0 + p.center_bias);

    std::vector<double> raw(size_t(w) * h * K, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t px = size_t(y) * w + x;
            const Rgb& ci = img.at(x, y);
            const Vec3& ni = normals.at(x, y);
            for (size_t k = 0; k < K; ++k) {
                auto [dx, dy] = kernel.effective_offset(int(k));
                int nx = x + dx, ny = y + dy;
                if (!img.in_bounds(nx, ny))
                    continue;  // raw 0, mass folds into the center weight
                const Rgb& ck = img.at(nx, ny);
                double dr = ci.r - ck.r, dg = ci.g - ck.g, db = ci.b - ck.b;
                double cdist2 = dr * dr + dg * dg + db * db;
                double cosang = dot(ni, normals.at(nx, ny));
                cosang = cosang > 1.0 ? 1.0 : (cosang < -1.0 ? -1.0 : cosang);
                double ang = std::acos(cosang);
                raw[px * K + k] = std::exp(-cdist2 * inv_sc2 - ang * ang * inv_sn2) * gain;
            }
        }
    }
    return normalize_affinity(raw, kernel, w, h);
}

ConfidencePair default_confidence(const SparseDepth& sparse, const ColorGrid& img) {
    ConfidencePair out;
    out.pixel_conf = ConfidenceGrid(img.width, img.height, 1.0);
    out.input_conf.reserve(sparse.entries.size());
    for (const SparseEntry& e : sparse.entries)
        out.input_conf.push_back(e.conf);
    return out;
}

namespace {
constexpr uint32_t kAffinityMagic = 0x31464641;  // "AFF1"
}

void write_affinity_dump(const std::string& path, const AffinityField& a) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open for writing: " + path);
    const uint32_t hdr[5] = {kAffinityMagic, uint32_t(a.width), uint32_t(a.height),
                             uint32_t(a.kernel.offsets.size()), uint32_t(a.kernel.dilation)};
    f.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    const size_t K = a.kernel.offsets.size();
    std::vector<float> buf;
    buf.reserve(a.center_w.size() * (K + 1));
    for (size_t p = 0; p < a.center_w.size(); ++p) {
        for (size_t k = 0; k < K; ++k)
            buf.push_back(float(a.neighbor_w[p * K + k]));
        buf.push_back(float(a.center_w[p]));
    }
    f.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * 4));
    if (!f)
        throw error("short affinity dump write");
}

AffinityField read_affinity_dump(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open for reading: " + path);
    uint32_t hdr[5];
    f.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    if (f.gcount() != sizeof hdr || hdr[0] != kAffinityMagic)
        throw error("affinity dump magic mismatch: " + path);
    const uint32_t w = hdr[1], h = hdr[2], K = hdr[3], dilation = hdr[4];
    if (w < 1 || h < 1 || K != 8)
        throw error("affinity dump header rejected: " + path);
    AffinityField a;
    a.width = int(w);
    a.height = int(h);
    a.kernel = kernel_3x3_dilated(int(dilation), 0);
    const size_t npx = size_t(w) * h;
    std::vector<float> buf(npx * (K + 1));
    f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 4));
    if (f.gcount() != std::streamsize(buf.size() * 4))
        throw error("affinity dump truncated: " + path);
    a.neighbor_w.resize(npx * K);
    a.center_w.resize(npx);
    for (size_t p = 0; p < npx; ++p) {
        for (size_t k = 0; k < K; ++k)
            a.neighbor_w[p * K + k] = buf[p * (K + 1) + k];
        a.center_w[p] = buf[p * (K + 1) + K];
    }
    return a;
}

} // namespace sdprop
