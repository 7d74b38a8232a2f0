#include "sdprop/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdprop {

void CameraView::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw error("CameraView: focal lengths must be > 0");
    Mat3 rrt = rotation * rotation.transposed();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double want = r == c ? 1.0 : 0.0;
            if (std::abs(rrt(r, c) - want) > 1e-9)
                throw error("CameraView: rotation is not orthonormal");
        }
    if (std::abs(det(rotation) - 1.0) > 1e-9)
        throw error("CameraView: rotation determinant is not +1");
}

Vec3 backproject(const CameraView& view, double x, double y, double depth) {
    if (!(depth > 0.0))
        throw error("backproject: depth must be > 0");
    Vec3 cam{(x - view.cx) / view.fx * depth, (y - view.cy) / view.fy * depth, depth};
    return view.rotation.transposed() * (cam - view.translation);
}

std::optional<Projection> project(const CameraView& view, const Vec3& world_point) {
    Vec3 cam = view.rotation * world_point + view.translation;
    if (cam.z <= 0.0)
        return std::nullopt;
    return Projection{view.fx * cam.x / cam.z + view.cx, view.fy * cam.y / cam.z + view.cy, cam.z};
}

PointCloud fuse_depths(const std::vector<std::pair<CameraView, const DepthGrid*>>& views,
                       const FusionConfig& cfg, std::vector<MaskGrid>* emitted) {
    if (views.size() < 2)
        throw error("fuse_depths: at least 2 views required");
    if (!(cfg.depth_threshold > 0.0) || cfg.min_consistent_views < 1)
        throw error("fuse_depths: bad fusion config");
    for (const auto& [v, d] : views) {
        v.validate();
        if (!d || d->width < 1)
            throw error("fuse_depths: missing depth grid");
    }
    if (emitted)
        emitted->clear();

    PointCloud cloud;
    for (size_t r = 0; r < views.size(); ++r) {
        const CameraView& ref = views[r].first;
        const DepthGrid& refd = *views[r].second;
        // one slot per pixel keeps the emission order row-major and
        // independent of the thread count
        std::vector<uint8_t> has(refd.size(), 0);
        std::vector<Vec3> pts(refd.size());

#pragma omp parallel for schedule(static)
        for (int y = 0; y < refd.height; ++y) {
            for (int x = 0; x < refd.width; ++x) {
                double d = refd.at(x, y);
                if (d <= 0.0)
                    continue;
                Vec3 P = backproject(ref, x, y, d);
                int consistent = 1;  // the reference view counts
                double depth_sum = d;
                for (size_t s = 0; s < views.size(); ++s) {
                    if (s == r)
                        continue;
                    const CameraView& src = views[s].first;
                    const DepthGrid& srcd = *views[s].second;
                    auto pr = project(src, P);
                    if (!pr)
                        continue;
                    int sx = int(std::lround(pr->x)), sy = int(std::lround(pr->y));
                    if (!srcd.in_bounds(sx, sy))
                        continue;
                    double ds = srcd.at(sx, sy);
                    if (ds <= 0.0 || std::abs(pr->depth - ds) > cfg.depth_threshold)
                        continue;
                    // source observation measured along the reference ray:
                    // its camera-frame z in the reference view
                    Vec3 Ps = backproject(src, sx, sy, ds);
                    double zr = (ref.rotation * Ps + ref.translation).z;
                    if (zr <= 0.0)
                        continue;
                    ++consistent;
                    depth_sum += zr;
                }
                if (consistent >= cfg.min_consistent_views) {
                    size_t px = size_t(y) * refd.width + x;
                    pts[px] = backproject(ref, x, y, depth_sum / consistent);
                    has[px] = 1;
                }
            }
        }
        for (size_t i = 0; i < has.size(); ++i)
            if (has[i])
                cloud.points.push_back(pts[i]);
        if (emitted) {
            MaskGrid m(refd.width, refd.height, 0);
            for (size_t i = 0; i < has.size(); ++i)
                m.data[i] = has[i];
            emitted->push_back(std::move(m));
        }
    }
    return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
    std::ofstream f(path);
    if (!f)
        throw error("cannot open for writing: " + path);
    const bool rgb = !cloud.colors.empty();
    if (rgb && cloud.colors.size() != cloud.points.size())
        throw error("write_ply: color count mismatch");
    f << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
    if (rgb)
        f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    f << "end_header\n";
    char buf[160];
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (rgb) {
            auto q = [](float v) {
                long b = std::lround(double(v) * 255.0);
                return int(b < 0 ? 0 : b > 255 ? 255 : b);
            };
            const Rgb& c = cloud.colors[i];
            std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %d %d\n", p.x, p.y, p.z, q(c.r),
                          q(c.g), q(c.b));
        } else {
            std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", p.x, p.y, p.z);
        }
        f << buf;
    }
    if (!f)
        throw error("short PLY write");
}

PointCloud read_ply(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "ply")
        throw error("PLY magic mismatch: " + path);
    size_t n = 0;
    bool rgb = false;
    bool ascii = false;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            ascii = fmt == "ascii";
        } else if (tok == "element") {
            std::string what;
            ss >> what >> n;
            if (what != "vertex")
                throw error("PLY: only vertex elements supported");
        } else if (tok == "property") {
            std::string type, name;
            ss >> type >> name;
            if (name == "red")
                rgb = true;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii)
        throw error("PLY: only ascii format supported");
    PointCloud cloud;
    cloud.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Vec3 p;
        if (!(f >> p.x >> p.y >> p.z))
            throw error("PLY vertex list truncated");
        if (rgb) {
            int r, g, b;
            if (!(f >> r >> g >> b))
                throw error("PLY vertex list truncated");
            cloud.colors.push_back({r / 255.f, g / 255.f, b / 255.f});
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

void write_cameras(const std::string& path, const std::vector<CameraView>& views) {
    std::ofstream f(path);
    if (!f)
        throw error("cannot open for writing: " + path);
    char buf[512];
    for (const CameraView& v : views) {
        std::snprintf(buf, sizeof buf,
                      "%.9g %.9g %.9g %.9g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                      "%.9g %.9g %.9g\n",
                      v.fx, v.fy, v.cx, v.cy, v.rotation.m[0], v.rotation.m[1], v.rotation.m[2],
                      v.rotation.m[3], v.rotation.m[4], v.rotation.m[5], v.rotation.m[6],
                      v.rotation.m[7], v.rotation.m[8], v.translation.x, v.translation.y,
                      v.translation.z);
        f << buf;
    }
    if (!f)
        throw error("short camera file write");
}

std::vector<CameraView> read_cameras(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw error("cannot open for reading: " + path);
    std::vector<CameraView> views;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        CameraView v;
        if (!(ss >> v.fx >> v.fy >> v.cx >> v.cy >> v.rotation.m[0] >> v.rotation.m[1] >>
              v.rotation.m[2] >> v.rotation.m[3] >> v.rotation.m[4] >> v.rotation.m[5] >>
              v.rotation.m[6] >> v.rotation.m[7] >> v.rotation.m[8] >> v.translation.x >>
              v.translation.y >> v.translation.z))
            throw error("camera line malformed: " + line);
        v.validate();
        views.push_back(v);
    }
    return views;
}

} // namespace sdprop
