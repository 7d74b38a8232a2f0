#include "sdprop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdprop/rng.hpp"

namespace sdprop {

namespace {

enum class Shade { flat, checker, noise, far_wall_bands };

struct Patch {
    Vec3 origin;
    Vec3 eu, ev;       // edges; patch = origin + a*eu + b*ev, a,b in [0,1]
    Vec3 unit_n;       // normalized(cross(eu, ev)), sign irrelevant
    Shade shade = Shade::flat;
    Rgb col_a{0.85f, 0.85f, 0.85f};
    Rgb col_b{0.15f, 0.15f, 0.15f};
};

struct Scene {
    std::vector<Patch> patches;
    int cell_px = 16;
    int strip_px = 60;     // far_wall only
    uint64_t noise_seed = 7;
};

double get_param(const std::map<std::string, double>& params, const std::string& name,
                 double dflt) {
    auto it = params.find(name);
    return it == params.end() ? dflt : it->second;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

const std::map<std::string, double>& allowed_params(SceneLayout layout) {
    static const std::map<std::string, double> far_wall = {
        {"depth_left", 2.0}, {"depth_right", 4.0}, {"strip_px", 60.0}, {"cell_px", 16.0}};
    static const std::map<std::string, double> two_walls = {
        {"depth_left", 2.0}, {"depth_right", 3.0}, {"split", 0.4}, {"cell_px", 16.0}};
    static const std::map<std::string, double> box_room = {{"room_w", 4.0}, {"room_h", 3.0},
                                                           {"room_d", 5.0}, {"cell_px", 16.0},
                                                           {"noise_seed", 7.0}};
    switch (layout) {
    case SceneLayout::far_wall: return far_wall;
    case SceneLayout::two_walls: return two_walls;
    default: return box_room;
    }
}

CameraView default_camera(int w, int h, Vec3 position, double yaw_rad) {
    CameraView v;
    v.fx = v.fy = double(w);
    v.cx = (w - 1) / 2.0;
    v.cy = (h - 1) / 2.0;
    double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
    // rotation about the y axis; world-to-camera
    v.rotation(0, 0) = c;
    v.rotation(0, 2) = -s;
    v.rotation(2, 0) = s;
    v.rotation(2, 2) = c;
    v.translation = (v.rotation * position) * -1.0;
    return v;
}

std::vector<CameraView> default_views(SceneLayout layout, int w, int h) {
    switch (layout) {
    case SceneLayout::far_wall:
        return {default_camera(w, h, {0, 0, 0}, 0.0)};
    case SceneLayout::two_walls:
        // translation-only pair: frontal walls keep exact camera-frame depth
        // in both views
        return {default_camera(w, h, {0, 0, 0}, 0.0),
                default_camera(w, h, {0.12, 0, 0}, 0.0)};
    default:
        return {default_camera(w, h, {0, 0, 0.8}, 0.0),
                default_camera(w, h, {0.3, -0.05, 0.6}, -0.06),
                default_camera(w, h, {-0.25, 0.08, 0.7}, 0.05)};
    }
}

// Extends the patch rectangle so the image corners of every view land inside
// it (plus margin). The image rectangle maps to a convex quad on the plane,
// so bounding the corners bounds the footprint.
void fit_patch_to_views(Patch& p, const std::vector<CameraView>& views, int w, int h,
                        double a_lo_clip, double a_hi_clip) {
    double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
    const Vec3 P0 = p.origin;
    const double eu2 = dot(p.eu, p.eu), ev2 = dot(p.ev, p.ev);
    for (const CameraView& v : views) {
        Mat3 rt = v.rotation.transposed();
        Vec3 o = rt * (v.translation * -1.0);
        const double corners[4][2] = {{0, 0}, {double(w - 1), 0}, {0, double(h - 1)},
                                      {double(w - 1), double(h - 1)}};
        for (auto& c : corners) {
            Vec3 dir = rt * Vec3{(c[0] - v.cx) / v.fx, (c[1] - v.cy) / v.fy, 1.0};
            double denom = dot(p.unit_n, dir);
            if (std::abs(denom) < 1e-12)
                continue;
            double t = dot(p.unit_n, P0 - o) / denom;
            if (t <= 0)
                continue;
            Vec3 q = o + dir * t - P0;
            double a = dot(q, p.eu) / eu2, b = dot(q, p.ev) / ev2;
            alo = std::min(alo, a);
            ahi = std::max(ahi, a);
            blo = std::min(blo, b);
            bhi = std::max(bhi, b);
        }
    }
    if (alo > ahi)
        throw error("render_scene: a view sees no geometry");
    double apad = 0.1 * (ahi - alo) + 1e-6, bpad = 0.1 * (bhi - blo) + 1e-6;
    alo = std::max(alo - apad, a_lo_clip);
    ahi = std::min(ahi + apad, a_hi_clip);
    blo -= bpad;
    bhi += bpad;
    p.origin = p.origin + p.eu * alo + p.ev * blo;
    p.eu = p.eu * (ahi - alo);
    p.ev = p.ev * (bhi - blo);
}

Scene build_scene(const SceneSpec& spec, const std::vector<CameraView>& views) {
    Scene sc;
    const auto& dflts = allowed_params(spec.layout);
    for (const auto& [k, v] : spec.params)
        if (!dflts.count(k))
            throw error("scene: unknown parameter " + k);
    auto P = [&](const std::string& n) { return get_param(spec.params, n, dflts.at(n)); };
    sc.cell_px = int(P("cell_px"));
    if (sc.cell_px < 2)
        throw error("scene: cell_px must be >= 2");
    const int w = spec.image_w, h = spec.image_h;

    if (spec.layout == SceneLayout::far_wall) {
        sc.strip_px = int(P("strip_px"));
        double dl = P("depth_left"), dr = P("depth_right");
        if (!(dl > 0) || !(dr > 0))
            throw error("scene: wall depths must be > 0");
        const CameraView& v0 = views.front();
        // slanted plane z = z0 + s*x chosen so the principal view's left and
        // right image edges see depth_left and depth_right
        double z0 = 2.0 / (1.0 / dl + 1.0 / dr);
        double alpha = z0 * (1.0 / dl - 1.0 / dr) / (2.0 * v0.cx);
        double s = alpha * v0.fx;
        Patch p;
        p.origin = {0, 0, z0};
        double inv = 1.0 / std::sqrt(1.0 + s * s);
        p.eu = Vec3{inv, 0, s * inv};
        p.ev = Vec3{0, 1, 0};
        p.unit_n = normalized(cross(p.eu, p.ev));
        p.shade = Shade::far_wall_bands;
        fit_patch_to_views(p, views, w, h, -1e300, 1e300);
        sc.patches.push_back(p);
    } else if (spec.layout == SceneLayout::two_walls) {
        double dl = P("depth_left"), dr = P("depth_right"), split = P("split");
        if (!(dl > 0) || !(dr > 0) || split <= 0.0 || split >= 1.0)
            throw error("scene: bad two_walls parameters");
        const CameraView& v0 = views.front();
        double u_split = split * (w - 1);
        double xs_l = dl * (u_split - v0.cx) / v0.fx;
        double xs_r = dr * (u_split - v0.cx) / v0.fx;
        Patch left;
        left.origin = {0, 0, dl};
        left.eu = {1, 0, 0};
        left.ev = {0, 1, 0};
        left.unit_n = {0, 0, -1};
        left.shade = Shade::checker;
        fit_patch_to_views(left, views, w, h, -1e300, xs_l);
        Patch right;
        right.origin = {0, 0, dr};
        right.eu = {1, 0, 0};
        right.ev = {0, 1, 0};
        right.unit_n = {0, 0, -1};
        right.shade = Shade::flat;
        right.col_a = {0.85f, 0.85f, 0.85f};  // matches the light checker cell
        fit_patch_to_views(right, views, w, h, xs_r, 1e300);
        sc.patches.push_back(left);
        sc.patches.push_back(right);
    } else {
        double W = P("room_w"), H = P("room_h"), D = P("room_d");
        sc.noise_seed = uint64_t(P("noise_seed"));
        if (!(W > 0) || !(H > 0) || !(D > 0))
            throw error("scene: room dims must be > 0");
        auto quad = [](Vec3 o, Vec3 eu, Vec3 ev, Shade s, Rgb a, Rgb b) {
            Patch p;
            p.origin = o;
            p.eu = eu;
            p.ev = ev;
            p.unit_n = normalized(cross(eu, ev));
            p.shade = s;
            p.col_a = a;
            p.col_b = b;
            return p;
        };
        const Rgb warm{0.8f, 0.55f, 0.3f}, cold{0.25f, 0.35f, 0.7f};
        const Rgb light{0.85f, 0.85f, 0.85f}, dark{0.15f, 0.15f, 0.15f};
        // back, left, right, floor (y down is +), ceiling
        sc.patches.push_back(quad({-W / 2, -H / 2, D}, {W, 0, 0}, {0, H, 0},
                                  Shade::checker, light, dark));
        sc.patches.push_back(quad({-W / 2, -H / 2, 0}, {0, 0, D}, {0, H, 0},
                                  Shade::noise, light, dark));
        sc.patches.push_back(quad({W / 2, -H / 2, 0}, {0, 0, D}, {0, H, 0},
                                  Shade::checker, warm, cold));
        sc.patches.push_back(quad({-W / 2, H / 2, 0}, {W, 0, 0}, {0, 0, D},
                                  Shade::noise, light, dark));
        sc.patches.push_back(quad({-W / 2, -H / 2, 0}, {W, 0, 0}, {0, 0, D},
                                  Shade::flat, {0.6f, 0.6f, 0.58f}, dark));
    }
    return sc;
}

// far_wall_bands is resolved by the render loop (it needs the image width).
Rgb shade_pixel(const Scene& sc, const Patch& p, int px, int py, bool& textured) {
    switch (p.shade) {
    case Shade::checker: {
        textured = true;
        bool odd = ((px / sc.cell_px) + (py / sc.cell_px)) & 1;
        return odd ? p.col_b : p.col_a;
    }
    case Shade::noise: {
        textured = true;
        uint64_t hv = splitmix64(splitmix64(uint64_t(px) * 0x1f123bb5 + uint64_t(py)) ^
                                 sc.noise_seed);
        float g = 0.1f + 0.8f * float(double(hv >> 11) * 0x1.0p-53);
        return {g, g, g};
    }
    default:
        textured = false;
        return p.col_a;
    }
}

} // namespace

double SceneSpec::param(const std::string& name) const {
    const auto& dflts = allowed_params(layout);
    auto it = dflts.find(name);
    if (it == dflts.end())
        throw error("scene: unknown parameter " + name);
    return get_param(params, name, it->second);
}

SceneSpec make_scene(SceneLayout layout, int image_w, int image_h) {
    SceneSpec s;
    s.layout = layout;
    s.image_w = image_w;
    s.image_h = image_h;
    s.views = default_views(layout, image_w, image_h);
    return s;
}

SceneSpec read_scene_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw error("cannot open for reading: " + path);
    SceneSpec spec;
    bool have_scene = false;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "scene") {
            std::string name;
            ss >> name;
            if (name == "box_room")
                spec.layout = SceneLayout::box_room;
            else if (name == "two_walls")
                spec.layout = SceneLayout::two_walls;
            else if (name == "far_wall")
                spec.layout = SceneLayout::far_wall;
            else
                throw error("scene spec: unknown layout " + name);
            have_scene = true;
        } else if (tok == "image") {
            if (!(ss >> spec.image_w >> spec.image_h) || spec.image_w < 8 || spec.image_h < 8)
                throw error("scene spec: bad image dims");
        } else if (tok == "param") {
            std::string name;
            double value;
            if (!(ss >> name >> value))
                throw error("scene spec: bad param line: " + line);
            spec.params[name] = value;
        } else if (tok == "view") {
            CameraView v;
            if (!(ss >> v.fx >> v.fy >> v.cx >> v.cy >> v.rotation.m[0] >> v.rotation.m[1] >>
                  v.rotation.m[2] >> v.rotation.m[3] >> v.rotation.m[4] >> v.rotation.m[5] >>
                  v.rotation.m[6] >> v.rotation.m[7] >> v.rotation.m[8] >> v.translation.x >>
                  v.translation.y >> v.translation.z))
                throw error("scene spec: bad view line: " + line);
            v.validate();
            spec.views.push_back(v);
        } else {
            throw error("scene spec: unknown directive " + tok);
        }
    }
    if (!have_scene)
        throw error("scene spec: missing scene line");
    if (spec.views.empty())
        spec.views = default_views(spec.layout, spec.image_w, spec.image_h);
    build_scene(spec, spec.views);  // rejects unknown params early
    return spec;
}

std::vector<ViewRender> render_scene(const SceneSpec& spec) {
    if (spec.image_w < 8 || spec.image_h < 8)
        throw error("render_scene: image must be at least 8x8");
    std::vector<CameraView> views =
        spec.views.empty() ? default_views(spec.layout, spec.image_w, spec.image_h) : spec.views;
    for (const CameraView& v : views)
        v.validate();
    const Scene sc = build_scene(spec, views);
    const int w = spec.image_w, h = spec.image_h;

    std::vector<ViewRender> out;
    for (const CameraView& v : views) {
        ViewRender r{ColorGrid(w, h, Rgb{0, 0, 0}), DepthGrid(w, h, 0.0),
                     NormalGrid(w, h, Vec3{0, 0, -1}), MaskGrid(w, h, 0)};
        Mat3 rt = v.rotation.transposed();
        Vec3 o = rt * (v.translation * -1.0);
        long long hits = 0;

#pragma omp parallel for schedule(static) reduction(+ : hits)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                Vec3 dir = rt * Vec3{(x - v.cx) / v.fx, (y - v.cy) / v.fy, 1.0};
                double best_t = 1e300;
                int best_p = -1;
                for (size_t pi = 0; pi < sc.patches.size(); ++pi) {
                    const Patch& p = sc.patches[pi];
                    double denom = dot(p.unit_n, dir);
                    if (std::abs(denom) < 1e-12)
                        continue;
                    double t = dot(p.unit_n, p.origin - o) / denom;
                    if (t <= 1e-9 || t >= best_t)
                        continue;
                    Vec3 q = o + dir * t - p.origin;
                    double a = dot(q, p.eu) / dot(p.eu, p.eu);
                    double b = dot(q, p.ev) / dot(p.ev, p.ev);
                    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
                        continue;
                    best_t = t;
                    best_p = int(pi);
                }
                if (best_p < 0)
                    continue;
                ++hits;
                const Patch& p = sc.patches[best_p];
                r.depth.at(x, y) = best_t;  // dir_cam.z == 1, so t is camera z
                r.normals.at(x, y) = dot(p.unit_n, dir) < 0 ? p.unit_n : p.unit_n * -1.0;
                bool textured = false;
                Rgb col;
                if (p.shade == Shade::far_wall_bands) {
                    if (x < sc.strip_px || x >= w - sc.strip_px) {
                        bool odd = ((x / sc.cell_px) + (y / sc.cell_px)) & 1;
                        col = odd ? p.col_b : p.col_a;
                        textured = true;
                    } else {
                        col = p.col_a;  // light cell color, keeps the band connected
                        textured = false;
                    }
                } else {
                    col = shade_pixel(sc, p, x, y, textured);
                }
                r.color.at(x, y) = col;
                r.texture_mask.at(x, y) = textured ? 1 : 0;
            }
        }
        if (hits * 2 < (long long)r.depth.size())
            throw error("render_scene: view sees less than half the scene");
        out.push_back(std::move(r));
    }
    return out;
}

PointCloud gt_cloud(const SceneSpec& spec, double samples_per_m2) {
    if (!(samples_per_m2 > 0.0))
        throw error("gt_cloud: density must be > 0");
    std::vector<CameraView> views =
        spec.views.empty() ? default_views(spec.layout, spec.image_w, spec.image_h) : spec.views;
    const Scene sc = build_scene(spec, views);
    PointCloud cloud;
    // R2 low-discrepancy lattice: deterministic, evenly spread
    const double g = 1.32471795724474602596;  // plastic constant
    const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
    for (const Patch& p : sc.patches) {
        double area = norm(cross(p.eu, p.ev));
        long long n = std::llround(area * samples_per_m2);
        for (long long i = 0; i < n; ++i) {
            double u = std::fmod(0.5 + a1 * double(i + 1), 1.0);
            double v = std::fmod(0.5 + a2 * double(i + 1), 1.0);
            cloud.points.push_back(p.origin + p.eu * u + p.ev * v);
        }
    }
    return cloud;
}

DepthGrid corrupt_depth(const DepthGrid& d, double outlier_frac, double magnitude, uint64_t seed) {
    if (outlier_frac < 0.0 || outlier_frac > 1.0)
        throw error("corrupt_depth: fraction must be in [0,1]");
    std::vector<int32_t> valid;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            if (d.at(x, y) > 0.0)
                valid.push_back(int32_t(y * d.width + x));
    long long k = std::llround(outlier_frac * double(valid.size()));
    DepthGrid out = d;
    Rng rng(seed);
    for (long long i = 0; i < k; ++i) {
        size_t j = size_t(i) + size_t(rng.bounded(valid.size() - i));
        std::swap(valid[i], valid[j]);
        double sign = rng.bounded(2) ? 1.0 : -1.0;
        double& v = out.data[valid[i]];
        double nv = v + sign * magnitude;
        if (nv <= 0.0)
            nv = v + magnitude;  // stay valid, same |offset|
        v = nv;
    }
    return out;
}

} // namespace sdprop
