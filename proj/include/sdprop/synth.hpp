#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdprop/geometry.hpp"
#include "sdprop/grid.hpp"

namespace sdprop {

enum class SceneLayout { box_room, two_walls, far_wall };

// Planar multi-view test scenes with closed-form depth and normals.
//
// Layout parameters (all via `params`, defaulted):
//   far_wall:  depth_left, depth_right, strip_px, cell_px
//              one big slanted wall; checker strips at the left/right image
//              edges, untextured in between
//   two_walls: depth_left, depth_right, split, cell_px
//              frontal left wall (checker) and a deeper right wall (flat)
//   box_room:  room_w, room_h, room_d, cell_px, noise_seed
//              camera(s) inside a box; mixed checker/noise/flat faces
struct SceneSpec {
    SceneLayout layout = SceneLayout::far_wall;
    int image_w = 320;
    int image_h = 240;
    std::map<std::string, double> params;
    std::vector<CameraView> views;  // layout defaults used when empty

    double param(const std::string& name) const;
};

SceneSpec make_scene(SceneLayout layout, int image_w, int image_h);

// Key-value text:
//   scene <box_room|two_walls|far_wall>
//   image <w> <h>
//   param <name> <value>
//   view fx fy cx cy r11 .. r33 t1 t2 t3
// Unknown directives and unknown parameter names are rejected.
SceneSpec read_scene_spec(const std::string& path);

struct ViewRender {
    ColorGrid color;
    DepthGrid depth;         // camera-frame z of the first plane hit, 0 = miss
    NormalGrid normals;      // world frame, oriented toward the camera
    MaskGrid texture_mask;   // 1 on checker/noise shading, 0 on flat
};

// Exact ray-cast of the planar geometry. Each view must hit geometry in at
// least 50% of its pixels.
std::vector<ViewRender> render_scene(const SceneSpec& spec);

// Deterministic surface sampling, round(area * density) points per surface,
// laid out with a low-discrepancy lattice.
PointCloud gt_cloud(const SceneSpec& spec, double samples_per_m2);

// Offsets a deterministic subset (round(frac * n_valid) pixels) of the valid
// pixels by +/- magnitude.
DepthGrid corrupt_depth(const DepthGrid& d, double outlier_frac, double magnitude, uint64_t seed);

} // namespace sdprop
