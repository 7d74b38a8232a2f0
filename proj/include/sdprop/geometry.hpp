#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdprop/grid.hpp"

namespace sdprop {

// Pinhole camera with world-to-camera pose: p_cam = R * p_world + t.
// Pixel (x, y) is the center of column x, row y.
struct CameraView {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    Mat3 rotation;
    Vec3 translation;

    void validate() const;  // fx,fy > 0; R orthonormal, det +1 within 1e-9
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Rgb> colors;  // empty or same length as points
};

struct FusionConfig {
    double depth_threshold = 0.1;  // meters
    int min_consistent_views = 2;
};

// Camera ray through the pixel scaled to depth, moved to the world frame.
Vec3 backproject(const CameraView& view, double x, double y, double depth);

struct Projection {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;  // camera-frame z
};

// nullopt when the point is behind the camera (z <= 0). In-frame checking is
// the caller's job; the view does not know the image dims.
std::optional<Projection> project(const CameraView& view, const Vec3& world_point);

// Multi-view consistency fusion: every valid reference pixel is projected
// into all other views; a source view is consistent when the projection
// lands in frame on valid depth within depth_threshold. The reference view
// itself counts as consistent, so min_consistent_views = 2 means "one other
// view agrees". Pixels reaching the count emit one point: the backprojection
// of the mean of the reference depth and the consistent source depths taken
// along the reference ray. No deduplication across reference views; emission
// order is row-major per reference view, views in input order. When
// `emitted` is non-null it receives one mask per view marking the pixels
// that produced a point.
PointCloud fuse_depths(const std::vector<std::pair<CameraView, const DepthGrid*>>& views,
                       const FusionConfig& cfg, std::vector<MaskGrid>* emitted = nullptr);

// ASCII PLY, element vertex with x y z [red green blue].
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

// One view per line: fx fy cx cy r11 .. r33 t1 t2 t3
void write_cameras(const std::string& path, const std::vector<CameraView>& views);
std::vector<CameraView> read_cameras(const std::string& path);

} // namespace sdprop
