#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdprop {

// All module-level precondition violations throw this.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct Rgb {
    float r = 0.f, g = 0.f, b = 0.f;
};

inline bool operator==(const Rgb& a, const Rgb& b) {
    return a.r == b.r && a.g == b.g && a.b == b.b;
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& v);
Vec3 normalized(const Vec3& v);

// Row-major 3x3 matrix, just enough for camera math.
struct Mat3 {
    double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    double operator()(int r, int c) const { return m[r * 3 + c]; }
    double& operator()(int r, int c) { return m[r * 3 + c]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                t(r, c) = (*this)(c, r);
        return t;
    }
};

Mat3 operator*(const Mat3& a, const Mat3& b);
double det(const Mat3& a);

// Dense row-major raster. Plain value type: copies copy the data.
template <class V>
struct Grid2D {
    int width = 0;
    int height = 0;
    std::vector<V> data;

    Grid2D() = default;
    Grid2D(int w, int h, V fill = V{}) : width(w), height(h), data(size_t(w) * size_t(h), fill) {
        if (w < 1 || h < 1)
            throw error("Grid2D: dimensions must be >= 1");
    }

    size_t size() const { return data.size(); }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    V& at(int x, int y) { return data[size_t(y) * width + x]; }
    const V& at(int x, int y) const { return data[size_t(y) * width + x]; }

    bool same_dims(int w, int h) const { return width == w && height == h; }
};

template <class V>
bool operator==(const Grid2D<V>& a, const Grid2D<V>& b) {
    return a.width == b.width && a.height == b.height && a.data == b.data;
}

// Depth in meters, 0 = invalid / unknown.
using DepthGrid = Grid2D<double>;
using ColorGrid = Grid2D<Rgb>;
// Unit surface normals (length within 1e-6 of 1 wherever set).
using NormalGrid = Grid2D<Vec3>;
// Per-pixel confidence in [0,1].
using ConfidenceGrid = Grid2D<double>;
using MaskGrid = Grid2D<uint8_t>;

void check_depth_valid(const DepthGrid& g);     // finite, >= 0
void check_normals_unit(const NormalGrid& g);   // |n| within 1e-6 of 1

} // namespace sdprop
