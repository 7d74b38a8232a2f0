#include "sdprop/grid.hpp"

#include <cmath>

namespace sdprop {

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n <= 0.0)
        throw error("normalized: zero-length vector");
    return v / n;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 c;
    for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a(r, k) * b(k, col);
            c(r, col) = s;
        }
    return c;
}

double det(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

void check_depth_valid(const DepthGrid& g) {
    for (double v : g.data)
        if (!std::isfinite(v) || v < 0.0)
            throw error("DepthGrid: values must be finite and >= 0");
}

void check_normals_unit(const NormalGrid& g) {
    for (const Vec3& n : g.data) {
        double len = norm(n);
        if (std::abs(len - 1.0) > 1e-6)
            throw error("NormalGrid: normals must have unit length");
    }
}

} // namespace sdprop
