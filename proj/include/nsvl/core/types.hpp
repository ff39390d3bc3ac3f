#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "nsvl/core/jet.hpp"

namespace nsvl {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

template <class S>
using Vec4T = std::array<S, 4>;

struct Point4 {
    double x = 0.0, y = 0.0, z = 0.0, t = 0.0;

    [[nodiscard]] bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(t);
    }
    [[nodiscard]] Vec4T<double> as_array() const { return {x, y, z, t}; }
    static Point4 from_array(const Vec4T<double>& a) { return {a[0], a[1], a[2], a[3]}; }
};

template <class S>
struct StateT {
    std::array<S, 3> u{};
    S p{};
};

using FlowState = StateT<double>;

// Velocity/pressure derivatives at one point. d2u[i][j] = d^2 u_i / dx_j^2.
struct FlowJet {
    FlowState state;
    Mat3 du{};
    Vec3 dudt{};
    Mat3 d2u{};
    Vec3 dp{};
};

inline Vec4T<Jet> seed_jets(const Point4& p) {
    return {Jet::variable(p.x, 0), Jet::variable(p.y, 1), Jet::variable(p.z, 2),
            Jet::variable(p.t, 3)};
}

namespace la {

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::hypot(a[0], a[1], a[2]); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

inline Vec3 mul(const Mat3& m, const Vec3& v) {
    return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}
inline Mat3 mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}
inline Mat3 transpose(const Mat3& m) {
    Mat3 r{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r[i][j] = m[j][i];
    return r;
}
inline double det(const Mat3& m) { return dot(m[0], cross(m[1], m[2])); }
inline double frobenius(const Mat3& m) {
    double s = 0.0;
    for (const auto& row : m)
        for (double v : row) s += v * v;
    return std::sqrt(s);
}
inline Mat3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

// Solve m x = b by Cramer's rule; caller guarantees det(m) != 0.
inline Vec3 solve(const Mat3& m, const Vec3& b) {
    const double d = det(m);
    Vec3 x{};
    for (std::size_t c = 0; c < 3; ++c) {
        Mat3 mc = m;
        for (std::size_t r = 0; r < 3; ++r) mc[r][c] = b[r];
        x[c] = det(mc) / d;
    }
    return x;
}

} // namespace la

} // namespace nsvl
