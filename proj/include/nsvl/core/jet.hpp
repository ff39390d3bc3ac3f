#pragma once

// Forward-mode differentiation over the four spacetime coordinates.
// A Jet carries a value, its gradient and the diagonal of its Hessian,
// which is exactly what the momentum residual needs (first derivatives
// plus the Laplacian).

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace nsvl::ad {

inline constexpr std::size_t kVars = 4;

struct Jet {
    double v = 0.0;
    std::array<double, kVars> d{};
    std::array<double, kVars> dd{};

    constexpr Jet() = default;
    constexpr Jet(double value) : v(value) {} // NOLINT: implicit lift of constants

    static constexpr Jet variable(double value, std::size_t slot) {
        Jet j(value);
        j.d[slot] = 1.0;
        return j;
    }

    Jet& operator+=(const Jet& o) {
        v += o.v;
        for (std::size_t i = 0; i < kVars; ++i) {
            d[i] += o.d[i];
            dd[i] += o.dd[i];
        }
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v -= o.v;
        for (std::size_t i = 0; i < kVars; ++i) {
            d[i] -= o.d[i];
            dd[i] -= o.dd[i];
        }
        return *this;
    }
    Jet& operator*=(const Jet& o) {
        for (std::size_t i = 0; i < kVars; ++i) {
            dd[i] = dd[i] * o.v + 2.0 * d[i] * o.d[i] + v * o.dd[i];
            d[i] = d[i] * o.v + v * o.d[i];
        }
        v *= o.v;
        return *this;
    }
    Jet& operator*=(double s) {
        v *= s;
        for (std::size_t i = 0; i < kVars; ++i) {
            d[i] *= s;
            dd[i] *= s;
        }
        return *this;
    }
};

// Chain rule for a scalar function f with f(a.v) = f0, f' = f1, f'' = f2.
inline Jet lift(const Jet& a, double f0, double f1, double f2) {
    Jet r(f0);
    for (std::size_t i = 0; i < kVars; ++i) {
        r.d[i] = f1 * a.d[i];
        r.dd[i] = f2 * a.d[i] * a.d[i] + f1 * a.dd[i];
    }
    return r;
}

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator-(const Jet& a) { return a * -1.0; }
inline Jet operator+(const Jet& a) { return a; }

inline Jet inverse(const Jet& a) {
    const double r = 1.0 / a.v;
    return lift(a, r, -r * r, 2.0 * r * r * r);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& b) { return s * inverse(b); }

inline bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
inline bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return lift(a, e, e, e);
}
inline Jet expm1(const Jet& a) {
    const double e = std::exp(a.v);
    return lift(a, std::expm1(a.v), e, e);
}
inline Jet log(const Jet& a) {
    return lift(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return lift(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet pow(const Jet& a, double n) {
    const double p = std::pow(a.v, n);
    return lift(a, p, n * p / a.v, n * (n - 1.0) * p / (a.v * a.v));
}
inline Jet sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return lift(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return lift(a, c, -s, -c);
}
inline Jet sinh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return lift(a, s, c, s);
}
inline Jet cosh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return lift(a, c, s, c);
}
inline Jet atan(const Jet& a) {
    const double q = 1.0 / (1.0 + a.v * a.v);
    return lift(a, std::atan(a.v), q, -2.0 * a.v * q * q);
}
inline Jet atan2(const Jet& y, const Jet& x) {
    // Value from the two-argument form; derivatives from atan(y/x) away from x = 0,
    // and from -atan(x/y) otherwise, which share the same derivative.
    Jet r = std::abs(x.v) >= std::abs(y.v) ? atan(y / x) : -atan(x / y);
    r.v = std::atan2(y.v, x.v);
    return r;
}

} // namespace nsvl::ad

namespace nsvl {

using ad::Jet;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

template <class S>
inline constexpr bool is_jet_v = std::is_same_v<S, Jet>;

} // namespace nsvl
