#pragma once

// Real special-function kernels: Kummer M, Bessel J/Y/I, erf, erfi, Ei.
// Each kernel has a checked entry point returning SpecialValue and a plain
// scalar form (double or Jet) used by the flow catalog.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/jet.hpp"

namespace nsvl::specfun {

struct SpecialValue {
    double value = 0.0;
    double est_abs_error = 0.0;
};

struct ErfPair {
    SpecialValue erf;
    SpecialValue erfi;
};

enum class BesselKind { J, Y };

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr int kSeriesCap = 10000;

namespace detail {

inline bool is_nonpositive_integer(double b) { return b <= 0.0 && b == std::floor(b); }
inline bool is_integer(double v) { return v == std::floor(v); }

// exp(sign * x^2) with the rounding error of x*x folded back in.
inline double exp_of_square(double x, double sign) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(sign * hi) * (1.0 + sign * lo);
}

struct Series {
    double sum = 0.0;
    double abs_sum = 0.0;
    double last = 0.0;
    int terms = 0;
};

inline Series kummer_series(double a, double b, double z) {
    Series s;
    double term = 1.0;
    s.sum = 1.0;
    s.abs_sum = 1.0;
    int small_run = 0;
    for (int n = 0; n < kSeriesCap; ++n) {
        term *= (a + n) / (b + n) * z / (n + 1);
        s.sum += term;
        s.abs_sum += std::abs(term);
        s.last = term;
        s.terms = n + 2;
        if (!std::isfinite(s.sum)) throw OverflowError("kummer_m: series overflow");
        small_run = (std::abs(term) < 1e-16 * std::abs(s.sum)) ? small_run + 1 : 0;
        if (small_run >= 3) return s;
    }
    throw ConvergenceError("kummer_m: series did not converge within the term cap");
}

template <class F>
SpecialValue boost_call(const char* name, F&& f) {
    try {
        const double v = f();
        if (!std::isfinite(v)) throw OverflowError(std::string(name) + ": result not finite");
        return {v, 8.0 * kEps * std::abs(v)};
    } catch (const std::domain_error& e) {
        throw DomainError(std::string(name) + ": " + e.what());
    } catch (const std::overflow_error& e) {
        throw OverflowError(std::string(name) + ": " + e.what());
    } catch (const boost::math::evaluation_error& e) {
        throw ConvergenceError(std::string(name) + ": " + e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------- Kummer M

inline SpecialValue kummer_m(double a, double b, double z) {
    if (detail::is_nonpositive_integer(b))
        throw DomainError("kummer_m: beta must not be zero or a negative integer");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z))
        throw DomainError("kummer_m: non-finite argument");
    if (z == 0.0 || a == 0.0) return {1.0, 0.0};
    const bool terminating = detail::is_nonpositive_integer(a);
    if (z < 0.0 && !terminating) {
        const auto s = detail::kummer_series(b - a, b, -z);
        const double ez = std::exp(z);
        return {ez * s.sum, ez * (s.terms * kEps * s.abs_sum + std::abs(s.last))};
    }
    const auto s = detail::kummer_series(a, b, z);
    return {s.sum, s.terms * kEps * s.abs_sum + std::abs(s.last)};
}

inline double kummer(double a, double b, double z) { return kummer_m(a, b, z).value; }

inline Jet kummer(double a, double b, const Jet& z) {
    const double m0 = kummer(a, b, z.v);
    const double m1 = a / b * kummer(a + 1.0, b + 1.0, z.v);
    const double m2 = a * (a + 1.0) / (b * (b + 1.0)) * kummer(a + 2.0, b + 2.0, z.v);
    return ad::lift(z, m0, m1, m2);
}

// ------------------------------------------------------- Dawson, erf, erfi

// D(x) = exp(-x^2) * integral_0^x exp(t^2) dt
inline double dawson(double x) {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    double d = 0.0;
    if (ax <= 7.0) {
        // exp(-x^2) * sum x^(2n+1) / (n! (2n+1)), all terms positive
        const double x2 = ax * ax;
        double power = ax;
        double sum = ax;
        for (int n = 1; n < kSeriesCap; ++n) {
            power *= x2 / n;
            const double term = power / (2 * n + 1);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        d = detail::exp_of_square(ax, -1.0) * sum;
    } else {
        // 1/(2x) * sum (2k-1)!! / (2x^2)^k, truncated at its smallest term
        const double inv = 1.0 / (2.0 * ax * ax);
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            const double next = term * (2 * k - 1) * inv;
            if (next >= term) break;
            term = next;
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        d = sum / (2.0 * ax);
    }
    return x < 0.0 ? -d : d;
}

inline double erf(double x) { return std::erf(x); }

inline double erfi(double x) {
    const double x2 = x * x;
    if (x2 > std::log(std::numeric_limits<double>::max()))
        throw OverflowError("erfi: result exceeds the double range");
    return 2.0 / std::sqrt(std::numbers::pi) * detail::exp_of_square(x, 1.0) * dawson(x);
}

inline ErfPair erf_pair(double x) {
    if (!std::isfinite(x)) throw DomainError("erf_pair: non-finite argument");
    const double e = erf(x);
    const double ei = erfi(x);
    return {{e, 2.0 * kEps * std::max(std::abs(e), 1e-300)}, {ei, 16.0 * kEps * std::abs(ei)}};
}

inline Jet erf(const Jet& x) {
    const double g = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x.v * x.v);
    return ad::lift(x, erf(x.v), g, -2.0 * x.v * g);
}

inline Jet erfi(const Jet& x) {
    const double g = 2.0 / std::sqrt(std::numbers::pi) * detail::exp_of_square(x.v, 1.0);
    return ad::lift(x, erfi(x.v), g, 2.0 * x.v * g);
}

// ------------------------------------------------------------------ Bessel

inline SpecialValue bessel_cyl(BesselKind kind, double order, double x) {
    if (!std::isfinite(order) || !std::isfinite(x)) throw DomainError("bessel_cyl: non-finite argument");
    if (kind == BesselKind::Y) {
        if (x <= 0.0) throw DomainError("bessel_cyl: Y requires x > 0");
        return detail::boost_call("bessel_cyl(Y)", [&] { return boost::math::cyl_neumann(order, x); });
    }
    if (x <= 0.0 && !detail::is_integer(order))
        throw DomainError("bessel_cyl: non-integer order J requires x > 0");
    if (x < 0.0) {
        // J_n(-x) = (-1)^n J_n(x) for integer n
        auto r = detail::boost_call("bessel_cyl(J)", [&] { return boost::math::cyl_bessel_j(order, -x); });
        if (std::fmod(std::abs(order), 2.0) == 1.0) r.value = -r.value;
        return r;
    }
    return detail::boost_call("bessel_cyl(J)", [&] { return boost::math::cyl_bessel_j(order, x); });
}

inline SpecialValue bessel_i(double order, double x) {
    if (!std::isfinite(order) || !std::isfinite(x)) throw DomainError("bessel_i: non-finite argument");
    if (x < 0.0) throw DomainError("bessel_i: x must be non-negative");
    return detail::boost_call("bessel_i", [&] { return boost::math::cyl_bessel_i(order, x); });
}

inline double cyl_j(double nu, double x) { return bessel_cyl(BesselKind::J, nu, x).value; }
inline double cyl_y(double nu, double x) { return bessel_cyl(BesselKind::Y, nu, x).value; }
inline double cyl_i(double nu, double x) { return bessel_i(nu, x).value; }

inline Jet cyl_j(double nu, const Jet& x) {
    const double z = cyl_j(nu, x.v);
    const double z1 = 0.5 * (cyl_j(nu - 1.0, x.v) - cyl_j(nu + 1.0, x.v));
    const double z2 = -z1 / x.v - (1.0 - nu * nu / (x.v * x.v)) * z;
    return ad::lift(x, z, z1, z2);
}

inline Jet cyl_y(double nu, const Jet& x) {
    const double z = cyl_y(nu, x.v);
    const double z1 = 0.5 * (cyl_y(nu - 1.0, x.v) - cyl_y(nu + 1.0, x.v));
    const double z2 = -z1 / x.v - (1.0 - nu * nu / (x.v * x.v)) * z;
    return ad::lift(x, z, z1, z2);
}

inline Jet cyl_i(double nu, const Jet& x) {
    const double z = cyl_i(nu, x.v);
    const double z1 = 0.5 * (cyl_i(nu - 1.0, x.v) + cyl_i(nu + 1.0, x.v));
    const double z2 = -z1 / x.v + (1.0 + nu * nu / (x.v * x.v)) * z;
    return ad::lift(x, z, z1, z2);
}

// e^{-x} I_nu(x); the Hankel expansion takes over where I_nu itself would overflow.
inline double cyl_i_scaled(double nu, double x) {
    if (x < 500.0) return std::exp(-x) * cyl_i(nu, x);
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
        sum += term;
        if (std::abs(term) < kEps * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

inline Jet cyl_i_scaled(double nu, const Jet& x) {
    const double i0 = cyl_i_scaled(nu, x.v);
    const double i1 = 0.5 * (cyl_i_scaled(nu - 1.0, x.v) + cyl_i_scaled(nu + 1.0, x.v));
    const double i2 = -i1 / x.v + (1.0 + nu * nu / (x.v * x.v)) * i0;
    return ad::lift(x, i0, i1 - i0, i2 - 2.0 * i1 + i0);
}

// ------------------------------------------------------- exponential integral

inline SpecialValue expint_ei(double x) {
    if (x == 0.0) throw DomainError("expint_ei: logarithmic singularity at x = 0");
    if (!std::isfinite(x)) throw DomainError("expint_ei: non-finite argument");
    return detail::boost_call("expint_ei", [&] { return boost::math::expint(x); });
}

inline double ei(double x) { return expint_ei(x).value; }

inline Jet ei(const Jet& x) {
    const double e = std::exp(x.v);
    return ad::lift(x, ei(x.v), e / x.v, e * (x.v - 1.0) / (x.v * x.v));
}

// G(s) = Ei(-s) - Ei(-2s), finite at s = 0 where it equals -ln 2.
inline double ei_gap(double s) {
    if (s < 0.0) throw DomainError("ei_gap: s must be non-negative");
    if (s > 0.5) return ei(-s) - ei(-2.0 * s);
    double sum = -std::numbers::ln2;
    double ps = 1.0;   // (-s)^k / k!
    double two_k = 1.0;
    for (int k = 1; k < 60; ++k) {
        ps *= -s / k;
        two_k *= 2.0;
        const double term = ps * (1.0 - two_k) / k;
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

inline Jet ei_gap(const Jet& s) {
    const double v = ei_gap(s.v);
    double g1 = 0.0, g2 = 0.0;
    if (s.v > 0.5) {
        const double e1 = std::exp(-s.v), e2 = std::exp(-2.0 * s.v);
        g1 = (e1 - e2) / s.v;
        g2 = ((2.0 * e2 - e1) * s.v - (e1 - e2)) / (s.v * s.v);
    } else {
        // (e^{-s} - e^{-2s})/s = sum_{k>=1} c_k s^{k-1},  c_k = (-1)^k (1 - 2^k) / k!
        double fact = 1.0, two_k = 1.0, p1 = 1.0, p2 = 1.0;
        for (int k = 1; k < 40; ++k) {
            fact *= k;
            two_k *= 2.0;
            const double c = ((k % 2) ? -1.0 : 1.0) * (1.0 - two_k) / fact;
            g1 += c * p1;
            p1 *= s.v;
            if (k >= 2) {
                g2 += c * (k - 1) * p2;
                p2 *= s.v;
            }
        }
    }
    return ad::lift(s, v, g1, g2);
}

// (1 - e^{-w}) / w, equal to 1 at w = 0.
inline double exprel_neg(double w) { return w == 0.0 ? 1.0 : -std::expm1(-w) / w; }

inline Jet exprel_neg(const Jet& w) {
    const double x = w.v;
    double f1 = 0.0, f2 = 0.0;
    if (std::abs(x) < 0.5) {
        // derivatives of sum_k (-w)^k / (k+1)!
        double fact = 1.0, p1 = 1.0, p2 = 1.0;
        for (int k = 1; k < 30; ++k) {
            fact *= (k + 1);
            const double sign = (k % 2) ? -1.0 : 1.0;
            f1 += sign * k * p1 / fact;
            p1 *= x;
            if (k >= 2) {
                f2 += sign * k * (k - 1) * p2 / fact;
                p2 *= x;
            }
        }
    } else {
        const double e = std::exp(-x);
        f1 = (e * (1.0 + x) - 1.0) / (x * x);
        f2 = (2.0 - e * (x * x + 2.0 * x + 2.0)) / (x * x * x);
    }
    return ad::lift(w, exprel_neg(x), f1, f2);
}

} // namespace nsvl::specfun
