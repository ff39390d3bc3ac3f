#pragma once

// Closed-form velocity/pressure of each solution family, written once as a
// template over the scalar type so that double evaluation and Jet
// differentiation share the same formula.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "nsvl/catalog/params.hpp"
#include "nsvl/core/types.hpp"
#include "nsvl/specfun.hpp"

namespace nsvl::families {

inline constexpr double kRadiusFloor = 1e-9;
inline constexpr double kTimeFloor = 1e-6;

using Reject = std::optional<std::string>;

// Swirling flows share u = (-g x/2 - y f, -g y/2 + x f, g z).
template <class S>
StateT<S> swirl_state(const Vec4T<S>& q, double gamma, const S& f, const S& p) {
    StateT<S> st;
    st.u[0] = -0.5 * gamma * q[0] - q[1] * f;
    st.u[1] = -0.5 * gamma * q[1] + q[0] * f;
    st.u[2] = gamma * q[2];
    st.p = p;
    return st;
}

struct KummerShear {
    double k1, sigma, G, H, c1, c2, c3, c4, c5, tau0, nu;

    KummerShear(const ParamSet& p, double nu_)
        : k1(p.get("k1")), sigma(p.get("sigma")), G(p.get("G")), H(p.get("H")), c1(p.get("c1")),
          c2(p.get("c2")), c3(p.get("c3")), c4(p.get("c4")), c5(p.get("c5")), tau0(p.get("tau0")),
          nu(nu_) {
        if (k1 == 0.0) throw ParamError("KummerShear: k1 must be nonzero");
    }

    template <class S>
    S profile_y(const S& y) const {
        const S s = k1 * y * y / (2.0 * nu);
        return c2 * specfun::kummer(-G / (2.0 * k1), 0.5, s) +
               c3 * y * specfun::kummer(0.5 - G / (2.0 * k1), 1.5, s);
    }
    template <class S>
    S profile_z(const S& z) const {
        const S w = z - sigma / k1;
        const S s = -k1 * w * w / (2.0 * nu);
        return c4 * specfun::kummer(-H / (2.0 * k1), 0.5, s) +
               c5 * w * specfun::kummer(0.5 - H / (2.0 * k1), 1.5, s);
    }
    template <class S>
    S profile_t(const S& t) const {
        using std::exp;
        return c1 * exp((H - G) * t);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        const S &y = q[1], &z = q[2];
        StateT<S> st;
        st.u[0] = profile_t(q[3]) * profile_y(y) * profile_z(z);
        st.u[1] = k1 * y;
        st.u[2] = sigma - k1 * z;
        st.p = -0.5 * k1 * k1 * z * z + k1 * sigma * z + tau0 - 0.5 * k1 * k1 * y * y;
        return st;
    }
    Reject reject(const Point4& pt) const {
        const double w = pt.z - sigma / k1;
        if (std::abs(k1) * std::max(pt.y * pt.y, w * w) / (2.0 * nu) > 600.0)
            return "Kummer argument beyond the double range";
        return std::nullopt;
    }
};

struct ErfProductShear {
    double k1, c2, c3, c4, c5, nu;
    static constexpr double kWindow = 5.0;

    ErfProductShear(const ParamSet& p, double nu_)
        : k1(p.get("k1")), c2(p.get("c2")), c3(p.get("c3")), c4(p.get("c4")), c5(p.get("c5")), nu(nu_) {
        if (k1 == 0.0) throw ParamError("ErfProductShear: k1 must be nonzero");
    }

    [[nodiscard]] double scale() const { return std::sqrt(std::abs(k1) / (2.0 * nu)); }
    [[nodiscard]] double amplitude() const { return std::sqrt(std::numbers::pi * nu / std::abs(k1)); }

    template <class S>
    S factor_y(const S& y) const {
        if (k1 > 0.0) return c2 - c3 * amplitude() * specfun::erfi(scale() * y);
        return c2 + c3 * amplitude() * specfun::erf(scale() * y);
    }
    template <class S>
    S factor_z(const S& z) const {
        if (k1 > 0.0) return c4 + c5 * amplitude() * specfun::erf(scale() * z);
        return c4 - c5 * amplitude() * specfun::erfi(scale() * z);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        const S &y = q[1], &z = q[2];
        StateT<S> st;
        st.u[0] = factor_y(y) * factor_z(z);
        st.u[1] = k1 * y;
        st.u[2] = -k1 * z;
        st.p = -0.5 * k1 * k1 * (y * y + z * z);
        return st;
    }
    Reject reject(const Point4& pt) const {
        const double arg = (k1 > 0.0 ? std::abs(pt.y) : std::abs(pt.z)) * scale();
        if (arg > kWindow) return k1 > 0.0 ? "|y| sqrt(k1/2nu) > 5 (erfi window)" : "|z| sqrt(-k1/2nu) > 5 (erfi window)";
        return std::nullopt;
    }
};

struct BurgersShearLayer {
    double gamma, A, B, nu;

    BurgersShearLayer(const ParamSet& p, double nu_)
        : gamma(p.get("gamma")), A(p.get("A")), B(p.get("B")), nu(nu_) {
        if (!(gamma > 0.0)) throw ParamError("BurgersShearLayer: gamma must be > 0");
    }

    template <class S>
    S profile(const S& y) const {
        return A * std::sqrt(std::numbers::pi * nu / gamma) * specfun::erf(std::sqrt(gamma / (2.0 * nu)) * y) + B;
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        const S &y = q[1], &z = q[2];
        StateT<S> st;
        st.u[0] = profile(y);
        st.u[1] = -gamma * y;
        st.u[2] = gamma * z;
        st.p = -0.5 * gamma * gamma * (y * y + z * z);
        return st;
    }
    Reject reject(const Point4&) const { return std::nullopt; }
};

struct ExpSaddle {
    double A, k1, nu;

    ExpSaddle(const ParamSet& p, double nu_) : A(p.get("A")), k1(p.get("k1")), nu(nu_) {}

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        const S &y = q[1], &z = q[2];
        StateT<S> st;
        st.u[0] = A * exp(k1 * (y * y - z * z) / (2.0 * nu));
        st.u[1] = k1 * y;
        st.u[2] = -k1 * z;
        st.p = -0.5 * k1 * k1 * (y * y + z * z);
        return st;
    }
    Reject reject(const Point4& pt) const {
        if (std::abs(k1) * std::abs(pt.y * pt.y - pt.z * pt.z) / (2.0 * nu) > 600.0)
            return "exponent beyond the double range";
        return std::nullopt;
    }
};

struct BesselTransient {
    double A, gamma, nu;
    static constexpr double kSeriesSwitch = 1.0;

    BesselTransient(const ParamSet& p, double nu_) : A(p.get("A")), gamma(p.get("gamma")), nu(nu_) {
        if (!(gamma > 0.0)) throw ParamError("BesselTransient: gamma must be > 0");
    }

    // y^{1/2} e^{-w} I_{-1/4}(w), w = gamma y^2 / (4 nu). Near y = 0 the
    // entire series replaces the 0 * infinity product.
    template <class S>
    S profile(const S& y) const {
        using std::exp;
        using std::pow;
        using std::sqrt;
        const S w = gamma * y * y / (4.0 * nu);
        if (value_of(w) < kSeriesSwitch) {
            const S q = 0.25 * w * w;
            S sum = 0.0;
            for (int k = 24; k >= 0; --k) sum = sum * q + 1.0 / (std::tgamma(k + 1.0) * std::tgamma(k + 0.75));
            return std::pow(8.0 * nu / gamma, 0.25) * exp(-w) * sum;
        }
        return sqrt(y) * specfun::cyl_i_scaled(-0.25, w);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        const S &y = q[1], &z = q[2];
        StateT<S> st;
        st.u[0] = A * exp(-0.5 * gamma * q[3]) * profile(y);
        st.u[1] = -gamma * y;
        st.u[2] = gamma * z;
        st.p = -0.5 * gamma * gamma * (y * y + z * z);
        return st;
    }
    Reject reject(const Point4& pt) const {
        if (pt.y <= 0.0) return "y <= 0: y^{1/2} branch";
        return std::nullopt;
    }
};

struct IrrotationalPotential {
    std::array<double, 3> c{}, lambda{};
    double phi0, nu;

    IrrotationalPotential(const ParamSet& p, double nu_)
        : c{p.get("c1"), p.get("c2"), p.get("c3")},
          lambda{p.get("lambda1"), p.get("lambda2"), p.get("lambda3")}, phi0(p.get("phi0")), nu(nu_) {
        const double sum = lambda[0] + lambda[1] + lambda[2];
        const double mag = std::abs(lambda[0]) + std::abs(lambda[1]) + std::abs(lambda[2]);
        if (std::abs(sum) > 1e-12 * std::max(1.0, mag))
            throw ParamError("IrrotationalPotential: lambda1 + lambda2 + lambda3 must be 0");
    }

    template <class S>
    S potential(const Vec4T<S>& q) const {
        using std::exp;
        S phi = phi0;
        for (int i = 0; i < 3; ++i) phi = phi + 0.5 * lambda[i] * q[i] * q[i] + c[i] * exp(-lambda[i] * q[3]) * q[i];
        return phi;
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        StateT<S> st;
        S phi_t = 0.0;
        S speed2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            const S e = exp(-lambda[i] * q[3]);
            st.u[i] = lambda[i] * q[i] + c[i] * e;
            phi_t = phi_t - lambda[i] * c[i] * e * q[i];
            speed2 = speed2 + st.u[i] * st.u[i];
        }
        st.p = -phi_t - 0.5 * speed2;
        return st;
    }
    Reject reject(const Point4&) const { return std::nullopt; }
};

struct ScaleInvariant {
    double a, b, c, c0, c1, c2, c3, c4, nu;

    ScaleInvariant(const ParamSet& p, double nu_)
        : a(p.get("a")), b(p.get("b")), c(p.get("c")), c0(p.get("c0")), c1(p.get("c1")), c2(p.get("c2")),
          c3(p.get("c3")), c4(p.get("c4")), nu(nu_) {}

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        using std::sqrt;
        const S& x = q[0];
        const S& t = q[3];
        const S rt = sqrt(t);
        const S rho = x / rt;
        const S damp = sqrt(nu / t) * exp(rho * (4.0 * c - rho) / (4.0 * nu));
        const S ierf = specfun::erfi((2.0 * c - rho) / (2.0 * std::sqrt(nu)));
        StateT<S> st;
        st.u[0] = c / rt;
        st.u[1] = -2.0 * a / rt + damp * (c1 - c2 * ierf);
        st.u[2] = -2.0 * b / rt + damp * (c3 - c4 * ierf);
        st.p = c0 / t + (0.5 * c * x - a * q[1] - b * q[2]) / (t * rt);
        return st;
    }
    Reject reject(const Point4& pt) const {
        if (pt.t <= kTimeFloor) return "t^{-1/2} singularity";
        const double arg = (2.0 * c - pt.x / std::sqrt(pt.t)) / (2.0 * std::sqrt(nu));
        if (arg * arg > 600.0) return "erfi argument beyond the double range";
        return std::nullopt;
    }
};

struct AxisymSource {
    double beta0, gamma0, a0, b0, nu;

    AxisymSource(const ParamSet& p, double nu_)
        : beta0(p.get("beta0")), gamma0(p.get("gamma0")), a0(p.get("a0")), b0(p.get("b0")), nu(nu_) {}

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        using std::sqrt;
        const S &x = q[0], &y = q[1], &t = q[3];
        const S r2 = x * x + y * y;
        StateT<S> st;
        st.u[0] = (nu * x - beta0 * y) / r2;
        st.u[1] = (beta0 * x + nu * y) / r2;
        st.u[2] = gamma0 / sqrt(nu * t) * exp(-r2 / (4.0 * nu * t)) + a0 * r2 / (2.0 * nu);
        st.p = -(nu * nu + beta0 * beta0) / (2.0 * r2) + a0 * q[2] + b0;
        return st;
    }
    Reject reject(const Point4& pt) const {
        if (std::hypot(pt.x, pt.y) <= kRadiusFloor) return "r=0 singularity";
        if (pt.t <= 0.0) return "t <= 0: heat-kernel term undefined";
        return std::nullopt;
    }
};

struct AxisymBessel {
    double alpha0, beta0, delta, M0, c1, c2, a0, b0, nu, mu, k;

    AxisymBessel(const ParamSet& p, double nu_)
        : alpha0(p.get("alpha0")), beta0(p.get("beta0")), delta(p.get("delta")), M0(p.get("M0")),
          c1(p.get("c1")), c2(p.get("c2")), a0(p.get("a0")), b0(p.get("b0")), nu(nu_) {
        if (!(delta > 0.0)) throw ParamError("AxisymBessel: delta must be > 0");
        mu = alpha0 / (2.0 * nu);
        k = std::sqrt(delta / nu);
    }

    template <class S>
    S profile(const S& r) const {
        using std::pow;
        const S kr = k * r;
        S z = c1 * specfun::cyl_j(mu, kr);
        if (c2 != 0.0) z = z + c2 * specfun::cyl_y(mu, kr);
        return pow(r, mu) * z;
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        using std::sqrt;
        const S &x = q[0], &y = q[1], &t = q[3];
        const S r2 = x * x + y * y;
        StateT<S> st;
        st.u[0] = (alpha0 * x - beta0 * y) / r2;
        st.u[1] = (alpha0 * y + beta0 * x) / r2;
        st.u[2] = M0 * exp(-delta * t) * profile(sqrt(r2)) - a0 * t;
        st.p = -(alpha0 * alpha0 + beta0 * beta0) / (2.0 * r2) + a0 * q[2] + b0;
        return st;
    }
    Reject reject(const Point4& pt) const {
        if (std::hypot(pt.x, pt.y) <= kRadiusFloor) return "r=0 singularity";
        return std::nullopt;
    }
};

struct BurgersVortex {
    double gamma, f0, f1, nu, a;

    BurgersVortex(const ParamSet& p, double nu_)
        : gamma(p.get("gamma")), f0(p.get("f0")), f1(p.get("f1")), nu(nu_) {
        if (!(gamma > 0.0)) throw ParamError("BurgersVortex: gamma must be > 0");
        a = gamma / (4.0 * nu);
    }

    // swirl f as a function of s = r^2
    template <class S>
    S swirl(const S& s) const {
        using std::exp;
        S f = a * f0 * specfun::exprel_neg(a * s);
        if (f1 != 0.0) f = f + f1 * exp(-a * s) / s;
        return f;
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        const S &x = q[0], &y = q[1], &z = q[2];
        const S s = x * x + y * y;
        const S f = swirl(s);
        const double D = f0 - f1;
        S p = -0.5 * gamma * gamma * (z * z + 0.25 * s) - 0.5 * s * f * f + a * D * D * specfun::ei_gap(a * s);
        if (f1 != 0.0) p = p + a * D * f1 * specfun::ei(-a * s);
        return swirl_state(q, gamma, f, p);
    }
    Reject reject(const Point4& pt) const {
        if (f1 != 0.0 && std::hypot(pt.x, pt.y) <= kRadiusFloor) return "r=0 singularity (f1 != 0)";
        return std::nullopt;
    }
};

struct BurgersLundgren {
    double gamma, f0, nu, a;

    BurgersLundgren(const ParamSet& p, double nu_) : gamma(p.get("gamma")), f0(p.get("f0")), nu(nu_) {
        if (!(gamma > 0.0)) throw ParamError("BurgersLundgren: gamma must be > 0");
        a = gamma / (4.0 * nu);
    }

    template <class S>
    S rate(const S& t) const {
        using std::expm1;
        return a / (-expm1(-gamma * t));
    }
    template <class S>
    S swirl(const S& s, const S& t) const {
        const S b = rate(t);
        return b * f0 * specfun::exprel_neg(b * s);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        const S &x = q[0], &y = q[1], &z = q[2];
        const S s = x * x + y * y;
        const S b = rate(q[3]);
        const S f = b * f0 * specfun::exprel_neg(b * s);
        const S p = -0.5 * gamma * gamma * (z * z + 0.25 * s) - 0.5 * s * f * f + b * f0 * f0 * specfun::ei_gap(b * s);
        return swirl_state(q, gamma, f, p);
    }
    Reject reject(const Point4& pt) const {
        if (pt.t <= 0.0) return "t <= 0: factor 1/(1 - exp(-gamma t))";
        return std::nullopt;
    }
};

struct SechVortex {
    double gamma, f0, nu, a;

    SechVortex(const ParamSet& p, double nu_) : gamma(p.get("gamma")), f0(p.get("f0")), nu(nu_) {
        if (!(gamma > 0.0)) throw ParamError("SechVortex: gamma must be > 0");
        a = gamma / (4.0 * nu);
    }

    template <class S>
    S amplitude(const S& t) const {
        using std::cosh;
        const S ch = cosh(0.5 * gamma * t);
        return 0.5 * f0 / (ch * ch);
    }
    template <class S>
    S decay(const S& t) const {
        using std::exp;
        return a / (1.0 + exp(-gamma * t));
    }
    template <class S>
    S swirl(const S& s, const S& t) const {
        using std::exp;
        return amplitude(t) * exp(-decay(t) * s);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        using std::exp;
        const S &x = q[0], &y = q[1], &z = q[2];
        const S s = x * x + y * y;
        const S A = amplitude(q[3]);
        const S B = decay(q[3]);
        const S e = exp(-B * s);
        const S p = -0.5 * gamma * gamma * (z * z + 0.25 * s) - A * A * e * e / (4.0 * B);
        return swirl_state(q, gamma, S(A * e), p);
    }
    Reject reject(const Point4& pt) const {
        if (-gamma * pt.t > 600.0) return "t too negative: exp(-gamma t) overflow";
        return std::nullopt;
    }
};

} // namespace nsvl::families
