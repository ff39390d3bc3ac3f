#pragma once

// Small hand-made evaluators: a zero flow, a rigid rotation, and a wrapper
// that corrupts one velocity component of another evaluator.

#include <cmath>
#include <optional>
#include <string>

#include "nsvl/core/evaluator.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl::fixtures {

struct ZeroField {
    double pressure = 0.0;
    double viscosity = 1.0;

    template <class S>
    StateT<S> eval(const Vec4T<S>&) const {
        StateT<S> st;
        st.u = {S(0.0), S(0.0), S(0.0)};
        st.p = pressure;
        return st;
    }
    std::optional<std::string> reject(const Point4&) const { return std::nullopt; }
    double nu() const { return viscosity; }
    double rate() const { return 1.0; }
};

// u = (-W y, W x, 0), p = W^2 (x^2 + y^2)/2: an exact solution with zero strain.
struct RigidRotation {
    double spin = 1.0;
    double viscosity = 1.0;

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        StateT<S> st;
        st.u[0] = -spin * q[1];
        st.u[1] = spin * q[0];
        st.u[2] = S(0.0);
        st.p = 0.5 * spin * spin * (q[0] * q[0] + q[1] * q[1]);
        return st;
    }
    std::optional<std::string> reject(const Point4&) const { return std::nullopt; }
    double nu() const { return viscosity; }
    double rate() const { return spin != 0.0 ? std::abs(spin) : 1.0; }
};

template <FieldEvaluator F>
struct ScaledComponent {
    F base;
    int component = 2;
    double factor = 1.1;

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        StateT<S> st = base.template eval<S>(q);
        st.u[static_cast<std::size_t>(component)] = factor * st.u[static_cast<std::size_t>(component)];
        return st;
    }
    std::optional<std::string> reject(const Point4& p) const { return base.reject(p); }
    double nu() const { return base.nu(); }
    double rate() const { return base.rate(); }
};

} // namespace nsvl::fixtures
