#pragma once

// Anything that maps a spacetime point to (u, p) for both double and Jet
// scalars can be differentiated, verified and diagnosed. FlowField,
// pushforwards and test fixtures all satisfy this.

#include <cmath>
#include <concepts>
#include <optional>
#include <string>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl {

template <class F>
concept FieldEvaluator = requires(const F& f, const Vec4T<double>& qd, const Vec4T<Jet>& qj, const Point4& p) {
    { f.template eval<double>(qd) } -> std::same_as<StateT<double>>;
    { f.template eval<Jet>(qj) } -> std::same_as<StateT<Jet>>;
    { f.reject(p) } -> std::same_as<std::optional<std::string>>;
    { f.nu() } -> std::convertible_to<double>;
    { f.rate() } -> std::convertible_to<double>;
};

enum class DiffMode { Analytic, FiniteDiff };

inline const char* to_string(DiffMode m) { return m == DiffMode::Analytic ? "Analytic" : "FiniteDiff"; }

// Relative step scales of the central-difference stencils.
struct FdSteps {
    double first = 1e-4;   // 4th-order first derivatives
    double second = 1e-3;  // 4th-order second derivatives
};

namespace detail {

inline FlowJet jet_from_state(const StateT<Jet>& s) {
    FlowJet j;
    for (std::size_t i = 0; i < 3; ++i) {
        j.state.u[i] = s.u[i].v;
        for (std::size_t k = 0; k < 3; ++k) {
            j.du[i][k] = s.u[i].d[k];
            j.d2u[i][k] = s.u[i].dd[k];
        }
        j.dudt[i] = s.u[i].d[3];
        j.dp[i] = s.p.d[i];
    }
    j.state.p = s.p.v;
    return j;
}

// Step whose addition to c is exact, so (c+h) - (c-h) == 2h.
inline double exact_step(double c, double h) {
    volatile double t = c + h;
    return t - c;
}

template <FieldEvaluator F>
StateT<double> eval_checked(const F& f, const Vec4T<double>& q) {
    if (auto why = f.reject(Point4::from_array(q))) throw DomainError("stencil point rejected: " + *why);
    return f.template eval<double>(q);
}

template <FieldEvaluator F>
FlowJet finite_difference_jet(const F& f, const Point4& pt, const FdSteps& steps) {
    const Vec4T<double> c = pt.as_array();
    FlowJet j;
    const StateT<double> centre = f.template eval<double>(c);
    j.state = centre;
    for (std::size_t k = 0; k < 4; ++k) {
        const double h = exact_step(c[k], steps.first * (1.0 + std::abs(c[k])));
        StateT<double> s[4];
        const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
        for (int m = 0; m < 4; ++m) {
            Vec4T<double> q = c;
            q[k] += offs[m] * h;
            s[m] = eval_checked(f, q);
        }
        const auto d1 = [&](double a0, double a1, double a2, double a3) {
            return (a0 - 8.0 * a1 + 8.0 * a2 - a3) / (12.0 * h);
        };
        for (std::size_t i = 0; i < 3; ++i) {
            const double v = d1(s[0].u[i], s[1].u[i], s[2].u[i], s[3].u[i]);
            if (k < 3) j.du[i][k] = v;
            else j.dudt[i] = v;
        }
        if (k < 3) j.dp[k] = d1(s[0].p, s[1].p, s[2].p, s[3].p);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const double h = exact_step(c[k], steps.second * (1.0 + std::abs(c[k])));
        StateT<double> s[4];
        const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
        for (int m = 0; m < 4; ++m) {
            Vec4T<double> q = c;
            q[k] += offs[m] * h;
            s[m] = eval_checked(f, q);
        }
        for (std::size_t i = 0; i < 3; ++i)
            j.d2u[i][k] =
                (-s[0].u[i] + 16.0 * s[1].u[i] - 30.0 * centre.u[i] + 16.0 * s[2].u[i] - s[3].u[i]) / (12.0 * h * h);
    }
    return j;
}

} // namespace detail

template <FieldEvaluator F>
FlowJet eval_jet(const F& f, const Point4& pt, DiffMode mode = DiffMode::Analytic, const FdSteps& steps = {}) {
    if (auto why = f.reject(pt)) throw DomainError(*why);
    if (mode == DiffMode::Analytic) return detail::jet_from_state(f.template eval<Jet>(seed_jets(pt)));
    return detail::finite_difference_jet(f, pt, steps);
}

} // namespace nsvl
