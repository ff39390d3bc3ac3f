#pragma once

// Invariants of the characteristic system of a general symmetry generator,
//   dx/dtau = A x + r,  dt/dtau = 2 a t + d,  A = a I + K,
//   K = [[0, b, e], [-b, 0, c], [-e, -c, 0]],  r = (g0, h0, r0),
// their drift along integrated trajectories, calibration of the reference
// forms, and level-set meshes of individual invariants.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/grid.hpp"
#include "nsvl/core/jet.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl::surfaces {

struct CharConstants {
    double a = 0, b = 0, c = 0, d = 0, e = 0, g0 = 0, h0 = 0, r0 = 0, k0 = 0;

    [[nodiscard]] Vec3 r() const { return {g0, h0, r0}; }
    [[nodiscard]] bool r_zero() const { return g0 == 0.0 && h0 == 0.0 && r0 == 0.0; }
    // Rotation axis N with K v = v x N.
    [[nodiscard]] Vec3 axis() const { return {c, -e, b}; }
    [[nodiscard]] double omega() const { return std::sqrt(b * b + c * c + e * e); }
    [[nodiscard]] double chi() const { return std::sqrt(c * c + e * e); }
    [[nodiscard]] Mat3 K() const { return {{{0, b, e}, {-b, 0, c}, {-e, -c, 0}}}; }
    [[nodiscard]] Mat3 A() const { return {{{a, b, e}, {-b, a, c}, {-e, -c, a}}}; }
    [[nodiscard]] bool all_zero() const {
        return a == 0 && b == 0 && c == 0 && d == 0 && e == 0 && g0 == 0 && h0 == 0 && r0 == 0 && k0 == 0;
    }
};

enum class CaseId {
    GeneralI_r0,
    GeneralI_shifted,
    CaseII_r0,
    CaseII_shifted,
    I1,
    I2,
    I3,
    I4,
    II1,
    II2,
    II3,
    II4,
    VelocitySpace,
};

inline const char* to_string(CaseId c) {
    switch (c) {
    case CaseId::GeneralI_r0: return "GeneralI_r0";
    case CaseId::GeneralI_shifted: return "GeneralI_shifted";
    case CaseId::CaseII_r0: return "CaseII_r0";
    case CaseId::CaseII_shifted: return "CaseII_shifted";
    case CaseId::I1: return "I1";
    case CaseId::I2: return "I2";
    case CaseId::I3: return "I3";
    case CaseId::I4: return "I4";
    case CaseId::II1: return "II1";
    case CaseId::II2: return "II2";
    case CaseId::II3: return "II3";
    case CaseId::II4: return "II4";
    case CaseId::VelocitySpace: return "VelocitySpace";
    }
    return "?";
}

// Most specific case whose formulas apply to the zero pattern of k.
inline CaseId select_case(const CharConstants& k) {
    const bool a = k.a != 0, b = k.b != 0, c = k.c != 0, d = k.d != 0, e = k.e != 0;
    const bool rot = b || c || e;
    if (k.all_zero()) throw CaseError("all characteristic constants vanish");
    if (a) {
        if (!d) throw CaseError("a != 0 requires d != 0 (time map 2at + d)");
        return k.r_zero() ? CaseId::GeneralI_r0 : CaseId::GeneralI_shifted;
    }
    if (d) {
        if (!rot) {
            if (k.g0 == 0.0) throw CaseError("a = b = c = e = 0 with g0 = 0: no listed invariant set");
            return CaseId::I1;
        }
        if (!b && !e && k.g0 != 0.0) return CaseId::I2;
        if (!b && c && e && k.r_zero()) return CaseId::I3;
        if (b && c && e && k.r_zero()) return CaseId::I4;
        return k.r_zero() ? CaseId::CaseII_r0 : CaseId::CaseII_shifted;
    }
    if (!rot) {
        if (k.g0 == 0.0) throw CaseError("a = d = b = c = e = 0 with g0 = 0: no listed invariant set");
        return CaseId::II1;
    }
    if (b && !c && !e && k.r0 != 0.0) return CaseId::II2;
    if (!k.r_zero()) throw CaseError("a = d = 0 with a translation part: no listed invariant set for this pattern");
    if (b && c && !e) return CaseId::II3;
    if (b && c && e) return CaseId::II4;
    return CaseId::CaseII_r0;
}

using InvFn = std::function<Jet(const Vec4T<Jet>&)>;

struct Invariant {
    std::string name;
    std::string formula_id;
    std::string formula;
    InvFn fn;
    double period = 0.0;  // > 0 for arctan-type invariants defined modulo period

    [[nodiscard]] Jet jet(const Point4& p) const { return fn(seed_jets(p)); }
    [[nodiscard]] double value(const Point4& p) const { return fn({Jet(p.x), Jet(p.y), Jet(p.z), Jet(p.t)}).v; }
};

struct Cylinder {
    Vec3 point{};
    Vec3 direction{};
};

struct InvariantSet {
    CaseId case_id = CaseId::CaseII_r0;
    CaseId base_case = CaseId::CaseII_r0;  // differs from case_id only for VelocitySpace
    CharConstants k;                       // constants of the system the members are invariant under
    std::vector<Invariant> members;        // first three form the basis triple
    std::optional<Cylinder> cylinder;      // axis of the cylinder invariant, when present
    bool velocity_space = false;           // members read (u1, u2, u3, p) in the (x, y, z, t) slots

    [[nodiscard]] const Invariant& member(int which) const {
        if (which < 1 || which > static_cast<int>(members.size())) throw UsageError("invariant index out of range");
        return members[static_cast<std::size_t>(which - 1)];
    }
    [[nodiscard]] Vec3 eval(const Point4& p) const {
        return {members.at(0).value(p), members.at(1).value(p), members.at(2).value(p)};
    }
};

// e^{-K tau} = C I - (S/w) K + ((1 - C)/w^2) N N^T, entries as Jets.
template <class S>
std::array<std::array<S, 3>, 3> inverse_rotation(const CharConstants& k, const S& tau) {
    using std::cos;
    using std::sin;
    std::array<std::array<S, 3>, 3> m;
    const double w = k.omega();
    const Mat3 K = k.K();
    const Vec3 N = k.axis();
    if (w == 0.0) {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m[i][j] = S(i == j ? 1.0 : 0.0);
        return m;
    }
    const S C = cos(w * tau), Sn = sin(w * tau);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            m[i][j] = (i == j ? C : S(0.0)) - Sn * (K[i][j] / w) + (1.0 - C) * (N[i] * N[j] / (w * w));
    return m;
}

inline Mat3 rotation_exp(const CharConstants& k, double tau) {
    const auto m = inverse_rotation<double>(k, -tau);
    return {{{m[0][0], m[0][1], m[0][2]}, {m[1][0], m[1][1], m[1][2]}, {m[2][0], m[2][1], m[2][2]}}};
}

namespace detail {

using J = Jet;
using Q = Vec4T<Jet>;

inline J branch_factor(const CharConstants& k, const J& t) {
    const J q = 2.0 * k.a * t / k.d + 1.0;
    if (!(q.v > 0.0)) throw BranchError("2 a t/d + 1 <= 0: outside the logarithmic branch of the time map");
    return q;
}

// Orthonormal pair spanning the plane normal to the rotation axis.
inline std::pair<Vec3, Vec3> plane_basis(const CharConstants& k) {
    const double w = k.omega(), x = k.chi();
    if (x > 0.0) return {{k.e / x, k.c / x, 0.0}, {-k.b * k.c / (w * x), k.b * k.e / (w * x), x / w}};
    return {{1.0, 0.0, 0.0}, {0.0, k.b >= 0.0 ? 1.0 : -1.0, 0.0}};
}

inline J dot3(const Vec3& v, const Q& q) { return v[0] * q[0] + v[1] * q[1] + v[2] * q[2]; }
inline J norm2(const Q& q) { return q[0] * q[0] + q[1] * q[1] + q[2] * q[2]; }
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline Q shifted(const Q& q, const Vec3& s) { return {q[0] + s[0], q[1] + s[1], q[2] + s[2], q[3]}; }

// omega^2 |x|^2 - (N . x)^2, written in the expanded reference layout.
inline J quadric(const CharConstants& k, const Q& q) {
    const J &x = q[0], &y = q[1], &z = q[2];
    const J ecxy = k.e * x + k.c * y;
    return ecxy * ecxy + k.b * k.b * (x * x + y * y) + (k.c * k.c + k.e * k.e) * z * z +
           k.b * (-2.0 * k.c * x * z + 2.0 * k.e * y * z);
}

inline J plane(const CharConstants& k, const Q& q) { return k.c * q[0] - k.e * q[1] + k.b * q[2]; }

inline void general_members(InvariantSet& s, const CharConstants& k, const Vec3& shift) {
    static const char* names[3] = {"lambda", "mu", "nu"};
    for (std::size_t i = 0; i < 3; ++i) {
        s.members.push_back({names[i], std::string("general.rotating.") + names[i],
                             "component " + std::to_string(i + 1) + " of (2at/d + 1)^{-1/2} e^{-K tau} (x + A^{-1} r)",
                             [k, shift, i](const Q& q0) {
                                 using std::log;
                                 using std::sqrt;
                                 const Q q = shifted(q0, shift);
                                 const J bf = branch_factor(k, q[3]);
                                 const J tau = log(bf) / (2.0 * k.a);
                                 const auto m = inverse_rotation<J>(k, tau);
                                 return (m[i][0] * q[0] + m[i][1] * q[1] + m[i][2] * q[2]) / sqrt(bf);
                             }});
    }
    if (k.omega() == 0.0) return;
    s.members.push_back({"plane", "general.plane", "sqrt(d/(2at + d)) (c x - e y + b z)", [k, shift](const Q& q0) {
                             using std::sqrt;
                             const Q q = shifted(q0, shift);
                             return plane(k, q) / sqrt(branch_factor(k, q[3]));
                         }});
    s.members.push_back({"quadric", "general.quadric",
                         "(d/(2at + d)) ((ex + cy)^2 + b^2 (x^2 + y^2) + (c^2 + e^2) z^2 + 2b(ey - cx) z)",
                         [k, shift](const Q& q0) {
                             const Q q = shifted(q0, shift);
                             return quadric(k, q) / branch_factor(k, q[3]);
                         }});
    s.members.push_back({"ratio", "general.ratio", "quadric form / (c x - e y + b z)^2", [k, shift](const Q& q0) {
                             const Q q = shifted(q0, shift);
                             const J p = plane(k, q);
                             return quadric(k, q) / (p * p);
                         }});
}

} // namespace detail

// Solves A s = r; the shifted variable x + s removes the translation.
inline Vec3 general_shift(const CharConstants& k) {
    const Mat3 A = k.A();
    if (std::abs(la::det(A)) < 1e-300) throw SingularA("det A = 0: no shift removes the translation");
    return la::solve(A, k.r());
}

inline InvariantSet make_invariants(const CharConstants& k) {
    using detail::J;
    using detail::Q;
    const CaseId cid = select_case(k);
    InvariantSet s;
    s.case_id = s.base_case = cid;
    s.k = k;
    const double w = k.omega(), x = k.chi();
    const auto add = [&](std::string name, std::string id, std::string formula, InvFn fn, double period = 0.0) {
        s.members.push_back({std::move(name), std::move(id), std::move(formula), std::move(fn), period});
    };
    using std::atan;
    using std::cos;
    using std::sin;
    switch (cid) {
    case CaseId::GeneralI_r0: detail::general_members(s, k, {0, 0, 0}); break;
    case CaseId::GeneralI_shifted: detail::general_members(s, k, general_shift(k)); break;
    case CaseId::CaseII_r0: {
        const auto [p1, p2] = detail::plane_basis(k);
        add("lambda", "case2.plane", "c x - e y + b z", [k](const Q& q) { return detail::plane(k, q); });
        add("mu", "case2.sphere", "x^2 + y^2 + z^2", [](const Q& q) { return detail::norm2(q); });
        if (k.d != 0.0) {
            add("psi", "case2.phase", "omega t/d - arctan(omega (e x + c y)/(b(-c x + e y) + (c^2 + e^2) z))",
                [k, w, p1, p2](const Q& q) { return w * q[3] / k.d - atan(detail::dot3(p1, q) / detail::dot3(p2, q)); },
                std::numbers::pi);
        } else {
            add("psi", "case2.time", "t", [](const Q& q) { return q[3]; });
        }
        break;
    }
    case CaseId::CaseII_shifted: {
        const auto [p1, p2] = detail::plane_basis(k);
        const Vec3 r = k.r();
        const double o1 = la::dot(r, p2) / w, o2 = la::dot(r, p1) / w;
        const double nr = la::dot(k.axis(), r);
        add("lambda", "case2-shifted.plane", "c x - e y + b z - (t/d)(c g0 - e h0 + b r0)",
            [k, nr](const Q& q) { return detail::plane(k, q) - q[3] / k.d * nr; });
        add("mu", "case2-shifted.mu", "cos(omega t/d)(o1 - x.p1) + sin(omega t/d)(x.p2 + o2)",
            [k, w, p1, p2, o1, o2](const Q& q) {
                const J ph = w * q[3] / k.d;
                return cos(ph) * (o1 - detail::dot3(p1, q)) + sin(ph) * (detail::dot3(p2, q) + o2);
            });
        add("nu", "case2-shifted.cylinder", "(x.p1 - o1)^2 + (x.p2 + o2)^2", [p1, p2, o1, o2](const Q& q) {
            const J u = detail::dot3(p1, q) - o1, v = detail::dot3(p2, q) + o2;
            return u * u + v * v;
        });
        s.cylinder = Cylinder{la::sub(la::scale(p1, o1), la::scale(p2, o2)), la::scale(k.axis(), 1.0 / w)};
        break;
    }
    case CaseId::I1:
        add("lambda", "I1.lambda", "t - (d/g0) x", [k](const Q& q) { return q[3] - k.d / k.g0 * q[0]; });
        add("chi", "I1.chi", "y - (h0/g0) x", [k](const Q& q) { return q[1] - k.h0 / k.g0 * q[0]; });
        add("psi", "I1.psi", "z - (r0/g0) x", [k](const Q& q) { return q[2] - k.r0 / k.g0 * q[0]; });
        break;
    case CaseId::I2:
        add("lambda", "I2.lambda", "t - (d/g0) x", [k](const Q& q) { return q[3] - k.d / k.g0 * q[0]; });
        add("chi", "I2.chi", "((h0 + c z)/c) cos(c x/g0) + ((c y - r0)/c) sin(c x/g0)", [k](const Q& q) {
            const J ph = k.c * q[0] / k.g0;
            return (k.h0 + k.c * q[2]) / k.c * cos(ph) + (k.c * q[1] - k.r0) / k.c * sin(ph);
        });
        add("psi", "I2.psi", "((c y - r0)/c) cos(c x/g0) - ((h0 + c z)/c) sin(c x/g0)", [k](const Q& q) {
            const J ph = k.c * q[0] / k.g0;
            return (k.c * q[1] - k.r0) / k.c * cos(ph) - (k.h0 + k.c * q[2]) / k.c * sin(ph);
        });
        break;
    case CaseId::I3:
        add("lambda", "I3.lambda", "-(c/e) x + y", [k](const Q& q) { return -k.c / k.e * q[0] + q[1]; });
        add("chi", "I3.chi", "x^2 + y^2 + z^2", [](const Q& q) { return detail::norm2(q); });
        add("psi", "I3.psi", "t + (d/sqrt(c^2 + e^2)) arctan(z sqrt(c^2 + e^2)/(e x + c y))",
            [k, x](const Q& q) { return q[3] + k.d / x * atan(q[2] * x / (k.e * q[0] + k.c * q[1])); },
            std::abs(k.d) * std::numbers::pi / x);
        break;
    case CaseId::I4:
        add("lambda", "I4.lambda", "(c x - e y)/b + z", [k](const Q& q) { return (k.c * q[0] - k.e * q[1]) / k.b + q[2]; });
        add("chi", "I4.chi", "x^2 + y^2 + z^2", [](const Q& q) { return detail::norm2(q); });
        add("psi", "I4.psi", "t - (d/omega) arctan((b^2 x + e(e x + c y) - b c z)/(omega (b y + e z)))",
            [k, w](const Q& q) {
                const J num = k.b * k.b * q[0] + k.e * (k.e * q[0] + k.c * q[1]) - k.b * k.c * q[2];
                return q[3] - k.d / w * atan(num / (w * (k.b * q[1] + k.e * q[2])));
            },
            std::abs(k.d) * std::numbers::pi / w);
        break;
    case CaseId::II1:
        add("lambda", "II1.lambda", "t", [](const Q& q) { return q[3]; });
        add("chi", "II1.chi", "y - (h0/g0) x", [k](const Q& q) { return q[1] - k.h0 / k.g0 * q[0]; });
        add("psi", "II1.psi", "z - (r0/g0) x", [k](const Q& q) { return q[2] - k.r0 / k.g0 * q[0]; });
        break;
    case CaseId::II2:
        add("lambda", "II2.lambda", "t", [](const Q& q) { return q[3]; });
        add("chi", "II2.chi", "(x - h0/b) cos(b z/r0) - (y + g0/b) sin(b z/r0)", [k](const Q& q) {
            const J ph = k.b * q[2] / k.r0;
            return (q[0] - k.h0 / k.b) * cos(ph) - (q[1] + k.g0 / k.b) * sin(ph);
        });
        add("psi", "II2.psi", "(x - h0/b) sin(b z/r0) + (y + g0/b) cos(b z/r0)", [k](const Q& q) {
            const J ph = k.b * q[2] / k.r0;
            return (q[0] - k.h0 / k.b) * sin(ph) + (q[1] + k.g0 / k.b) * cos(ph);
        });
        break;
    case CaseId::II3:
        add("lambda", "II3.lambda", "t", [](const Q& q) { return q[3]; });
        add("chi", "II3.chi", "z + (c/b) x", [k](const Q& q) { return q[2] + k.c / k.b * q[0]; });
        add("psi", "II3.psi", "x^2 + y^2 + z^2", [](const Q& q) { return detail::norm2(q); });
        break;
    case CaseId::II4:
        add("lambda", "II4.lambda", "t", [](const Q& q) { return q[3]; });
        add("chi", "II4.chi", "c x - e y + b z", [k](const Q& q) { return detail::plane(k, q); });
        add("psi", "II4.psi", "x^2 + y^2 + z^2", [](const Q& q) { return detail::norm2(q); });
        break;
    case CaseId::VelocitySpace: break;
    }
    return s;
}

// Invariants in (u1, u2, u3, p): the velocity part of the generator obeys
// du/dtau = (-a I + K) u, dp/dtau = -2 a p + k0, i.e. the coordinate system
// with a -> -a, d -> k0 and no translation.
inline CharConstants velocity_constants(const CharConstants& k) {
    CharConstants v = k;
    v.a = -k.a;
    v.d = k.k0;
    v.g0 = v.h0 = v.r0 = 0.0;
    v.k0 = 0.0;
    return v;
}

inline InvariantSet velocity_space_invariants(const InvariantSet& inv) {
    if (inv.velocity_space) throw UsageError("invariant set is already in velocity space");
    InvariantSet v = make_invariants(velocity_constants(inv.k));
    v.base_case = v.case_id;
    v.case_id = CaseId::VelocitySpace;
    v.velocity_space = true;
    return v;
}

inline InvariantSet velocity_space_invariants(const CharConstants& k) {
    InvariantSet coord;
    coord.k = k;
    return velocity_space_invariants(coord);
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryState {
    double tau = 0.0;
    Vec3 xvec{};
    double t = 0.0;
};

// Physical time along the flow started at t0 (closed form of dt/dtau = 2at + d).
inline double time_along(const CharConstants& k, double t0, double tau) {
    if (k.a == 0.0) return t0 + k.d * tau;
    return (t0 + k.d / (2.0 * k.a)) * std::exp(2.0 * k.a * tau) - k.d / (2.0 * k.a);
}

inline std::vector<TrajectoryState> flow_trajectory(const CharConstants& k, const Vec3& x0, double tau_span, int steps,
                                                    double t0 = 0.0) {
    if (steps < 8) throw UsageError("flow_trajectory: steps must be >= 8");
    const Mat3 A = k.A();
    const Vec3 r = k.r();
    const auto rhs = [&](const Vec3& x) { return la::add(la::mul(A, x), r); };
    const double h = tau_span / steps;
    std::vector<TrajectoryState> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    Vec3 x = x0;
    out.push_back({0.0, x, t0});
    for (int n = 0; n < steps; ++n) {
        const Vec3 k1 = rhs(x);
        const Vec3 k2 = rhs(la::add(x, la::scale(k1, 0.5 * h)));
        const Vec3 k3 = rhs(la::add(x, la::scale(k2, 0.5 * h)));
        const Vec3 k4 = rhs(la::add(x, la::scale(k3, h)));
        for (std::size_t i = 0; i < 3; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        const double tau = h * (n + 1);
        out.push_back({tau, x, time_along(k, t0, tau)});
    }
    return out;
}

// x(tau) = e^{A tau}(x0 - xP) + xP with xP = -A^{-1} r.
inline Vec3 closed_form_position(const CharConstants& k, const Vec3& x0, double tau) {
    Vec3 xp{};
    if (!k.r_zero()) xp = la::scale(general_shift(k), -1.0);
    const Mat3 R = rotation_exp(k, tau);
    return la::add(la::scale(la::mul(R, la::sub(x0, xp)), std::exp(k.a * tau)), xp);
}

struct DriftOptions {
    int n_traj = 20;
    double tau_span = 5.0;
    int steps = 4000;
    std::uint64_t seed = 7;
    double box = 1.0;  // starting points in [-box, box]^3
};

struct MemberDrift {
    std::string name;
    std::string formula_id;
    double max_drift = 0.0;
    bool unwrapped = false;
};

struct InvarianceReport {
    CaseId case_id{};
    std::vector<MemberDrift> members;
    int trajectories = 0;
    [[nodiscard]] double max_drift(std::size_t count = 3) const {
        double m = 0.0;
        for (std::size_t i = 0; i < std::min(count, members.size()); ++i) m = std::max(m, members[i].max_drift);
        return m;
    }
};

namespace detail {

struct Start {
    Vec3 x;
    double t;
};

inline std::vector<Start> random_starts(const CharConstants& k, const DriftOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-opt.box, opt.box), ut(0.0, 1.0);
    std::vector<Start> out;
    for (int i = 0; i < opt.n_traj; ++i) {
        Start s{{u(rng), u(rng), u(rng)}, ut(rng)};
        if (k.a != 0.0 && !(2.0 * k.a * s.t / k.d + 1.0 > 0.0)) s.t = 0.0;
        out.push_back(s);
    }
    return out;
}

// Max |f(tau) - f(0)| along each trajectory, with arctan-type values
// unwrapped modulo `period`.
inline double drift_of(const std::function<double(const Point4&)>& f, double period, const CharConstants& k,
                       const std::vector<Start>& starts, const DriftOptions& opt) {
    double worst = 0.0;
    for (const auto& s : starts) {
        const auto traj = flow_trajectory(k, s.x, opt.tau_span, opt.steps, s.t);
        double first = 0.0, prev = 0.0, offset = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const auto& st = traj[i];
            double v = f({st.xvec[0], st.xvec[1], st.xvec[2], st.t});
            if (period > 0.0 && i > 0) {
                v += offset;
                const double jump = std::round((prev - v) / period) * period;
                v += jump;
                offset += jump;
            }
            if (i == 0) first = v;
            prev = v;
            worst = std::max(worst, std::abs(v - first));
        }
    }
    return worst;
}

} // namespace detail

inline InvarianceReport verify_invariance(const InvariantSet& inv, const DriftOptions& opt = {}) {
    InvarianceReport rep;
    rep.case_id = inv.case_id;
    rep.trajectories = opt.n_traj;
    const auto starts = detail::random_starts(inv.k, opt);
    for (const auto& m : inv.members) {
        const auto f = [&m](const Point4& p) { return m.value(p); };
        rep.members.push_back({m.name, m.formula_id, detail::drift_of(f, m.period, inv.k, starts, opt), m.period > 0.0});
    }
    return rep;
}

// Drift of `inv` along the flow of `k`, which must fall in the same case.
inline InvarianceReport verify_invariance(const InvariantSet& inv, const CharConstants& k, const DriftOptions& opt = {}) {
    if (select_case(k) != inv.base_case)
        throw CaseError(std::string("constants select ") + to_string(select_case(k)) + ", invariant set is " +
                        to_string(inv.base_case));
    InvariantSet moved = inv;
    moved.k = k;
    return verify_invariance(moved, opt);
}

// Largest 3x3 minor of the 3x4 gradient matrix of the basis triple,
// normalised by the product of the row norms: 0 for dependent invariants.
inline double independence_measure(const InvariantSet& inv, const Point4& p) {
    std::array<std::array<double, 4>, 3> g{};
    std::array<double, 3> norms{};
    for (std::size_t i = 0; i < 3; ++i) {
        const Jet j = inv.members.at(i).jet(p);
        double n2 = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            g[i][c] = j.d[c];
            n2 += j.d[c] * j.d[c];
        }
        norms[i] = std::sqrt(n2);
    }
    double best = 0.0;
    for (std::size_t skip = 0; skip < 4; ++skip) {
        Mat3 m{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t c = 0, col = 0; c < 4; ++c)
                if (c != skip) m[i][col++] = g[i][c];
        best = std::max(best, std::abs(la::det(m)));
    }
    const double scale = norms[0] * norms[1] * norms[2];
    return scale > 0.0 ? best / scale : 0.0;
}

// ---------------------------------------------------------------------------
// Calibration of the reference forms

struct CalibrationEntry {
    std::string case_name;
    std::string formula_id;
    std::string reference_form;
    double reference_drift = 0.0;   // drift (or mismatch) of the form as printed
    std::string calibrated_form;
    double calibrated_drift = 0.0;  // drift of the calibrated form
    std::string finding;
};

inline CharConstants calibration_constants() { return {0.3, 0.5, -0.4, 1.2, 0.7, 0.4, -0.3, 0.6, 0.8}; }

inline std::vector<CalibrationEntry> calibration_audit(const DriftOptions& opt_in = {}) {
    using Fn = std::function<double(const Point4&)>;
    DriftOptions opt = opt_in;
    std::vector<CalibrationEntry> out;
    const CharConstants base = calibration_constants();
    const auto drift = [&](const CharConstants& k, const Fn& f, double period = 0.0) {
        return detail::drift_of(f, period, k, detail::random_starts(k, opt), opt);
    };
    const auto fmt = detail::num;

    // General case, translation removed.
    CharConstants g = base;
    g.g0 = g.h0 = g.r0 = 0.0;
    const double a = g.a, b = g.b, c = g.c, d = g.d, e = g.e, w = g.omega(), x = g.chi();
    const auto rot_coeffs = [=](double t, bool printed_mu) {
        const double tau = std::log(2 * a * t / d + 1) / (2 * a), C = std::cos(w * tau), S = std::sin(w * tau);
        std::array<Vec3, 3> m;
        m[0] = {(c * c + (b * b + e * e) * C) / (w * w), c * e / (w * w) * (C - 1) - b / w * S,
                -b * c / (w * w) * (C - 1) - e / w * S};
        m[1] = {c * e / (w * w) * (C - 1) + b / w * S,
                (printed_mu ? c * c + (b * b + e * e) * C : e * e + (b * b + c * c) * C) / (w * w),
                b * e / (w * w) * (C - 1) - c / w * S};
        m[2] = {-b * c / (w * w) * (C - 1) + e / w * S, b * e / (w * w) * (C - 1) + c / w * S,
                (b * b + (c * c + e * e) * C) / (w * w)};
        return m;
    };
    const auto rot_member = [=](std::size_t i, bool printed) {
        return Fn([=](const Point4& p) {
            const auto m = rot_coeffs(p.t, printed);
            return (m[i][0] * p.x + m[i][1] * p.y + m[i][2] * p.z) / std::sqrt(2 * a * p.t / d + 1);
        });
    };
    {
        const char* names[3] = {"lambda", "mu", "nu"};
        for (std::size_t i = 0; i < 3; ++i) {
            CalibrationEntry en;
            en.case_name = "GeneralI_r0";
            en.formula_id = std::string("general.rotating.") + names[i];
            en.reference_form = "(2at/d + 1)^{-1/2} times the printed row " + std::to_string(i + 1) + " of e^{-K tau}";
            en.reference_drift = drift(g, rot_member(i, true));
            en.calibrated_form = i == 1 ? "y coefficient e^2 + (b^2 + c^2) cos(omega tau) in place of c^2 + (b^2 + e^2) cos(omega tau)"
                                        : "as printed";
            en.calibrated_drift = drift(g, rot_member(i, false));
            en.finding = i == 1 ? "printed y coefficient is not invariant; the corrected row is" : "printed form is invariant";
            out.push_back(en);
        }
    }
    {
        const auto Qf = [=](const Point4& p) {
            const double ec = e * p.x + c * p.y;
            return ec * ec + b * b * (p.x * p.x + p.y * p.y) + (c * c + e * e) * p.z * p.z +
                   b * (-2 * c * p.x * p.z + 2 * e * p.y * p.z);
        };
        double best_p = 0.0, best = std::numeric_limits<double>::infinity(), half = 0.0;
        std::string scan;
        for (double pw : {0.5, 1.0, 1.5, 2.0}) {
            const double dr = drift(g, [=](const Point4& p) { return std::pow(d / (2 * a * p.t + d), pw) * Qf(p); });
            if (pw == 0.5) half = dr;
            scan += (scan.empty() ? "" : ", ") + fmt(pw) + ": " + fmt(dr);
            if (dr < best) {
                best = dr;
                best_p = pw;
            }
        }
        out.push_back({"GeneralI_r0", "general.quadric", "sqrt(d/(2at + d)) x quadric form", half,
                       "(d/(2at + d))^" + fmt(best_p) + " x quadric form", best,
                       "calibrated exponent " + fmt(best_p) + " (drift by exponent: " + scan + ")"});
        const double dp = drift(g, [=](const Point4& p) {
            return std::sqrt(d / (2 * a * p.t + d)) * (c * p.x - e * p.y + b * p.z);
        });
        out.push_back({"GeneralI_r0", "general.plane", "sqrt(d/(2at + d)) (c x - e y + b z)", dp, "as printed", dp,
                       "printed form is invariant"});
        const double dq = drift(g, [=](const Point4& p) {
            const double l = c * p.x - e * p.y + b * p.z;
            return Qf(p) / (l * l);
        });
        out.push_back({"GeneralI_r0", "general.ratio", "quadric form / (c x - e y + b z)^2", dq, "as printed", dq,
                       "printed form is invariant"});
    }
    {
        // Translation shift: printed closed form against A^{-1} r.
        const CharConstants k = base;
        const double g0 = k.g0, h0 = k.h0, r0 = k.r0, W = k.a * (k.a * k.a + w * w);
        const Vec3 printed{(a * a * g0 + c * (c * g0 - e * h0 + b * r0) - a * (b * h0 + e * r0)) / W,
                           (a * b * g0 - c * e * g0 + (a * a + e * e) * h0 - (a * c + b * e) * r0) / W,
                           (b * c * g0 + a * e * g0 + (a * c - b * e) * h0 + (a * a + b * b) * r0) / W};
        const Vec3 s = general_shift(k);
        const double mismatch = la::norm(la::sub(printed, s));
        const InvariantSet inv = make_invariants(k);
        const auto rep = verify_invariance(inv, opt);
        out.push_back({"GeneralI_shifted", "general.shift", "x -> x + (printed shift vector)", mismatch,
                       "x -> x + A^{-1} r", rep.max_drift(),
                       "printed shift equals A^{-1} r (mismatch " + fmt(mismatch) + "); shifted invariants drift " +
                           fmt(rep.max_drift())});
    }

    // Case II: a = 0.
    CharConstants k2 = g;
    k2.a = 0.0;
    {
        double best = std::numeric_limits<double>::infinity(), printed = 0.0;
        std::string best_form, scan;
        for (double pref : {std::numbers::pi, 1.0})
            for (double sc : {1.0, w}) {
                const double dr = drift(
                    k2,
                    [=](const Point4& p) {
                        return w * p.t / d - pref * std::atan(sc * (e * p.x + c * p.y) / (b * (-c * p.x + e * p.y) + x * x * p.z));
                    },
                    pref * std::numbers::pi);
                const std::string form = "omega t/d - " + std::string(pref == 1.0 ? "" : "pi ") + "arctan(" +
                                         (sc == 1.0 ? "" : "omega ") + "(e x + c y)/(b(-c x + e y) + (c^2 + e^2) z))";
                if (pref != 1.0 && sc == 1.0) printed = dr;
                scan += (scan.empty() ? "" : "; ") + form + ": " + fmt(dr);
                if (dr < best) {
                    best = dr;
                    best_form = form;
                }
            }
        out.push_back({"CaseII_r0", "case2.phase", "omega t/d - pi arctan((e x + c y)/(b(-c x + e y) + (c^2 + e^2) z))",
                       printed, best_form, best, "prefactor and argument calibrated by drift (" + scan + ")"});
    }
    CharConstants ks = base;
    ks.a = 0.0;
    {
        const double g0 = ks.g0, h0 = ks.h0, r0 = ks.r0;
        const double dm = drift(ks, [=](const Point4& p) {
            const double C = std::cos(w * p.t / d), S = std::sin(w * p.t / d);
            return C / x * (-b * c / (w * w) * g0 + b * e / (w * w) * h0 + x * x / (w * w) * r0 - e * p.x - c * p.y) +
                   S / x * (e / w * g0 + c / w * h0 - b * c / w * p.x + b * e / w * p.y + x * x / w * p.z);
        });
        out.push_back({"CaseII_shifted", "case2-shifted.mu", "printed cos/sin combination with 1/sqrt(c^2 + e^2)", dm,
                       "as printed (chi = sqrt(c^2 + e^2))", dm, "printed form is invariant"});
        const auto nu_form = [=](double sign) {
            return Fn([=](const Point4& p) {
                const double u = e / x * p.x + c / x * p.y + sign * (b * c * g0 - b * e * h0 - x * x * r0) / (w * w * x);
                const double v = -b * c / (w * x) * p.x + b * e / (w * x) * p.y + x / w * p.z + (e * g0 + c * h0) / (w * x);
                return u * u + v * v;
            });
        };
        out.push_back({"CaseII_shifted", "case2-shifted.nu",
                       "(e x/chi + c y/chi - (b c g0 - b e h0 - chi^2 r0)/(omega^2 chi))^2 + (...)^2",
                       drift(ks, nu_form(-1.0)), "(e x/chi + c y/chi + (b c g0 - b e h0 - chi^2 r0)/(omega^2 chi))^2 + (...)^2",
                       drift(ks, nu_form(1.0)), "sign of the first offset flipped"});
        // Cylinder axis and radius.
        const InvariantSet inv = make_invariants(ks);
        const Vec3 P{(2 * b * c * e * g0 + b * (c * c - e * e) * h0 - e * x * x * r0) / (w * w * x * x),
                     (g0 * b * (c * c - e * e) - 2 * b * c * e * h0 - c * r0 * x * x) / (w * w * x * x),
                     -(e * g0 + c * h0) / (w * w)};
        const Vec3 n = inv.cylinder->direction;
        const auto dist2 = [&](const Vec3& q) {
            const Vec3 v = la::sub(q, inv.cylinder->point);
            return la::dot(v, v) - std::pow(la::dot(v, n), 2);
        };
        // The axis is the fixed line of the flow: K x + r_perp = 0.
        const Vec3 rperp = la::sub(ks.r(), la::scale(n, la::dot(n, ks.r())));
        const Vec3 flow_at_axis = la::add(la::mul(ks.K(), inv.cylinder->point), rperp);
        out.push_back({"CaseII_shifted", "case2-shifted.axis", "axis through the printed point, radius |lambda|",
                       std::sqrt(std::max(0.0, dist2(P))), "axis through o1 p1 - o2 p2 (K x = -r_perp), radius sqrt(nu)",
                       la::norm(flow_at_axis),
                       "printed point lies " + fmt(std::sqrt(std::max(0.0, dist2(P)))) +
                           " from the axis; radius is sqrt(nu), not |lambda|"});
    }
    // Subcases with arctan invariants.
    for (CharConstants k : {CharConstants{0, 0, -0.4, 1.2, 0.7}, CharConstants{0, 0.5, -0.4, 1.2, 0.7}}) {
        const InvariantSet inv = make_invariants(k);
        const auto rep = verify_invariance(inv, opt);
        const auto& m = inv.members[2];
        out.push_back({to_string(inv.case_id), m.formula_id, m.formula, rep.members[2].max_drift, "as printed (unwrapped)",
                       rep.members[2].max_drift, "unwrapping period " + fmt(m.period)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Level-set meshes

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    double cell = 0.0;  // largest lattice spacing
    double level = 0.0;
};

inline GridSpec mesh_grid(double half_width, int count = 65, double t = 0.0) {
    GridSpec g;
    g.x = {-half_width, half_width, count};
    g.y = {-half_width, half_width, count};
    g.z = {-half_width, half_width, count};
    g.times = {t};
    return g;
}

// Marching tetrahedra (six per lattice cube around the main diagonal); each
// vertex is snapped by one Newton step along the invariant gradient.
inline Mesh surface_mesh(const InvariantSet& inv, int which, double level, const GridSpec& grid) {
    grid.validate();
    if (grid.cylindrical) throw UsageError("surface_mesh needs a Cartesian lattice");
    const Invariant& f = inv.member(which);
    const int nx = grid.x.count, ny = grid.y.count, nz = grid.z.count;
    if (nx < 2 || ny < 2 || nz < 2) throw UsageError("surface_mesh needs at least 2 nodes per axis");
    const double t = grid.times.front();
    const auto idx = [&](int i, int j, int k) {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
    };
    const auto pos = [&](int i, int j, int k) { return Vec3{grid.x.at(i), grid.y.at(j), grid.z.at(k)}; };
    std::vector<double> val(static_cast<std::size_t>(nx) * ny * nz);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Vec3 p = pos(i, j, k);
                double v;
                try {
                    v = f.value({p[0], p[1], p[2], t});
                } catch (const BranchError&) {
                    v = std::numeric_limits<double>::quiet_NaN();
                }
                val[idx(i, j, k)] = v;
            }

    Mesh mesh;
    mesh.level = level;
    mesh.cell = std::max({(grid.x.max - grid.x.min) / (nx - 1), (grid.y.max - grid.y.min) / (ny - 1),
                          (grid.z.max - grid.z.min) / (nz - 1)});
    std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
    const std::uint64_t total = val.size();

    const auto vertex_on_edge = [&](std::size_t na, std::size_t nb, const Vec3& pa, const Vec3& pb) {
        const std::uint64_t key = std::min(na, nb) * total + std::max(na, nb);
        if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
        const double va = val[na], vb = val[nb];
        const double s = (level - va) / (vb - va);
        Vec3 p = la::add(pa, la::scale(la::sub(pb, pa), s));
        const Jet j = f.fn({Jet::variable(p[0], 0), Jet::variable(p[1], 1), Jet::variable(p[2], 2), Jet(t)});
        const double g2 = j.d[0] * j.d[0] + j.d[1] * j.d[1] + j.d[2] * j.d[2];
        if (g2 > 0.0 && std::isfinite(j.v)) {
            const double step = (j.v - level) / g2;
            const Vec3 snapped{p[0] - step * j.d[0], p[1] - step * j.d[1], p[2] - step * j.d[2]};
            if (la::norm(la::sub(snapped, p)) <= mesh.cell) p = snapped;
        }
        const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        edge_vertex.emplace(key, id);
        return id;
    };

    static constexpr int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                         {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    static constexpr int tets[6][4] = {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                                       {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};
    for (int k = 0; k + 1 < nz; ++k)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i)
                for (const auto& tet : tets) {
                    std::size_t node[4];
                    Vec3 p[4];
                    double v[4];
                    bool ok = true;
                    for (int m = 0; m < 4; ++m) {
                        const int* c = corner[tet[m]];
                        node[m] = idx(i + c[0], j + c[1], k + c[2]);
                        p[m] = pos(i + c[0], j + c[1], k + c[2]);
                        v[m] = val[node[m]];
                        ok = ok && std::isfinite(v[m]);
                    }
                    if (!ok) continue;
                    if (f.period > 0.0) {
                        const auto [lo, hi] = std::minmax({v[0], v[1], v[2], v[3]});
                        if (hi - lo > 0.5 * f.period) continue;  // branch jump, not a level crossing
                    }
                    int in[4], out[4], ni = 0, no = 0;
                    for (int m = 0; m < 4; ++m) (v[m] < level ? in[ni++] : out[no++]) = m;
                    if (ni == 0 || no == 0) continue;
                    const auto ev = [&](int a, int b) { return vertex_on_edge(node[a], node[b], p[a], p[b]); };
                    Vec3 grow{};
                    for (int m = 0; m < no; ++m) grow = la::add(grow, la::scale(p[out[m]], 1.0 / no));
                    for (int m = 0; m < ni; ++m) grow = la::sub(grow, la::scale(p[in[m]], 1.0 / ni));
                    const auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
                        if (a == b || b == c || a == c) return;
                        const Vec3 nrm = la::cross(la::sub(mesh.vertices[b], mesh.vertices[a]),
                                                   la::sub(mesh.vertices[c], mesh.vertices[a]));
                        if (la::dot(nrm, grow) < 0.0) std::swap(b, c);
                        mesh.triangles.push_back({a, b, c});
                    };
                    if (ni == 1 || no == 1) {
                        const int lone = ni == 1 ? in[0] : out[0];
                        const int* others = ni == 1 ? out : in;
                        emit(ev(lone, others[0]), ev(lone, others[1]), ev(lone, others[2]));
                    } else {
                        const std::uint32_t ac = ev(in[0], out[0]), ad = ev(in[0], out[1]), bd = ev(in[1], out[1]),
                                            bc = ev(in[1], out[0]);
                        emit(ac, ad, bd);
                        emit(ac, bd, bc);
                    }
                }
    if (mesh.triangles.empty()) throw EmptyLevelSet("level " + detail::num(level) + " is not attained on the lattice");
    return mesh;
}

} // namespace nsvl::surfaces
