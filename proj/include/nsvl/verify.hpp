#pragma once

// Navier-Stokes residual sweeps, checks of the reduced profile equations the
// closed forms are built from, and an audit of reference vorticity formulas
// against the curl of the implemented velocity.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nsvl/catalog.hpp"
#include "nsvl/core/errors.hpp"
#include "nsvl/core/evaluator.hpp"
#include "nsvl/core/grid.hpp"
#include "nsvl/kinematics.hpp"
#include "nsvl/specfun.hpp"

namespace nsvl {

// Deterministic pairwise summation.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct ResidualReport {
    Vec3 max_mom{};
    Vec3 mean_mom{};
    double max_div = 0.0;
    std::size_t n_points = 0;
    std::size_t n_rejected = 0;
    DiffMode mode = DiffMode::Analytic;
    // Largest |div u| / (1 + max|du_ij|) over accepted points.
    double max_div_relative = 0.0;
    Point4 worst_point{};

    [[nodiscard]] double max_momentum() const { return std::max({max_mom[0], max_mom[1], max_mom[2]}); }
    [[nodiscard]] bool within(double tol) const { return max_momentum() <= tol && max_div <= tol; }
};

// Tolerance in absolute units for a field of characteristic rate r.
inline double residual_tolerance(double rate, DiffMode mode) {
    return (mode == DiffMode::Analytic ? 1e-6 : 1e-4) * (1.0 + rate * rate);
}

struct PointResidual {
    Vec3 momentum{};
    double divergence = 0.0;
    double gradient_scale = 0.0;
};

inline PointResidual point_residual(const FlowJet& j, double nu) {
    PointResidual r;
    for (std::size_t i = 0; i < 3; ++i) {
        double adv = 0.0, lap = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            adv += j.state.u[k] * j.du[i][k];
            lap += j.d2u[i][k];
            r.gradient_scale = std::max(r.gradient_scale, std::abs(j.du[i][k]));
        }
        r.momentum[i] = j.dudt[i] + adv + j.dp[i] - nu * lap;
    }
    r.divergence = j.du[0][0] + j.du[1][1] + j.du[2][2];
    return r;
}

template <FieldEvaluator F>
ResidualReport ns_residual_points(const F& field, const std::vector<Point4>& pts, DiffMode mode = DiffMode::Analytic,
                                  const FdSteps& steps = {}) {
    ResidualReport rep;
    rep.mode = mode;
    std::array<std::vector<double>, 3> mags;
    double worst = -1.0;
    for (const auto& p : pts) {
        if (field.reject(p)) {
            ++rep.n_rejected;
            continue;
        }
        FlowJet j;
        try {
            j = eval_jet(field, p, mode, steps);
        } catch (const DomainError&) {
            ++rep.n_rejected;  // finite-difference stencil left the domain
            continue;
        }
        const PointResidual r = point_residual(j, field.nu());
        for (std::size_t i = 0; i < 3; ++i) {
            const double m = std::abs(r.momentum[i]);
            mags[i].push_back(m);
            rep.max_mom[i] = std::max(rep.max_mom[i], m);
            if (m > worst) {
                worst = m;
                rep.worst_point = p;
            }
        }
        rep.max_div = std::max(rep.max_div, std::abs(r.divergence));
        rep.max_div_relative = std::max(rep.max_div_relative, std::abs(r.divergence) / (1.0 + r.gradient_scale));
        ++rep.n_points;
    }
    if (rep.n_points == 0) throw AllPointsRejected("every grid point was rejected by the domain guard");
    for (std::size_t i = 0; i < 3; ++i) rep.mean_mom[i] = pairwise_sum(mags[i]) / static_cast<double>(rep.n_points);
    return rep;
}

template <FieldEvaluator F>
ResidualReport ns_residual(const F& field, const GridSpec& grid, DiffMode mode = DiffMode::Analytic,
                           const FdSteps& steps = {}) {
    grid.validate();
    return ns_residual_points(field, grid.points(), mode, steps);
}

// ---------------------------------------------------------------------------
// Reduced profile equations

struct OdeOptions {
    std::size_t samples = 200;
    DiffMode mode = DiffMode::Analytic;
    double step = 1e-3;  // finite-difference step (absolute)
};

struct OdeResidual {
    std::string id;
    std::string equation;
    double max_residual = 0.0;
    std::size_t samples = 0;
};

struct OdeCheckReport {
    FamilyId family{};
    std::vector<OdeResidual> entries;

    [[nodiscard]] double max_residual() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.max_residual);
        return m;
    }
};

namespace detail {

struct ProfileDerivs {
    double f = 0.0, f_r = 0.0, f_rr = 0.0, f_t = 0.0;
};

// Value, first and second derivative in r and first derivative in t of a
// profile written as a generic callable fn(r, t).
template <class Fn>
ProfileDerivs profile_derivs(const Fn& fn, double r, double t, const OdeOptions& opt) {
    ProfileDerivs d;
    if (opt.mode == DiffMode::Analytic) {
        const Jet v = fn(Jet::variable(r, 0), Jet::variable(t, 3));
        d.f = v.v;
        d.f_r = v.d[0];
        d.f_rr = v.dd[0];
        d.f_t = v.d[3];
        return d;
    }
    const double h = opt.step;
    const auto at = [&](double rr, double tt) { return static_cast<double>(fn(rr, tt)); };
    d.f = at(r, t);
    const double rm2 = at(r - 2 * h, t), rm1 = at(r - h, t), rp1 = at(r + h, t), rp2 = at(r + 2 * h, t);
    d.f_r = (rm2 - 8.0 * rm1 + 8.0 * rp1 - rp2) / (12.0 * h);
    d.f_rr = (-rm2 + 16.0 * rm1 - 30.0 * d.f + 16.0 * rp1 - rp2) / (12.0 * h * h);
    const double tm2 = at(r, t - 2 * h), tm1 = at(r, t - h), tp1 = at(r, t + h), tp2 = at(r, t + 2 * h);
    d.f_t = (tm2 - 8.0 * tm1 + 8.0 * tp1 - tp2) / (12.0 * h);
    return d;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// r_k = r_max k / n, k = 1..n: excludes the axis where 3/r is singular.
inline std::vector<double> open_radii(double r_max, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = r_max * static_cast<double>(k + 1) / static_cast<double>(n);
    return v;
}

template <class Residual>
OdeResidual sweep_1d(std::string id, std::string eq, const std::vector<double>& xs, double t, const Residual& res) {
    OdeResidual out{std::move(id), std::move(eq), 0.0, xs.size()};
    for (double x : xs) out.max_residual = std::max(out.max_residual, std::abs(res(x, t)));
    return out;
}

} // namespace detail

inline OdeCheckReport reduced_ode_check(const FlowField& field, const OdeOptions& opt = {}) {
    using detail::profile_derivs;
    OdeCheckReport rep;
    rep.family = field.family();
    const double nu = field.nu();
    const std::size_t n = std::max<std::size_t>(opt.samples, 2);
    switch (field.family()) {
    case FamilyId::KummerShear: {
        const auto& m = field.as<families::KummerShear>();
        const auto y_prof = [&](auto y, auto) { return m.profile_y(y); };
        const auto z_prof = [&](auto z, auto) { return m.profile_z(z); };
        const auto t_prof = [&](auto, auto t) { return m.profile_t(t); };
        rep.entries.push_back(detail::sweep_1d(
            "kummer.y-profile", "nu Y'' - k1 y Y' + G Y = 0", detail::linspace(-2, 2, n), 0.0, [&](double y, double) {
                const auto d = profile_derivs(y_prof, y, 0.0, opt);
                return nu * d.f_rr - m.k1 * y * d.f_r + m.G * d.f;
            }));
        rep.entries.push_back(detail::sweep_1d(
            "kummer.z-profile", "nu T'' + (k1 z - sigma) T' - H T = 0", detail::linspace(-2, 2, n), 0.0,
            [&](double z, double) {
                const auto d = profile_derivs(z_prof, z, 0.0, opt);
                return nu * d.f_rr + (m.k1 * z - m.sigma) * d.f_r - m.H * d.f;
            }));
        rep.entries.push_back(detail::sweep_1d("kummer.t-profile", "Phi_t - (H - G) Phi = 0",
                                               detail::linspace(0, 1, n), 0.0, [&](double t, double) {
                                                   const auto d = profile_derivs(t_prof, 0.0, t, opt);
                                                   return d.f_t - (m.H - m.G) * d.f;
                                               }));
        break;
    }
    case FamilyId::AxisymBessel: {
        const auto& m = field.as<families::AxisymBessel>();
        const auto prof = [&](auto r, auto) { return m.profile(r); };
        rep.entries.push_back(detail::sweep_1d(
            "axisym-bessel.radial-profile", "nu N'' + (nu - alpha0)/r N' + delta N = 0", detail::linspace(0.3, 3.0, n),
            0.0, [&](double r, double) {
                const auto d = profile_derivs(prof, r, 0.0, opt);
                return nu * d.f_rr + (nu - m.alpha0) / r * d.f_r + m.delta * d.f;
            }));
        break;
    }
    case FamilyId::BurgersVortex: {
        const auto& m = field.as<families::BurgersVortex>();
        const auto prof = [&](auto r, auto) { return m.swirl(r * r); };
        rep.entries.push_back(detail::sweep_1d(
            "burgers.swirl-profile", "f'' + (gamma r/2nu + 3/r) f' + (gamma/nu) f = 0", detail::open_radii(5.0, n), 0.0,
            [&](double r, double) {
                const auto d = profile_derivs(prof, r, 0.0, opt);
                return d.f_rr + (m.gamma * r / (2.0 * nu) + 3.0 / r) * d.f_r + m.gamma / nu * d.f;
            }));
        break;
    }
    case FamilyId::BurgersLundgren:
    case FamilyId::SechVortex: {
        const bool lundgren = field.family() == FamilyId::BurgersLundgren;
        const double gamma = lundgren ? field.as<families::BurgersLundgren>().gamma : field.as<families::SechVortex>().gamma;
        const auto prof = [&](auto r, auto t) {
            if (lundgren) return field.as<families::BurgersLundgren>().swirl(r * r, t);
            return field.as<families::SechVortex>().swirl(r * r, t);
        };
        OdeResidual e{lundgren ? "lundgren.swirl-pde" : "sech.swirl-pde",
                      "f_t - nu f_rr - (gamma r/2 + 3 nu/r) f_r - gamma f = 0", 0.0, 0};
        const auto radii = detail::open_radii(4.0, n);
        const auto times = detail::linspace(0.2 / gamma, 5.0 / gamma, 9);
        for (double t : times)
            for (double r : radii) {
                const auto d = profile_derivs(prof, r, t, opt);
                const double res = d.f_t - nu * d.f_rr - (gamma * r / 2.0 + 3.0 * nu / r) * d.f_r - gamma * d.f;
                e.max_residual = std::max(e.max_residual, std::abs(res));
                ++e.samples;
            }
        rep.entries.push_back(e);
        break;
    }
    default:
        throw UnsupportedFamily(family_info(field.family()).name + " has no reduced profile equation to check");
    }
    return rep;
}

inline OdeCheckReport reduced_ode_check(FamilyId id, const ParamSet& params = {}, const OdeOptions& opt = {}) {
    return reduced_ode_check(make_field(id, params, family_info(id).default_nu), opt);
}

// ---------------------------------------------------------------------------
// Reference vorticity formulas

struct AuditEntry {
    std::string formula_id;
    std::string reference_form;
    std::string corrected_form;  // empty when the reference form agrees
    std::size_t samples = 0;
    double max_abs_deviation = 0.0;    // reference vs curl of the field
    double correction_factor = 1.0;    // median of computed / reference
    double factor_spread = 0.0;        // (max - min) / |median| of that ratio
    double corrected_deviation = 0.0;  // corrected form vs curl of the field
    std::string verdict;               // agrees | constant-factor | discrepant
};

struct AuditReport {
    FamilyId family{};
    std::vector<AuditEntry> entries;
};

namespace detail {

struct AuditSample {
    double computed;
    double reference;
    double corrected;
};

inline AuditEntry summarize_audit(std::string id, std::string ref, std::string corrected,
                                  const std::vector<AuditSample>& s) {
    AuditEntry e;
    e.formula_id = std::move(id);
    e.reference_form = std::move(ref);
    e.samples = s.size();
    double scale = 0.0, ref_scale = 0.0;
    for (const auto& x : s) {
        e.max_abs_deviation = std::max(e.max_abs_deviation, std::abs(x.computed - x.reference));
        e.corrected_deviation = std::max(e.corrected_deviation, std::abs(x.computed - x.corrected));
        scale = std::max(scale, std::abs(x.computed));
        ref_scale = std::max(ref_scale, std::abs(x.reference));
    }
    // Ratios of tiny values carry rounding noise; keep samples above 1e-6 of the peak.
    std::vector<double> ratios;
    const double floor = std::max(1e-12, 1e-6 * std::min(scale, ref_scale));
    for (const auto& x : s)
        if (std::abs(x.reference) > floor && std::abs(x.computed) > floor) ratios.push_back(x.computed / x.reference);
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        e.correction_factor = ratios[ratios.size() / 2];
        e.factor_spread = (ratios.back() - ratios.front()) / std::abs(e.correction_factor);
    }
    const double tol = 1e-9 * (1.0 + scale);
    if (e.max_abs_deviation <= tol) {
        e.verdict = "agrees";
        e.correction_factor = 1.0;
    } else if (e.factor_spread <= 1e-8) {
        e.verdict = "constant-factor";
    } else {
        e.verdict = "discrepant";
    }
    if (e.verdict != "agrees") e.corrected_form = std::move(corrected);
    return e;
}

inline std::vector<Point4> audit_points(const FlowField& field, std::size_t stride) {
    std::vector<Point4> out;
    const auto pts = family_info(field.family()).standard_grid.points();
    for (std::size_t i = 0; i < pts.size(); i += stride)
        if (!field.reject(pts[i])) out.push_back(pts[i]);
    return out;
}

} // namespace detail

inline AuditReport vorticity_formula_audit(const FlowField& field) {
    using detail::AuditSample;
    AuditReport rep;
    rep.family = field.family();
    const double nu = field.nu();
    const auto pts = detail::audit_points(field, 7);
    const auto curl = [&](const Point4& p) { return vorticity(eval_jet(field, p)); };
    std::vector<AuditSample> s;
    switch (field.family()) {
    case FamilyId::BurgersShearLayer: {
        const auto& m = field.as<families::BurgersShearLayer>();
        for (const auto& p : pts) {
            const double e = std::exp(-m.gamma * p.y * p.y / (2.0 * nu));
            s.push_back({curl(p)[2], -m.A * std::sqrt(2.0 * nu / m.gamma) * e, -std::numbers::sqrt2 * m.A * e});
        }
        rep.entries.push_back(detail::summarize_audit("shear-layer.omega3", "omega3 = -A sqrt(2 nu/gamma) exp(-gamma y^2/2nu)",
                                                      "omega3 = -sqrt(2) A exp(-gamma y^2/2nu)", s));
        break;
    }
    case FamilyId::ExpSaddle: {
        const auto& m = field.as<families::ExpSaddle>();
        std::vector<AuditSample> s3;
        for (const auto& p : pts) {
            const double e = std::exp(m.k1 * (p.y * p.y - p.z * p.z) / (2.0 * nu));
            const Vec3 w = curl(p);
            const double w2 = -m.A * m.k1 / nu * p.z * e, w3 = -m.A * m.k1 / nu * p.y * e;
            s.push_back({w[1], w2, w2});
            s3.push_back({w[2], w3, w3});
        }
        rep.entries.push_back(detail::summarize_audit("exp-saddle.omega2", "omega2 = -(A k1/nu) z exp(k1 (y^2 - z^2)/2nu)", "", s));
        rep.entries.push_back(detail::summarize_audit("exp-saddle.omega3", "omega3 = -(A k1/nu) y exp(k1 (y^2 - z^2)/2nu)", "", s3));
        // Dynamic angle along the hyperbola (cosh th, sinh th) off the x = 0 plane.
        std::vector<AuditSample> sa;
        const AlignmentFloors floors = AlignmentFloors::for_rate(field.rate());
        for (int i = 0; i <= 60; ++i) {
            const double th = -3.0 + 0.1 * i;
            if (std::abs(th) < 1e-12) continue;
            const Point4 p{1.0, std::cosh(th), std::sinh(th), 0.0};
            if (field.reject(p)) continue;
            const AlignmentSample a = classify_alignment(eval_jet(field, p), floors);
            if (a.flag != AlignmentFlag::Ok) continue;
            const double den = p.y * p.y - p.z * p.z;
            sa.push_back({a.chi[0] / a.alpha, 2.0 * p.x * p.y / den, 2.0 * p.y * p.z / den});
        }
        rep.entries.push_back(detail::summarize_audit("exp-saddle.tan-phi", "tan phi = 2 x y/(y^2 - z^2)",
                                                      "tan phi = 2 y z/(y^2 - z^2) = sinh 2 theta", sa));
        break;
    }
    case FamilyId::BesselTransient: {
        const auto& m = field.as<families::BesselTransient>();
        for (const auto& p : pts) {
            const double w = m.gamma * p.y * p.y / (4.0 * nu);
            const double base = std::exp(-0.5 * m.gamma * p.t) * std::exp(-w) * std::pow(p.y, 1.5) *
                                (specfun::cyl_i(-0.25, w) - specfun::cyl_i(0.75, w));
            s.push_back({curl(p)[2], m.A * base, m.A * m.gamma / (2.0 * nu) * base});
        }
        rep.entries.push_back(detail::summarize_audit(
            "bessel-transient.omega3", "omega3 = B e^{-gamma t/2} e^{-w} y^{3/2} (I_{-1/4}(w) - I_{3/4}(w)), B = A",
            "B = A gamma/(2 nu)", s));
        break;
    }
    case FamilyId::BurgersVortex: {
        const auto& m = field.as<families::BurgersVortex>();
        for (const auto& p : pts) {
            const double r2 = p.x * p.x + p.y * p.y;
            double ref = 2.0 * m.a * m.f0 * std::exp(-m.a * r2);
            if (m.f1 != 0.0) ref = 2.0 * m.a * (m.f0 - m.f1) * std::exp(-m.a * r2);
            s.push_back({curl(p)[2], ref, ref});
        }
        rep.entries.push_back(detail::summarize_audit("burgers.omega3", "omega3 = 2 f + r f_r = 2 a f0 exp(-a r^2)", "", s));
        break;
    }
    case FamilyId::BurgersLundgren: {
        const auto& m = field.as<families::BurgersLundgren>();
        for (const auto& p : pts) {
            const double r2 = p.x * p.x + p.y * p.y;
            const double sden = -std::expm1(-m.gamma * p.t);
            s.push_back({curl(p)[2], 2.0 * m.a * m.f0 * std::exp(1.0 - m.a * r2 / sden) / sden,
                         2.0 * m.a * m.f0 / sden * std::exp(-m.a * r2 / sden)});
        }
        rep.entries.push_back(detail::summarize_audit("lundgren.omega3", "omega3 = 2 a f0 exp(1 - a r^2/s)/s, s = 1 - e^{-gamma t}",
                                                      "omega3 = (2 a f0/s) exp(-a r^2/s)", s));
        break;
    }
    case FamilyId::AxisymSource: {
        const auto& m = field.as<families::AxisymSource>();
        std::vector<AuditSample> s2;
        for (const auto& p : pts) {
            const double r2 = p.x * p.x + p.y * p.y;
            const double br = m.a0 / nu - 0.5 * m.gamma0 * std::pow(nu * p.t, -1.5) * std::exp(-r2 / (4.0 * nu * p.t));
            const Vec3 w = curl(p);
            s.push_back({w[0], br * p.y, br * p.y});
            s2.push_back({w[1], -br * p.x, -br * p.x});
        }
        rep.entries.push_back(detail::summarize_audit(
            "axisym-source.omega1", "omega1 = (a0/nu - (gamma0/2)(nu t)^{-3/2} exp(-r^2/4 nu t)) y", "", s));
        rep.entries.push_back(detail::summarize_audit(
            "axisym-source.omega2", "omega2 = -(a0/nu - (gamma0/2)(nu t)^{-3/2} exp(-r^2/4 nu t)) x", "", s2));
        break;
    }
    default:
        break;  // no reference formula for this family
    }
    return rep;
}

inline AuditReport vorticity_formula_audit(FamilyId id) { return vorticity_formula_audit(make_default_field(id)); }

} // namespace nsvl
