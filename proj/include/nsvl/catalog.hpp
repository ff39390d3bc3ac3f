#pragma once

// Registry of exact Navier-Stokes solution families: metadata, construction
// with parameter validation, pointwise evaluation and derivative jets.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nsvl/catalog/families.hpp"
#include "nsvl/catalog/params.hpp"
#include "nsvl/core/errors.hpp"
#include "nsvl/core/evaluator.hpp"
#include "nsvl/core/grid.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl {

struct ParamInfo {
    std::string name;
    double default_value;
    std::string description;
};

struct FamilyInfo {
    FamilyId id;
    std::string key;
    std::string name;
    std::vector<ParamInfo> params;
    double default_nu;
    std::string formula;
    std::string domain;
    GridSpec standard_grid;

    [[nodiscard]] std::vector<std::string> param_names() const {
        std::vector<std::string> out;
        for (const auto& p : params) out.push_back(p.name);
        return out;
    }
    [[nodiscard]] ParamSet defaults() const {
        ParamSet ps;
        for (const auto& p : params) ps.set(p.name, p.default_value);
        return ps;
    }
};

namespace detail {

inline GridSpec box(double x0, double x1, double y0, double y1, double z0, double z1, std::vector<double> times) {
    GridSpec g;
    g.x = {x0, x1, 17};
    g.y = {y0, y1, 17};
    g.z = {z0, z1, 17};
    g.times = std::move(times);
    return g;
}

inline GridSpec cylinder(double r0, double r1, double z0, double z1, std::vector<double> times) {
    GridSpec g;
    g.x = {r0, r1, 17};
    g.y = {0.0, 2.0 * std::numbers::pi, 17};
    g.z = {z0, z1, 17};
    g.times = std::move(times);
    g.cylindrical = true;
    return g;
}

inline std::vector<FamilyInfo> build_registry() {
    std::vector<FamilyInfo> r;
    r.push_back({FamilyId::KummerShear,
                 "kummer-shear",
                 "KummerShear",
                 {{"k1", 0.5, "strain rate of the (y,z) saddle"},
                  {"sigma", 0.2, "axial inflow offset"},
                  {"G", 0.3, "y separation constant"},
                  {"H", -0.2, "z separation constant"},
                  {"c1", 1.0, "time amplitude"},
                  {"c2", 1.0, "even y profile weight"},
                  {"c3", 0.5, "odd y profile weight"},
                  {"c4", 1.0, "even z profile weight"},
                  {"c5", 0.5, "odd z profile weight"},
                  {"tau0", 0.0, "pressure constant"}},
                 0.5,
                 "u1 = c1 e^{(H-G)t} Y(y) T(z) with Kummer-M profiles Y, T; u2 = k1 y; u3 = sigma - k1 z; "
                 "p = -k1^2 (y^2 + z^2)/2 + k1 sigma z + tau0",
                 "entire; guarded where the Kummer argument leaves the double range",
                 box(-1, 1, -2, 2, -2, 2, {0.0, 0.5})});
    r.push_back({FamilyId::ErfProductShear,
                 "erf-product-shear",
                 "ErfProductShear",
                 {{"k1", -0.8, "strain rate (sign selects the erf/erfi factor)"},
                  {"c2", 1.0, "y offset"},
                  {"c3", 0.5, "y error-function weight"},
                  {"c4", 1.0, "z offset"},
                  {"c5", 0.5, "z error-function weight"}},
                 0.5,
                 "u1 = Fy(y) Fz(z) with erf/erfi factors; u2 = k1 y; u3 = -k1 z; p = -k1^2 (y^2 + z^2)/2",
                 "erfi argument limited to |.| <= 5 (y for k1 > 0, z for k1 < 0)",
                 box(-1, 1, -2, 2, -2, 2, {0.0, 1.0})});
    r.push_back({FamilyId::BurgersShearLayer,
                 "burgers-shear-layer",
                 "BurgersShearLayer",
                 {{"gamma", 1.0, "strain rate"}, {"A", 1.0, "shear amplitude"}, {"B", 0.5, "uniform stream"}},
                 0.25,
                 "u = (A sqrt(pi nu/gamma) erf(sqrt(gamma/2nu) y) + B, -gamma y, gamma z); "
                 "p = -gamma^2 (y^2 + z^2)/2",
                 "entire",
                 box(-2, 2, -2, 2, -2, 2, {0.0, 1.0})});
    r.push_back({FamilyId::ExpSaddle,
                 "exp-saddle",
                 "ExpSaddle",
                 {{"A", 1.0, "amplitude"}, {"k1", -1.0, "strain rate"}},
                 0.5,
                 "u = (A exp(k1 (y^2 - z^2)/2nu), k1 y, -k1 z); p = -k1^2 (y^2 + z^2)/2",
                 "entire; guarded where the exponent leaves the double range",
                 box(-1, 1, -1, 1, -1, 1, {0.0, 1.0})});
    r.push_back({FamilyId::BesselTransient,
                 "bessel-transient",
                 "BesselTransient",
                 {{"A", 1.0, "amplitude"}, {"gamma", 1.0, "strain rate"}},
                 0.5,
                 "u1 = A e^{-gamma t/2} y^{1/2} e^{-w} I_{-1/4}(w), w = gamma y^2/4nu; u2 = -gamma y; "
                 "u3 = gamma z; p = -gamma^2 (y^2 + z^2)/2",
                 "y > 0",
                 box(-1, 1, 0.1, 3, -1, 1, {0.0, 1.0})});
    r.push_back({FamilyId::IrrotationalPotential,
                 "irrotational-potential",
                 "IrrotationalPotential",
                 {{"c1", 0.5, "x drift amplitude"},
                  {"c2", -0.3, "y drift amplitude"},
                  {"c3", 0.2, "z drift amplitude"},
                  {"lambda1", 0.5, "x strain rate"},
                  {"lambda2", 0.3, "y strain rate"},
                  {"lambda3", -0.8, "z strain rate"},
                  {"phi0", 0.0, "potential constant"}},
                 0.01,
                 "u = grad phi, phi = sum_i (lambda_i x_i^2/2 + c_i e^{-lambda_i t} x_i) + phi0; "
                 "p = -phi_t - |grad phi|^2/2; sum lambda_i = 0",
                 "entire",
                 box(-1, 1, -1, 1, -1, 1, {0.0, 1.0})});
    r.push_back({FamilyId::ScaleInvariant,
                 "scale-invariant",
                 "ScaleInvariant",
                 {{"a", 0.3, "u2 similarity constant"},
                  {"b", -0.2, "u3 similarity constant"},
                  {"c", 0.4, "u1 similarity constant"},
                  {"c0", 0.1, "pressure constant"},
                  {"c1", 0.5, "u2 Gaussian weight"},
                  {"c2", 0.3, "u2 erfi weight"},
                  {"c3", -0.4, "u3 Gaussian weight"},
                  {"c4", 0.2, "u3 erfi weight"}},
                 0.5,
                 "u1 = c t^{-1/2}; u2,u3 = -2(a,b) t^{-1/2} + sqrt(nu/t) E(rho) (c_i - c_j erfi((2c - rho)/2sqrt(nu))), "
                 "rho = x t^{-1/2}; p = c0/t + t^{-3/2} (c x/2 - a y - b z)",
                 "t > 1e-6",
                 box(-2, 2, -1, 1, -1, 1, {0.5, 1.0})});
    r.push_back({FamilyId::AxisymSource,
                 "axisym-source",
                 "AxisymSource",
                 {{"beta0", 0.5, "circulation constant"},
                  {"gamma0", -1.0, "heat-kernel amplitude"},
                  {"a0", 0.5, "axial pressure gradient"},
                  {"b0", 0.0, "pressure constant"}},
                 0.5,
                 "u1 = (nu x - beta0 y)/r^2; u2 = (beta0 x + nu y)/r^2; "
                 "u3 = gamma0/sqrt(nu t) e^{-r^2/4nu t} + a0 r^2/2nu; p = -(nu^2 + beta0^2)/2r^2 + a0 z + b0",
                 "r > 1e-9, t > 0",
                 cylinder(0.3, 2.0, -1, 1, {0.5, 1.0})});
    r.push_back({FamilyId::AxisymBessel,
                 "axisym-bessel",
                 "AxisymBessel",
                 {{"alpha0", 0.7, "radial source strength"},
                  {"beta0", 0.4, "circulation constant"},
                  {"delta", 0.9, "decay rate"},
                  {"M0", 1.0, "axial amplitude"},
                  {"c1", 1.0, "J weight"},
                  {"c2", 0.3, "Y weight"},
                  {"a0", 0.2, "axial pressure gradient"},
                  {"b0", 0.0, "pressure constant"}},
                 0.5,
                 "u1 = (alpha0 x - beta0 y)/r^2; u2 = (alpha0 y + beta0 x)/r^2; "
                 "u3 = M0 e^{-delta t} r^mu (c1 J_mu(kr) + c2 Y_mu(kr)) - a0 t, mu = alpha0/2nu, k = sqrt(delta/nu); "
                 "p = -(alpha0^2 + beta0^2)/2r^2 + a0 z + b0",
                 "r > 1e-9",
                 cylinder(0.3, 2.0, -1, 1, {0.0, 1.0})});
    r.push_back({FamilyId::BurgersVortex,
                 "burgers-vortex",
                 "BurgersVortex",
                 {{"gamma", 1.0, "strain rate"}, {"f0", 1.0, "circulation weight"}, {"f1", 0.0, "line-vortex weight"}},
                 0.25,
                 "u = (-gamma x/2 - y f, -gamma y/2 + x f, gamma z), f = (f0 - (f0 - f1) e^{-a r^2})/r^2, "
                 "a = gamma/4nu",
                 "entire for f1 = 0; r > 1e-9 otherwise",
                 cylinder(0.0, 4.0, -2, 2, {0.0, 1.0})});
    r.push_back({FamilyId::BurgersLundgren,
                 "burgers-lundgren",
                 "BurgersLundgren",
                 {{"gamma", 1.0, "strain rate"}, {"f0", 1.0, "circulation weight"}},
                 0.25,
                 "Burgers-type swirl f = f0 (1 - exp(-a r^2/(1 - e^{-gamma t})))/r^2, a = gamma/4nu",
                 "t > 0",
                 cylinder(0.0, 4.0, -2, 2, {0.5, 2.0})});
    r.push_back({FamilyId::SechVortex,
                 "sech-vortex",
                 "SechVortex",
                 {{"gamma", 1.0, "strain rate"}, {"f0", 1.0, "initial swirl amplitude"}},
                 0.25,
                 "Burgers-type swirl f = (f0/2) sech^2(gamma t/2) exp(-a r^2/(1 + e^{-gamma t})), a = gamma/4nu",
                 "entire (guarded against exp overflow for very negative t)",
                 cylinder(0.0, 4.0, -2, 2, {0.5, 2.0})});
    return r;
}

} // namespace detail

inline const std::vector<FamilyInfo>& list_families() {
    static const std::vector<FamilyInfo> registry = detail::build_registry();
    return registry;
}

inline const FamilyInfo& family_info(FamilyId id) {
    for (const auto& f : list_families())
        if (f.id == id) return f;
    throw UnsupportedFamily("unknown family id");
}

inline std::optional<FamilyId> family_from_key(std::string_view key) {
    for (const auto& f : list_families())
        if (f.key == key || f.name == key) return f.id;
    return std::nullopt;
}

using FamilyModel =
    std::variant<families::KummerShear, families::ErfProductShear, families::BurgersShearLayer, families::ExpSaddle,
                 families::BesselTransient, families::IrrotationalPotential, families::ScaleInvariant,
                 families::AxisymSource, families::AxisymBessel, families::BurgersVortex,
                 families::BurgersLundgren, families::SechVortex>;

class FlowField {
public:
    FlowField(FamilyId id, ParamSet params, double nu, FamilyModel model, double rate)
        : id_(id), params_(std::move(params)), nu_(nu), model_(std::move(model)), rate_(rate) {}

    [[nodiscard]] FamilyId family() const { return id_; }
    [[nodiscard]] const ParamSet& params() const { return params_; }
    [[nodiscard]] double nu() const { return nu_; }
    // Characteristic rate (1/time) used to scale tolerances and floors.
    [[nodiscard]] double rate() const { return rate_; }
    [[nodiscard]] const FamilyModel& model() const { return model_; }

    template <class M>
    [[nodiscard]] const M& as() const {
        return std::get<M>(model_);
    }

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        return std::visit([&](const auto& m) { return m.template eval<S>(q); }, model_);
    }

    [[nodiscard]] std::optional<std::string> reject(const Point4& pt) const {
        if (!pt.finite()) return std::string("non-finite coordinate");
        return std::visit([&](const auto& m) { return m.reject(pt); }, model_);
    }

private:
    FamilyId id_;
    ParamSet params_;
    double nu_;
    FamilyModel model_;
    double rate_;
};

inline FlowField make_field(FamilyId id, const ParamSet& params, double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ParamError("viscosity nu must be > 0");
    const FamilyInfo& info = family_info(id);
    ParamSet full = info.defaults();
    for (const auto& [name, v] : params.values()) {
        const auto names = info.param_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw ParamError(info.name + ": unknown parameter '" + name + "'");
        if (!std::isfinite(v)) throw ParamError(info.name + ": parameter '" + name + "' is not finite");
        full.set(name, v);
    }
    const auto rate_or_one = [](double r) { return r > 0.0 ? r : 1.0; };
    switch (id) {
    case FamilyId::KummerShear:
        return {id, full, nu, families::KummerShear(full, nu), rate_or_one(std::abs(full.get("k1")))};
    case FamilyId::ErfProductShear:
        return {id, full, nu, families::ErfProductShear(full, nu), rate_or_one(std::abs(full.get("k1")))};
    case FamilyId::BurgersShearLayer:
        return {id, full, nu, families::BurgersShearLayer(full, nu), full.get("gamma")};
    case FamilyId::ExpSaddle:
        return {id, full, nu, families::ExpSaddle(full, nu), rate_or_one(std::abs(full.get("k1")))};
    case FamilyId::BesselTransient:
        return {id, full, nu, families::BesselTransient(full, nu), full.get("gamma")};
    case FamilyId::IrrotationalPotential: {
        const double r = std::max({std::abs(full.get("lambda1")), std::abs(full.get("lambda2")),
                                   std::abs(full.get("lambda3"))});
        return {id, full, nu, families::IrrotationalPotential(full, nu), rate_or_one(r)};
    }
    case FamilyId::ScaleInvariant:
        return {id, full, nu, families::ScaleInvariant(full, nu), 1.0};
    case FamilyId::AxisymSource:
        return {id, full, nu, families::AxisymSource(full, nu), 1.0};
    case FamilyId::AxisymBessel:
        return {id, full, nu, families::AxisymBessel(full, nu), full.get("delta")};
    case FamilyId::BurgersVortex:
        return {id, full, nu, families::BurgersVortex(full, nu), full.get("gamma")};
    case FamilyId::BurgersLundgren:
        return {id, full, nu, families::BurgersLundgren(full, nu), full.get("gamma")};
    case FamilyId::SechVortex:
        return {id, full, nu, families::SechVortex(full, nu), full.get("gamma")};
    }
    throw UnsupportedFamily("unknown family id");
}

inline FlowField make_default_field(FamilyId id) { return make_field(id, {}, family_info(id).default_nu); }

// Accept is an empty optional; Reject carries the violated guard.
inline std::optional<std::string> domain_guard(const FlowField& field, const Point4& pt) { return field.reject(pt); }

inline FlowState eval_state(const FlowField& field, const Point4& pt) {
    if (auto why = field.reject(pt)) throw DomainError(*why);
    return field.eval(pt.as_array());
}

} // namespace nsvl
