#include <gtest/gtest.h>

#include <cmath>

#include "nsvl/catalog.hpp"
#include "nsvl/fixtures.hpp"
#include "nsvl/verify.hpp"

using namespace nsvl;

namespace {

GridSpec burgers_cylinder() {
    GridSpec g;
    g.x = {0, 4, 17};
    g.y = {0, 6.283185307179586, 17};
    g.z = {-2, 2, 17};
    g.times = {1.0};
    g.cylindrical = true;
    return g;
}

const AuditEntry* find_entry(const AuditReport& r, const std::string& id) {
    for (const auto& e : r.entries)
        if (e.formula_id == id) return &e;
    return nullptr;
}

} // namespace

TEST(Residual, BurgersVortexOnCylinder) {
    const FlowField f = make_field(FamilyId::BurgersVortex, {{"gamma", 1}, {"f0", 1}}, 0.25);
    const ResidualReport a = ns_residual(f, burgers_cylinder(), DiffMode::Analytic);
    const ResidualReport d = ns_residual(f, burgers_cylinder(), DiffMode::FiniteDiff);
    EXPECT_LE(a.max_momentum(), 1e-6);
    EXPECT_LE(a.max_div, 1e-6);
    EXPECT_LE(d.max_momentum(), 1e-4);
    EXPECT_EQ(a.mode, DiffMode::Analytic);
    EXPECT_EQ(d.mode, DiffMode::FiniteDiff);
}

TEST(Residual, ZeroFieldIsExactlyZero) {
    const ResidualReport r = ns_residual(fixtures::ZeroField{3.0}, family_info(FamilyId::ExpSaddle).standard_grid);
    EXPECT_EQ(r.max_momentum(), 0.0);
    EXPECT_EQ(r.max_div, 0.0);
    EXPECT_EQ(r.mean_mom, (Vec3{0, 0, 0}));
    EXPECT_EQ(r.n_rejected, 0u);
}

TEST(Residual, RigidRotationIsASolution) {
    const ResidualReport r = ns_residual(fixtures::RigidRotation{2.0}, family_info(FamilyId::ExpSaddle).standard_grid);
    EXPECT_LE(r.max_momentum(), 1e-13);
}

TEST(Residual, CorruptedAxialVelocityIsDetected) {
    const double gamma = 1.0;
    const FlowField f = make_field(FamilyId::BurgersVortex, {{"gamma", gamma}, {"f0", 1}}, 0.25);
    const fixtures::ScaledComponent<FlowField> bad{f, 2, 1.1};
    const GridSpec g = burgers_cylinder();
    const ResidualReport r = ns_residual(bad, g);
    EXPECT_GE(r.max_momentum(), 0.05 * gamma * gamma * g.z.max);
    EXPECT_GE(r.max_mom[2], 0.05 * gamma * gamma * g.z.max);
}

TEST(Residual, ReportInvariants) {
    for (FamilyId id : kAllFamilies) {
        const FlowField f = make_default_field(id);
        const GridSpec& g = family_info(id).standard_grid;
        const ResidualReport r = ns_residual(f, g);
        EXPECT_EQ(r.n_points + r.n_rejected, g.size()) << family_info(id).key;
        for (int i = 0; i < 3; ++i) EXPECT_GE(r.max_mom[i], r.mean_mom[i]);
        EXPECT_LE(r.max_momentum(), residual_tolerance(f.rate(), DiffMode::Analytic)) << family_info(id).key;
    }
}

TEST(Residual, DeterministicAcrossRuns) {
    const FlowField f = make_default_field(FamilyId::KummerShear);
    const GridSpec& g = family_info(FamilyId::KummerShear).standard_grid;
    const ResidualReport a = ns_residual(f, g), b = ns_residual(f, g);
    EXPECT_EQ(a.mean_mom, b.mean_mom);
    EXPECT_EQ(a.max_mom, b.max_mom);
}

TEST(Residual, AllPointsRejectedThrows) {
    GridSpec g;
    g.times = {0.0};
    EXPECT_THROW(ns_residual(make_default_field(FamilyId::AxisymSource), g), AllPointsRejected);
}

TEST(Residual, FiniteDifferenceConvergesAtDesignOrder) {
    // Enlarged steps keep truncation well above rounding.
    const FlowField f = make_default_field(FamilyId::AxisymBessel);
    const GridSpec& g = family_info(FamilyId::AxisymBessel).standard_grid;
    const auto at = [&](double s) { return ns_residual(f, g, DiffMode::FiniteDiff, {1e-2 * s, 1e-2 * s}).max_momentum(); };
    const double ratio = at(2.0) / at(1.0);
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(ReducedOde, KummerProfiles) {
    const OdeCheckReport r = reduced_ode_check(FamilyId::KummerShear, {{"k1", 1}, {"G", 0.3}});
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_EQ(r.entries[0].id, "kummer.y-profile");
    for (const auto& e : r.entries) EXPECT_LE(e.max_residual, 1e-7) << e.id;
}

TEST(ReducedOde, BurgersLundgrenSechAndBessel) {
    EXPECT_LE(reduced_ode_check(FamilyId::BurgersVortex).max_residual(), 1e-8);
    EXPECT_LE(reduced_ode_check(FamilyId::BurgersLundgren).max_residual(), 1e-6);
    EXPECT_LE(reduced_ode_check(FamilyId::SechVortex).max_residual(), 1e-6);
    EXPECT_LE(reduced_ode_check(FamilyId::AxisymBessel).max_residual(), 1e-7);
}

TEST(ReducedOde, UnsupportedFamily) {
    EXPECT_THROW(reduced_ode_check(FamilyId::ExpSaddle), UnsupportedFamily);
}

TEST(ReducedOde, FiniteDifferenceRefinementShrinksResidual) {
    OdeOptions coarse;
    coarse.mode = DiffMode::FiniteDiff;
    coarse.step = 4e-2;
    OdeOptions fine = coarse;
    fine.step = 1e-2;
    for (FamilyId id : {FamilyId::KummerShear, FamilyId::BurgersVortex, FamilyId::BurgersLundgren}) {
        const double c = reduced_ode_check(id, {}, coarse).max_residual(), f = reduced_ode_check(id, {}, fine).max_residual();
        EXPECT_LT(f, c) << family_info(id).key;
    }
}

TEST(Audit, BurgersVortexAgrees) {
    const AuditEntry* e = find_entry(vorticity_formula_audit(FamilyId::BurgersVortex), "burgers.omega3");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->verdict, "agrees");
    EXPECT_LE(e->max_abs_deviation, 1e-9);
}

TEST(Audit, LundgrenCarriesExtraFactorE) {
    const AuditEntry* e = find_entry(vorticity_formula_audit(FamilyId::BurgersLundgren), "lundgren.omega3");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->verdict, "constant-factor");
    EXPECT_NEAR(e->correction_factor, std::exp(-1.0), 1e-9);
    EXPECT_LE(e->corrected_deviation, 1e-8);
}

TEST(Audit, ShearLayerPrefactor) {
    const FlowField f = make_field(FamilyId::BurgersShearLayer, {{"gamma", 2}, {"A", 1}, {"B", 0}}, 0.5);
    const AuditEntry* e = find_entry(vorticity_formula_audit(f), "shear-layer.omega3");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->verdict, "constant-factor");
    EXPECT_NEAR(e->correction_factor, 2.0, 1e-9);
    EXPECT_LE(e->corrected_deviation, 1e-9);
}

TEST(Audit, ExpSaddleAngleFormulaFlagged) {
    const AuditReport r = vorticity_formula_audit(FamilyId::ExpSaddle);
    const AuditEntry* e = find_entry(r, "exp-saddle.tan-phi");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->verdict, "discrepant");
    EXPECT_LE(e->corrected_deviation, 1e-9);
    EXPECT_EQ(find_entry(r, "exp-saddle.omega2")->verdict, "agrees");
    EXPECT_EQ(find_entry(r, "exp-saddle.omega3")->verdict, "agrees");
}

TEST(Audit, RemainingPrintedFormulasAgree) {
    EXPECT_EQ(find_entry(vorticity_formula_audit(FamilyId::BesselTransient), "bessel-transient.omega3")->verdict, "agrees");
    const AuditReport s = vorticity_formula_audit(FamilyId::AxisymSource);
    EXPECT_EQ(find_entry(s, "axisym-source.omega1")->verdict, "agrees");
    EXPECT_EQ(find_entry(s, "axisym-source.omega2")->verdict, "agrees");
}
