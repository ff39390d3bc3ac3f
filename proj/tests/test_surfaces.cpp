#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsvl/surfaces.hpp"

using namespace nsvl;
using namespace nsvl::surfaces;

namespace {

const CharConstants kGeneral{0.3, 0.5, -0.4, 1.2, 0.7, 0, 0, 0, 0.8};
const CharConstants kGeneralShifted{0.3, 0.5, -0.4, 1.2, 0.7, 0.4, -0.3, 0.6, 0.8};

const Invariant& by_id(const InvariantSet& s, const std::string& id) {
    for (const auto& m : s.members)
        if (m.formula_id == id) return m;
    throw std::runtime_error("no member " + id);
}

std::vector<CharConstants> every_case() {
    return {kGeneral,
            kGeneralShifted,
            {0, 0.5, 0, 1.2, 0, 0, 0, 0, 0},
            {0, 0.5, -0.4, 1.2, 0.7, 0.4, -0.3, 0.6, 0},
            {0, 0, 0, 1.2, 0, 0.4, -0.3, 0.6, 0},
            {0, 0, -0.4, 1.2, 0, 0.4, -0.3, 0.6, 0},
            {0, 0, -0.4, 1.2, 0.7, 0, 0, 0, 0},
            {0, 0.5, -0.4, 1.2, 0.7, 0, 0, 0, 0},
            {0, 0, 0, 0, 0, 0.4, -0.3, 0.6, 0},
            {0, 0.5, 0, 0, 0, 0.4, -0.3, 0.6, 0},
            {0, 0.5, -0.4, 0, 0, 0, 0, 0, 0},
            {0, 0.5, -0.4, 0, 0.7, 0, 0, 0, 0}};
}

} // namespace

TEST(SelectCase, ZeroPatterns) {
    EXPECT_EQ(select_case({0, 0, 0, 1, 0, 1}), CaseId::I1);
    EXPECT_EQ(select_case({0, 1, 0, 0, 0, 0, 0, 1}), CaseId::II2);
    EXPECT_EQ(select_case(kGeneral), CaseId::GeneralI_r0);
    EXPECT_EQ(select_case(kGeneralShifted), CaseId::GeneralI_shifted);
    const CaseId expected[] = {CaseId::GeneralI_r0, CaseId::GeneralI_shifted, CaseId::CaseII_r0, CaseId::CaseII_shifted,
                               CaseId::I1,          CaseId::I2,               CaseId::I3,        CaseId::I4,
                               CaseId::II1,         CaseId::II2,              CaseId::II3,       CaseId::II4};
    const auto cases = every_case();
    for (std::size_t i = 0; i < cases.size(); ++i) EXPECT_EQ(select_case(cases[i]), expected[i]) << i;
}

TEST(SelectCase, UncoveredPatternsThrow) {
    EXPECT_THROW(select_case({}), CaseError);
    EXPECT_THROW(select_case({1, 0, 0, 0, 0}), CaseError);
    EXPECT_THROW(select_case({0, 0, 0, 1, 0}), CaseError);
    EXPECT_THROW(select_case({0, 1, 1, 0, 0, 1, 0, 0}), CaseError);
}

TEST(Evaluate, CaseTwoSphere) {
    const InvariantSet s = make_invariants({0, 1, 0, 0, 0});
    EXPECT_EQ(s.case_id, CaseId::CaseII_r0);
    EXPECT_DOUBLE_EQ(by_id(s, "case2.sphere").value({1, 2, 2, 0}), 9.0);
}

TEST(Evaluate, I3Phase) {
    const CharConstants k{0, 0, -0.4, 1.2, 0.7};
    const InvariantSet s = make_invariants(k);
    const Point4 p{0.3, 0.5, -0.2, 0.8};
    const double chi = std::sqrt(k.c * k.c + k.e * k.e);
    EXPECT_NEAR(s.member(3).value(p), p.t + k.d / chi * std::atan(p.z * chi / (k.e * p.x + k.c * p.y)), 1e-15);
}

TEST(Evaluate, GeneralPlaneAtTimeZero) {
    const CharConstants k{0.3, 0.5, -0.4, 1.0, 0.7};
    const InvariantSet s = make_invariants(k);
    const Point4 p{0.3, -0.6, 1.1, 0.0};
    EXPECT_NEAR(by_id(s, "general.plane").value(p), k.c * p.x - k.e * p.y + k.b * p.z, 1e-15);
}

TEST(Evaluate, BranchOfTimeMap) {
    const InvariantSet s = make_invariants(kGeneral);
    const double t_bad = -kGeneral.d / (2 * kGeneral.a) - 0.1;
    EXPECT_THROW((void)s.member(1).value({0.1, 0.2, 0.3, t_bad}), BranchError);
}

TEST(Trajectory, StraightLineFlow) {
    const auto tr = flow_trajectory({0, 0, 0, 0, 0, 1}, {0.2, 0.3, 0.4}, 2.0, 16);
    for (const auto& s : tr) {
        EXPECT_NEAR(s.xvec[0], 0.2 + s.tau, 1e-14);
        EXPECT_NEAR(s.xvec[1], 0.3, 1e-15);
    }
}

TEST(Trajectory, PureRotationKeepsRadius) {
    const CharConstants k{0, 1, 0, 0, 0};
    const Vec3 x0{0.3, -0.8, 0.5};
    const auto tr = flow_trajectory(k, x0, 10.0, 4000);
    for (const auto& s : tr) EXPECT_NEAR(la::norm(s.xvec), la::norm(x0), 1e-10);
    const Vec3 cf = closed_form_position(k, x0, 10.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(tr.back().xvec[i], cf[i], 1e-10);
}

TEST(Trajectory, ExponentialGrowth) {
    const auto tr = flow_trajectory({1, 0, 0, 1, 0}, {0.2, -0.1, 0.3}, 1.0, 1000);
    EXPECT_NEAR(tr.back().xvec[0], 0.2 * std::exp(1.0), 1e-12);
    EXPECT_NEAR(tr.back().xvec[2], 0.3 * std::exp(1.0), 1e-12);
    EXPECT_THROW(flow_trajectory({1, 0, 0, 1, 0}, {0, 0, 0}, 1.0, 4), UsageError);
}

TEST(Trajectory, ClosedFormMatchesRungeKutta) {
    for (const auto& k : {kGeneral, kGeneralShifted}) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int n = 0; n < 5; ++n) {
            const Vec3 x0{u(rng), u(rng), u(rng)};
            const auto tr = flow_trajectory(k, x0, 5.0, 8000);
            for (std::size_t i = 0; i < tr.size(); i += 800) {
                const Vec3 cf = closed_form_position(k, x0, tr[i].tau);
                for (int c = 0; c < 3; ++c) EXPECT_NEAR(tr[i].xvec[c], cf[c], 1e-8 * (1 + std::abs(cf[c])));
            }
            EXPECT_NEAR(tr.back().t, time_along(k, 0.0, 5.0), 1e-12);
        }
    }
}

TEST(Trajectory, SingularShift) {
    EXPECT_THROW(general_shift({0, 1, 0, 1, 0, 0, 0, 1}), SingularA);
    EXPECT_THROW(closed_form_position({0, 1, 0, 1, 0, 0, 0, 1}, {0, 0, 0}, 1.0), SingularA);
}

TEST(Invariance, CaseTwoSphereAndPlane) {
    const InvariantSet s = make_invariants({0, 0.8, -0.3, 0, 0.5});
    DriftOptions opt;
    opt.tau_span = 10.0;
    opt.steps = 8000;
    const InvarianceReport r = verify_invariance(make_invariants({0, 0.8, 0, 0, 0}), opt);
    EXPECT_LE(r.members[1].max_drift, 1e-9);
    EXPECT_LE(r.members[0].max_drift, 1e-10);
    EXPECT_LE(verify_invariance(s, opt).max_drift(), 1e-9);
}

TEST(Invariance, HelicalScrewFlow) {
    const CharConstants k{0, 0.5, 0, 0, 0, 0.4, -0.3, 0.6};
    EXPECT_EQ(select_case(k), CaseId::II2);
    EXPECT_LE(verify_invariance(make_invariants(k)).max_drift(), 1e-8);
}

TEST(Invariance, EveryCaseTriple) {
    for (const auto& k : every_case()) {
        const InvariantSet s = make_invariants(k);
        ASSERT_GE(s.members.size(), 3u);
        const InvarianceReport r = verify_invariance(s, k);
        EXPECT_LE(r.max_drift(), 1e-7) << to_string(s.case_id);
        EXPECT_LE(r.max_drift(s.members.size()), 1e-7) << to_string(s.case_id);
    }
}

TEST(Invariance, ShiftReductionOnOriginalFlow) {
    const InvariantSet shifted = make_invariants(kGeneralShifted);
    EXPECT_EQ(shifted.case_id, CaseId::GeneralI_shifted);
    EXPECT_LE(verify_invariance(shifted).max_drift(), 1e-8);
    // The r = 0 set is not invariant under the translated flow.
    InvariantSet plain = make_invariants(kGeneral);
    plain.k = kGeneralShifted;
    EXPECT_GT(verify_invariance(plain).max_drift(), 1e-3);
}

TEST(Invariance, MismatchedCaseRejected) {
    EXPECT_THROW(verify_invariance(make_invariants(kGeneral), CharConstants{0, 0, -0.4, 1.2, 0.7}), CaseError);
}

TEST(Invariance, IndependentTriples) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1), ut(0.1, 1);
    for (const auto& k : every_case()) {
        const InvariantSet s = make_invariants(k);
        for (int n = 0; n < 5; ++n) {
            const Point4 p{u(rng), u(rng), u(rng), ut(rng)};
            EXPECT_GT(independence_measure(s, p), 1e-3) << to_string(s.case_id);
        }
    }
}

TEST(VelocitySpace, SubstitutionRules) {
    const InvariantSet sphere = velocity_space_invariants(make_invariants({0, 1, 0, 0, 0}));
    EXPECT_EQ(sphere.case_id, CaseId::VelocitySpace);
    EXPECT_TRUE(sphere.velocity_space);
    EXPECT_DOUBLE_EQ(by_id(sphere, "case2.sphere").value({1, 2, 2, 5}), 9.0);

    const CharConstants k{0, 0.5, -0.4, 0, 0.7};
    const InvariantSet plane = velocity_space_invariants(make_invariants(k));
    const Point4 u{0.3, -0.2, 0.9, 1.5};
    EXPECT_NEAR(plane.member(2).value(u), k.c * u.x - k.e * u.y + k.b * u.z, 1e-15);

    const InvariantSet gen = velocity_space_invariants(make_invariants(kGeneral));
    const double p = 0.4;
    const double expect = std::sqrt(kGeneral.k0 / (-2 * kGeneral.a * p + kGeneral.k0)) *
                          (kGeneral.c * u.x - kGeneral.e * u.y + kGeneral.b * u.z);
    EXPECT_NEAR(by_id(gen, "general.plane").value({u.x, u.y, u.z, p}), expect, 1e-14);
    EXPECT_LE(verify_invariance(gen).max_drift(), 1e-7);
    EXPECT_THROW(velocity_space_invariants(gen), UsageError);
}

TEST(Mesh, SphereWithinCell) {
    const InvariantSet s = make_invariants({0, 1, 0, 0, 0});
    const Mesh m = surface_mesh(s, 2, 1.0, mesh_grid(1.5, 33));
    ASSERT_FALSE(m.triangles.empty());
    for (const auto& v : m.vertices) EXPECT_LE(std::abs(la::dot(v, v) - 1.0), m.cell);
    for (const auto& t : m.triangles)
        for (auto i : t) EXPECT_LT(i, m.vertices.size());
}

TEST(Mesh, PlaneExact) {
    const CharConstants k{0, 0.5, -0.4, 0, 0.7};
    const InvariantSet s = make_invariants(k);
    const Mesh m = surface_mesh(s, 2, 0.2, mesh_grid(1.0, 21));
    ASSERT_FALSE(m.vertices.empty());
    for (const auto& v : m.vertices) EXPECT_LE(std::abs(s.member(2).value({v[0], v[1], v[2], 0}) - 0.2), 1e-12);
}

TEST(Mesh, CylinderRadius) {
    const CharConstants k{0, 0.5, -0.4, 1.2, 0.7, 0.4, -0.3, 0.6};
    const InvariantSet s = make_invariants(k);
    ASSERT_TRUE(s.cylinder.has_value());
    // The axis is a fixed line of the rotation part: K P + r_perp = 0.
    const Vec3 N = s.cylinder->direction;
    const Vec3 r = k.r();
    const Vec3 r_perp = la::sub(r, la::scale(N, la::dot(N, r)));
    const Vec3 kp = la::add(la::mul(k.K(), s.cylinder->point), r_perp);
    for (double c : kp) EXPECT_NEAR(c, 0.0, 1e-14);
    const double level = 0.64;
    const Mesh m = surface_mesh(s, 3, level, mesh_grid(2.5));
    for (const auto& v : m.vertices) {
        const Vec3 w = la::sub(v, s.cylinder->point);
        const double dist = la::norm(la::sub(w, la::scale(N, la::dot(w, N))));
        EXPECT_NEAR(dist, std::sqrt(level), m.cell);
    }
}

TEST(Mesh, EmptyLevelSetAndBadLattice) {
    const InvariantSet s = make_invariants({0, 1, 0, 0, 0});
    EXPECT_THROW(surface_mesh(s, 2, 100.0, mesh_grid(1.5, 17)), EmptyLevelSet);
    GridSpec g = mesh_grid(1.0, 17);
    g.cylindrical = true;
    EXPECT_THROW(surface_mesh(s, 2, 0.5, g), UsageError);
    EXPECT_THROW(surface_mesh(s, 7, 0.5, mesh_grid(1.0, 17)), UsageError);
}

TEST(Calibration, FindingsReported) {
    const auto entries = calibration_audit();
    const auto get = [&](const std::string& id) -> const CalibrationEntry& {
        for (const auto& e : entries)
            if (e.formula_id == id) return e;
        throw std::runtime_error("missing " + id);
    };
    for (const char* id : {"general.rotating.lambda", "general.rotating.mu", "general.rotating.nu", "general.quadric",
                           "general.plane", "general.ratio", "general.shift", "case2.phase", "case2-shifted.mu",
                           "case2-shifted.nu", "case2-shifted.axis", "I3.psi", "I4.psi"}) {
        const auto& e = get(id);
        EXPECT_LE(e.calibrated_drift, 1e-7) << id;
        EXPECT_FALSE(e.finding.empty()) << id;
    }
    EXPECT_GT(get("general.rotating.mu").reference_drift, 1e-3);
    EXPECT_GT(get("case2.phase").reference_drift, 1e-3);
    EXPECT_GT(get("case2-shifted.nu").reference_drift, 1e-3);
    EXPECT_LE(get("case2-shifted.mu").reference_drift, 1e-7);
}
