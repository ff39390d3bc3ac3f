#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsvl/catalog.hpp"
#include "nsvl/symmetry.hpp"
#include "nsvl/verify.hpp"

using namespace nsvl;
using namespace nsvl::symmetry;

namespace {

Point8 random_point8(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2, 2);
    Point8 p;
    for (double& v : p) v = u(rng);
    return p;
}

void expect_coeffs(const Coeffs& got, const Coeffs& want, double tol) {
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(got[k], want[k], tol) << "component " << k;
}

const std::vector<GeneratorSpec>& sample_generators() {
    static const std::vector<GeneratorSpec> g = {
        GeneratorSpec::with_payload(GenId::V1, FuncPreset::poly({0.3, 0.5, 0.2})),
        GeneratorSpec::with_payload(GenId::V2, FuncPreset::trig(0.4, 0.1, 1.3)),
        GeneratorSpec::with_payload(GenId::V3, FuncPreset::exp(0.5, 0.7)),
        GeneratorSpec::with_payload(GenId::V4, FuncPreset::poly({1.0, -0.5, 0.25})),
        GeneratorSpec::with_constant(GenId::V5, 0.8),
        GeneratorSpec::with_constant(GenId::V6, 1.1),
        GeneratorSpec::with_constant(GenId::V7, -0.7),
        GeneratorSpec::with_constant(GenId::V8, 0.9),
        GeneratorSpec::with_constant(GenId::V9, 0.6),
    };
    return g;
}

} // namespace

TEST(Generators, PressureShiftV4) {
    const Point8 pt{0.1, 0.2, 0.3, 2.0, 0.4, 0.5, 0.6, 0.7};
    expect_coeffs(generator_coeffs<double>(GeneratorSpec::with_payload(GenId::V4, FuncPreset::poly({0, 0, 1})), pt),
                  {0, 0, 0, 0, 0, 0, 0, 4}, 0.0);
}

TEST(Generators, RotationV6) {
    const Point8 pt{1, 2, 0, 0, 3, 5, 0, 0};
    expect_coeffs(generator_coeffs<double>(GeneratorSpec::with_constant(GenId::V6, 1), pt), {2, -1, 0, 0, 5, -3, 0, 0}, 0.0);
}

TEST(Generators, ScalingV5) {
    const Point8 pt{1, 2, 3, 4, 5, 6, 7, 8};
    expect_coeffs(generator_coeffs<double>(GeneratorSpec::with_constant(GenId::V5, 1), pt), {1, 2, 3, 8, -5, -6, -7, -16},
                  0.0);
}

TEST(Generators, PresetDerivativesAreExact) {
    const FuncPreset p = FuncPreset::poly({1, 2, 3}), e = FuncPreset::exp(2, 0.5), s = FuncPreset::trig(1, 2, 3);
    EXPECT_DOUBLE_EQ(p.derivative(2, 7.0), 6.0);
    EXPECT_DOUBLE_EQ(e.derivative(1, 1.0), std::exp(0.5));
    EXPECT_NEAR(s.derivative(2, 0.4), -9 * (std::sin(1.2) + 2 * std::cos(1.2)), 1e-14);
}

TEST(Brackets, GalileanBoostsCommute) {
    std::mt19937_64 rng(1);
    const auto a = GeneratorSpec::with_payload(GenId::V1, FuncPreset::trig(0.3, 1.2, 0.8));
    const auto b = GeneratorSpec::with_payload(GenId::V2, FuncPreset::poly({0.1, 0.4, -0.3, 0.2}));
    for (int i = 0; i < 50; ++i) expect_coeffs(lie_bracket_num(a, b, random_point8(rng)), {}, 1e-8);
}

TEST(Brackets, RotationsCloseOnRotation) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const Point8 pt = random_point8(rng);
        const Coeffs br = lie_bracket_num(GeneratorSpec::with_constant(GenId::V6, 2), GeneratorSpec::with_constant(GenId::V7, 3), pt);
        Coeffs want = generator_coeffs<double>(GeneratorSpec::with_constant(GenId::V8, 6), pt);
        for (double& v : want) v = -v;
        expect_coeffs(br, want, 1e-12);
    }
}

TEST(Brackets, BoostWithTimeTranslation) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const Point8 pt = random_point8(rng);
        const Coeffs br = lie_bracket_num(GeneratorSpec::with_payload(GenId::V1, FuncPreset::poly({0, 0, 0, 1})),
                                          GeneratorSpec::with_constant(GenId::V9, 1), pt);
        Coeffs want = generator_coeffs<double>(GeneratorSpec::with_payload(GenId::V1, FuncPreset::poly({0, 0, 3})), pt);
        for (double& v : want) v = -v;
        expect_coeffs(br, want, 1e-12);
    }
}

TEST(Brackets, Antisymmetry) {
    std::mt19937_64 rng(4);
    for (const auto& a : sample_generators())
        for (const auto& b : sample_generators()) {
            const Point8 pt = random_point8(rng);
            const Coeffs ab = lie_bracket_num(a, b, pt), ba = lie_bracket_num(b, a, pt);
            for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(ab[k], -ba[k], 1e-13);
        }
}

TEST(Brackets, FiniteDifferenceModeAgrees) {
    std::mt19937_64 rng(6);
    for (const auto& a : sample_generators())
        for (const auto& b : sample_generators()) {
            const Point8 pt = random_point8(rng);
            expect_coeffs(lie_bracket_num(a, b, pt, BracketMode::FiniteDiff), lie_bracket_num(a, b, pt), 1e-8);
        }
}

TEST(BracketTable, DefaultRunPassesAllRelations) {
    const BracketTable t = verify_bracket_table();
    ASSERT_EQ(t.relations.size(), 20u);
    EXPECT_EQ(t.passed(), 20u);
    EXPECT_TRUE(t.closure.pass);
    EXPECT_TRUE(t.all_pass());
    EXPECT_EQ(t.relations.front().id, "R01");
    EXPECT_EQ(t.relations.back().id, "R20");
}

TEST(BracketTable, PressureScalingNormalisationMatched) {
    const BracketTable t = verify_bracket_table(50, 1e-6);
    bool found = false;
    for (const auto& r : t.relations)
        for (const auto& b : r.brackets)
            if (b.lhs.find("V4") != std::string::npos && b.lhs.find("V5") != std::string::npos) {
                found = true;
                EXPECT_TRUE(b.pass);
                EXPECT_NEAR(b.fitted_scale, 1.0, 1e-9);
            }
    EXPECT_TRUE(found);
}

TEST(BracketTable, FiniteDifferenceModeAndBadInput) {
    EXPECT_TRUE(verify_bracket_table(10, 1e-6, {}, BracketMode::FiniteDiff).all_pass());
    EXPECT_THROW(verify_bracket_table(0), UsageError);
}

TEST(Transform, FullRotationIsIdentity) {
    const Point8 pt{0.3, -1.2, 0.8, 0.5, 1.1, -0.4, 0.9, 2.0};
    for (GenId g : {GenId::V6, GenId::V7, GenId::V8}) {
        const Point8 r = transform_point({GeneratorSpec::with_constant(g, 1), 2 * std::numbers::pi}, pt);
        for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(r[k], pt[k], 1e-12);
    }
}

TEST(Transform, PressureShiftAndScaling) {
    const Point8 pt{0.3, -1.2, 0.8, 0.5, 1.1, -0.4, 0.9, 2.0};
    const Point8 p4 = transform_point({GeneratorSpec::with_payload(GenId::V4, FuncPreset::poly({1.5})), 0.2}, pt);
    for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(p4[k], pt[k]);
    EXPECT_DOUBLE_EQ(p4[P], pt[P] + 0.2 * 1.5);

    const double e = 0.3;
    const Point8 p5 = transform_point({GeneratorSpec::with_constant(GenId::V5, 1), e}, pt);
    EXPECT_NEAR(p5[X], pt[X] * std::exp(e), 1e-15);
    EXPECT_NEAR(p5[T], pt[T] * std::exp(2 * e), 1e-15);
    EXPECT_NEAR(p5[U1], pt[U1] * std::exp(-e), 1e-15);
    EXPECT_NEAR(p5[P], pt[P] * std::exp(-2 * e), 1e-15);
}

TEST(Transform, GroupLaw) {
    const Point8 pt{0.3, -1.2, 0.8, 0.5, 1.1, -0.4, 0.9, 2.0};
    for (const auto& g : sample_generators()) {
        const Point8 two = transform_point({g, 0.2}, transform_point({g, 0.35}, pt));
        const Point8 one = transform_point({g, 0.55}, pt);
        for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(two[k], one[k], 1e-10) << g.describe();
        const Point8 back = transform_point(inverse({g, 0.4}), transform_point({g, 0.4}, pt));
        for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(back[k], pt[k], 1e-12);
    }
}

TEST(Transform, InfinitesimalGenerator) {
    const Point8 pt{0.3, -1.2, 0.8, 0.5, 1.1, -0.4, 0.9, 2.0};
    for (const auto& g : sample_generators()) {
        const Coeffs c = generator_coeffs<double>(g, pt);
        double prev = 0.0;
        for (double eps : {1e-2, 5e-3}) {
            const Point8 r = transform_point({g, eps}, pt);
            double err = 0.0;
            for (std::size_t k = 0; k < 8; ++k) err = std::max(err, std::abs((r[k] - pt[k]) / eps - c[k]));
            if (prev > 1e-12) {
                EXPECT_NEAR(prev / err, 2.0, 0.1) << g.describe();
            }
            prev = err;
        }
    }
}

TEST(Pushforward, TimeTranslationOfSteadyVortex) {
    const FlowField f = make_default_field(FamilyId::BurgersVortex);
    const auto pf = pushforward_field(f, {GeneratorSpec::with_constant(GenId::V9, 1), 2.5});
    for (const Point4 p : {Point4{0.3, 0.2, 0.1, 0.0}, Point4{-1.0, 0.5, 2.0, 3.0}}) {
        const FlowState a = eval_state(f, p), b = eval_pushforward(pf, p);
        for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(a.u[i], b.u[i]);
        EXPECT_DOUBLE_EQ(a.p, b.p);
    }
}

TEST(Pushforward, RotatedShearLayerAndBoostedSaddle) {
    const FlowField sl = make_default_field(FamilyId::BurgersShearLayer);
    const GridSpec& g = family_info(FamilyId::BurgersShearLayer).standard_grid;
    EXPECT_LE(ns_residual(pushforward_field(sl, {GeneratorSpec::with_constant(GenId::V6, 1), 0.4}), g).max_momentum(), 1e-6);

    const FlowField es = make_default_field(FamilyId::ExpSaddle);
    const GroupElement boost{GeneratorSpec::with_payload(GenId::V1, FuncPreset::poly({0, 0, 1})), 0.3};
    const auto pf = pushforward_field(es, boost);
    EXPECT_LE(ns_residual(pf, family_info(FamilyId::ExpSaddle).standard_grid).max_momentum(), 1e-6);
    // p' = p - eps x g'' - eps^2 g g''/2 at the base point.
    const Point4 base{0.4, 0.3, -0.2, 0.5};
    const Point4 img = map_point(boost, base);
    const double g0 = 0.25, g2 = 2.0;
    EXPECT_NEAR(eval_pushforward(pf, img).p, eval_state(es, base).p - 0.3 * g2 * base.x - 0.5 * 0.09 * g0 * g2, 1e-14);
}

TEST(Pushforward, EquivarianceForEveryFamily) {
    for (FamilyId id : kAllFamilies) {
        const FlowField f = make_default_field(id);
        const auto all = family_info(id).standard_grid.points();
        std::vector<Point4> pts;
        for (std::size_t i = 0; i < all.size(); i += 13) pts.push_back(all[i]);
        const ResidualReport base = ns_residual_points(f, pts);
        const double floor = 1e-12 * (1 + f.rate() * f.rate());
        for (const auto& g : sample_generators()) {
            const GroupElement el{g, 0.1};
            const ResidualReport r = ns_residual_points(pushforward_field(f, el), map_points(el, pts));
            EXPECT_LE(r.max_momentum(), 10 * std::max(base.max_momentum(), floor)) << family_info(id).key << " " << g.describe();
            EXPECT_LE(r.max_div, 10 * std::max(base.max_div, floor)) << family_info(id).key << " " << g.describe();
        }
    }
}

TEST(Pushforward, PulledBackPointOutsideDomain) {
    const FlowField f = make_default_field(FamilyId::BurgersLundgren);
    const auto pf = pushforward_field(f, {GeneratorSpec::with_constant(GenId::V9, 1), 2.0});
    EXPECT_THROW(eval_pushforward(pf, {0.1, 0.1, 0.1, 1.0}), DomainError);
}
