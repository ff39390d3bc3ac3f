#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "nsvl/specfun.hpp"

using namespace nsvl;
using namespace nsvl::specfun;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Maclaurin series of erf in 50-digit arithmetic.
double erf_series(double xd) {
    const Big x = xd;
    Big term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        sum += term / (2 * n + 1);
    }
    return static_cast<double>(sum * 2 / boost::multiprecision::sqrt(boost::math::constants::pi<Big>()));
}

Big kummer_big(double a, double b, double z) {
    Big term = 1, sum = 1;
    for (int n = 0; n < 400; ++n) {
        term *= (Big(a) + n) / (Big(b) + n) * Big(z) / (n + 1);
        sum += term;
    }
    return sum;
}

} // namespace

TEST(Kummer, AlphaZeroIsOne) { EXPECT_EQ(kummer_m(0.0, 0.5, 3.7).value, 1.0); }

TEST(Kummer, ZeroArgumentIsOne) { EXPECT_EQ(kummer_m(0.3, 1.5, 0.0).value, 1.0); }

TEST(Kummer, HalfThreeHalvesIsScaledErf) {
    const double ref = static_cast<double>(kummer_big(0.5, 1.5, -1.0));
    EXPECT_NEAR(kummer_m(0.5, 1.5, -1.0).value, ref, 1e-15);
    EXPECT_NEAR(ref, std::sqrt(std::numbers::pi) / 2 * std::erf(1.0), 1e-15);
}

TEST(Kummer, MatchesExtendedPrecisionSeries) {
    for (double z : {-20.0, -7.5, -1.0, 0.4, 3.0, 12.0, 30.0}) {
        const double ref = static_cast<double>(kummer_big(0.75, 2.25, z));
        EXPECT_NEAR(kummer_m(0.75, 2.25, z).value / ref, 1.0, 1e-12) << z;
    }
}

TEST(Kummer, RejectsNonPositiveIntegerBeta) {
    EXPECT_THROW(kummer_m(0.5, 0.0, 1.0), DomainError);
    EXPECT_THROW(kummer_m(0.5, -2.0, 1.0), DomainError);
    EXPECT_NO_THROW(kummer_m(0.5, -2.5, 1.0));
}

TEST(Kummer, TransformationAtRandomArguments) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(-3, 3), ub(0.2, 4), uz(-10, 10);
    for (int i = 0; i < 100; ++i) {
        const double a = ua(rng), b = ub(rng), z = uz(rng);
        const double lhs = kummer(a, b, z), rhs = std::exp(z) * kummer(b - a, b, -z);
        EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs));
    }
}

TEST(Kummer, JetDerivativeFollowsContiguity) {
    const Jet z = Jet::variable(1.3, 0);
    const Jet m = kummer(0.4, 1.7, z);
    EXPECT_NEAR(m.d[0], 0.4 / 1.7 * kummer(1.4, 2.7, 1.3), 1e-14);
    EXPECT_NEAR(m.dd[0], 0.4 * 1.4 / (1.7 * 2.7) * kummer(2.4, 3.7, 1.3), 1e-14);
}

TEST(Erf, ZeroIsZeroForBoth) {
    const ErfPair p = erf_pair(0.0);
    EXPECT_EQ(p.erf.value, 0.0);
    EXPECT_EQ(p.erfi.value, 0.0);
}

TEST(Erf, OneMatchesSeriesOracle) {
    EXPECT_NEAR(erf_pair(1.0).erf.value, erf_series(1.0), 1e-14);
    EXPECT_NEAR(erf_pair(1.0).erf.value, 0.8427007929, 1e-10);
}

TEST(Erf, IsOdd) {
    for (double x : {0.5, 2.0, 5.0}) {
        EXPECT_EQ(erf_pair(-x).erf.value, -erf_pair(x).erf.value);
        EXPECT_EQ(erf_pair(-x).erfi.value, -erf_pair(x).erfi.value);
    }
}

TEST(Erfi, MatchesSeriesAndDawsonRelation) {
    for (double x : {0.1, 0.9, 2.5, 4.0, 7.0, 10.0}) {
        Big term = x, sum = x, bx = x;
        for (int n = 1; n < 600; ++n) {
            term *= bx * bx / n;
            sum += term / (2 * n + 1);
        }
        const double ref = static_cast<double>(sum * 2 / boost::multiprecision::sqrt(boost::math::constants::pi<Big>()));
        EXPECT_NEAR(erfi(x) / ref, 1.0, 1e-12) << x;
        EXPECT_NEAR(erfi(x) * std::exp(-x * x), 2.0 / std::sqrt(std::numbers::pi) * dawson(x), 1e-10);
    }
}

TEST(Erfi, OverflowsBeyondDoubleRange) { EXPECT_THROW(erfi(27.0), OverflowError); }

TEST(Bessel, JZeroAtOrigin) { EXPECT_EQ(bessel_cyl(BesselKind::J, 0, 0).value, 1.0); }

TEST(Bessel, HalfIntegerClosedForms) {
    for (double x : {1.0, 2.0}) {
        const double s = std::sqrt(2.0 / (std::numbers::pi * x));
        EXPECT_NEAR(bessel_cyl(BesselKind::J, 0.5, x).value, s * std::sin(x), 1e-14);
        EXPECT_NEAR(bessel_cyl(BesselKind::Y, 0.5, x).value, -s * std::cos(x), 1e-14);
    }
    EXPECT_NEAR(bessel_i(0.5, 1.0).value, std::sqrt(2.0 / std::numbers::pi) * std::sinh(1.0), 1e-14);
}

TEST(Bessel, LargeArgumentAsymptotics) {
    const double x = 50.0, mu = 1.0;
    const double approx = std::sqrt(2.0 / (std::numbers::pi * x)) * std::cos(x - mu * std::numbers::pi / 2 - std::numbers::pi / 4);
    EXPECT_NEAR(bessel_cyl(BesselKind::J, mu, x).value, approx, 0.02 * std::abs(approx));
}

TEST(Bessel, DomainErrors) {
    EXPECT_THROW(bessel_cyl(BesselKind::Y, 1.0, 0.0), DomainError);
    EXPECT_THROW(bessel_cyl(BesselKind::Y, 1.0, -1.0), DomainError);
    EXPECT_THROW(bessel_cyl(BesselKind::J, 0.3, -1.0), DomainError);
    EXPECT_THROW(bessel_i(1.0, -0.5), DomainError);
}

TEST(Bessel, ModifiedSmallArgumentLaw) {
    EXPECT_EQ(bessel_i(0, 0).value, 1.0);
    const double x = 1e-8, nu = -0.25;
    const double lead = std::pow(x / 2, nu) / std::tgamma(nu + 1);
    EXPECT_NEAR(bessel_i(nu, x).value / lead, 1.0, 1e-6);
}

TEST(Bessel, Wronskian) {
    for (double mu : {-4.5, -1.0, 0.0, 0.25, 2.0, 5.0})
        for (double x : {0.3, 1.0, 7.0, 40.0, 100.0}) {
            const double jp = 0.5 * (cyl_j(mu - 1, x) - cyl_j(mu + 1, x));
            const double yp = 0.5 * (cyl_y(mu - 1, x) - cyl_y(mu + 1, x));
            const double w = 2.0 / (std::numbers::pi * x);
            EXPECT_NEAR((cyl_j(mu, x) * yp - jp * cyl_y(mu, x)) / w, 1.0, 1e-8) << mu << " " << x;
        }
}

TEST(Bessel, ScaledModifiedIsContinuousAcrossExpansionSwitch) {
    for (double nu : {-0.25, 0.75}) {
        const double below = std::exp(-500.0) * cyl_i(nu, 500.0), above = cyl_i_scaled(nu, 500.0);
        EXPECT_NEAR(above / below, 1.0, 1e-12);
        const Jet j = cyl_i_scaled(nu, Jet::variable(800.0, 0));
        const double h = 1e-2;
        EXPECT_NEAR(j.d[0], (cyl_i_scaled(nu, 800.0 + h) - cyl_i_scaled(nu, 800.0 - h)) / (2 * h), 1e-12);
    }
    EXPECT_GT(cyl_i_scaled(-0.25, 1e6), 0.0);
}

TEST(Ei, MinusOneMatchesQuadrature) {
    // Ei(-1) = -int_1^inf e^{-s}/s ds.
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double s) { return std::exp(-s) / s; }, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    EXPECT_NEAR(expint_ei(-1.0).value, -q, 1e-13);
    EXPECT_NEAR(expint_ei(-1.0).value, -0.2193839344, 1e-10);
}

TEST(Ei, NegativeOnNegativeAxisAndSingularAtZero) {
    for (double x : {-50.0, -10.0, -1.0, -1e-3, -1e-8}) EXPECT_LT(expint_ei(x).value, 0.0);
    EXPECT_THROW(expint_ei(0.0), DomainError);
}

TEST(Ei, GapDecaysAtLargeRadius) {
    EXPECT_LT(std::abs(ei(-200.0) - ei(-100.0)), 1e-40);
    EXPECT_NEAR(ei_gap(1.0), ei(-1.0) - ei(-2.0), 1e-15);
}

TEST(Oracle, FrozenSampleFile) {
    std::ifstream in(std::string(NSVL_TEST_DATA) + "/specfun_oracle.csv");
    ASSERT_TRUE(in.good());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "kernel,order,arg,value");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string k, ord, a, v;
        std::getline(ss, k, ',');
        std::getline(ss, ord, ',');
        std::getline(ss, a, ',');
        std::getline(ss, v, ',');
        const double x = std::stod(a), ref = std::stod(v);
        ++rows;
        if (k == "kummer") {
            const auto c = ord.find(':');
            EXPECT_NEAR(kummer(std::stod(ord.substr(0, c)), std::stod(ord.substr(c + 1)), x), ref, 1e-12 * std::abs(ref)) << line;
        } else if (k == "erf") {
            EXPECT_NEAR(specfun::erf(x), ref, 1e-14) << line;
        } else if (k == "erfi") {
            EXPECT_NEAR(erfi(x), ref, 1e-12 * std::abs(ref)) << line;
        } else if (k == "bessel_j") {
            EXPECT_NEAR(cyl_j(std::stod(ord), x), ref, 1e-10 * std::abs(ref)) << line;
        } else if (k == "bessel_y") {
            EXPECT_NEAR(cyl_y(std::stod(ord), x), ref, 1e-10 * std::abs(ref)) << line;
        } else if (k == "bessel_i") {
            EXPECT_NEAR(cyl_i(std::stod(ord), x), ref, 1e-10 * std::abs(ref)) << line;
        } else if (k == "ei") {
            EXPECT_NEAR(ei(x), ref, 1e-10 * std::abs(ref)) << line;
        } else {
            ADD_FAILURE() << "unknown kernel " << k;
        }
    }
    EXPECT_EQ(rows, 200);
}
