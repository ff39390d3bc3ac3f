#pragma once

// Lie-point symmetry generators V1..V9 of the incompressible Navier-Stokes
// equations (zero body force), their commutators, finite group actions on
// points and the pushforward of whole solutions.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/evaluator.hpp"
#include "nsvl/core/jet.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl::symmetry {

// Jet-space base point (x, y, z, t, u1, u2, u3, p).
template <class S>
using Point8T = std::array<S, 8>;
using Point8 = Point8T<double>;
using Coeffs = std::array<double, 8>;

enum Coord : std::size_t { X = 0, Y, Z, T, U1, U2, U3, P };

enum class GenId { V1 = 1, V2, V3, V4, V5, V6, V7, V8, V9 };

inline std::string to_string(GenId g) { return "V" + std::to_string(static_cast<int>(g)); }
inline bool has_payload(GenId g) { return static_cast<int>(g) <= 4; }

// Smooth function of time with exact derivatives of every order.
struct FuncPreset {
    enum class Kind { Poly, Exp, Trig };
    Kind kind = Kind::Poly;
    // Poly: c0 + c1 t + ...; Exp: A e^{l t} as {A, l}; Trig: A sin(w t) + B cos(w t) as {A, B, w}.
    std::vector<double> coeffs{1.0};

    static FuncPreset poly(std::vector<double> c) { return {Kind::Poly, std::move(c)}; }
    static FuncPreset exp(double amp, double rate) { return {Kind::Exp, {amp, rate}}; }
    static FuncPreset trig(double a, double b, double w) { return {Kind::Trig, {a, b, w}}; }

    [[nodiscard]] double derivative(int n, double t) const {
        switch (kind) {
        case Kind::Poly: {
            double acc = 0.0;
            for (int k = static_cast<int>(coeffs.size()) - 1; k >= n; --k) {
                double fall = 1.0;
                for (int m = 0; m < n; ++m) fall *= static_cast<double>(k - m);
                acc = acc * t + coeffs[static_cast<std::size_t>(k)] * fall;
            }
            return acc;
        }
        case Kind::Exp: return coeffs.at(0) * std::pow(coeffs.at(1), n) * std::exp(coeffs.at(1) * t);
        case Kind::Trig: {
            const double w = coeffs.at(2), ph = w * t + 0.5 * std::numbers::pi * n, wn = std::pow(w, n);
            return wn * (coeffs.at(0) * std::sin(ph) + coeffs.at(1) * std::cos(ph));
        }
        }
        return 0.0;
    }

    template <class S>
    S at(int n, const S& t) const {
        if constexpr (is_jet_v<S>) {
            return lift(t, derivative(n, t.v), derivative(n + 1, t.v), derivative(n + 2, t.v));
        } else {
            return derivative(n, t);
        }
    }

    [[nodiscard]] std::string describe() const;
};

inline std::string FuncPreset::describe() const {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    switch (kind) {
    case Kind::Poly: {
        std::string s = "poly(";
        for (std::size_t i = 0; i < coeffs.size(); ++i) s += (i ? "," : "") + num(coeffs[i]);
        return s + ")";
    }
    case Kind::Exp: return "exp(" + num(coeffs.at(0)) + "," + num(coeffs.at(1)) + ")";
    case Kind::Trig: return "trig(" + num(coeffs.at(0)) + "," + num(coeffs.at(1)) + "," + num(coeffs.at(2)) + ")";
    }
    return "?";
}

// Derivatives 0..kOrder-1 of a function of t at one fixed instant, closed
// under sums, products and multiplication by t.
struct TSeries {
    static constexpr int kOrder = 6;
    std::array<double, kOrder> c{};
    double t = 0.0;

    static TSeries of(const FuncPreset& f, double t0) {
        TSeries s;
        s.t = t0;
        for (int n = 0; n < kOrder; ++n) s.c[static_cast<std::size_t>(n)] = f.derivative(n, t0);
        return s;
    }
    [[nodiscard]] TSeries derivative() const {
        TSeries s;
        s.t = t;
        for (int n = 0; n + 1 < kOrder; ++n) s.c[static_cast<std::size_t>(n)] = c[static_cast<std::size_t>(n + 1)];
        return s;
    }
    [[nodiscard]] TSeries times_t() const {
        TSeries s;
        s.t = t;
        for (int n = 0; n < kOrder; ++n) {
            s.c[static_cast<std::size_t>(n)] = t * c[static_cast<std::size_t>(n)];
            if (n > 0) s.c[static_cast<std::size_t>(n)] += n * c[static_cast<std::size_t>(n - 1)];
        }
        return s;
    }
    template <class S>
    S at(int n, const S&) const {
        return S(c.at(static_cast<std::size_t>(n)));
    }
};

inline TSeries operator+(TSeries a, const TSeries& b) {
    for (std::size_t n = 0; n < a.c.size(); ++n) a.c[n] += b.c[n];
    return a;
}
inline TSeries operator*(double s, TSeries a) {
    for (double& v : a.c) v *= s;
    return a;
}
inline TSeries operator-(const TSeries& a, const TSeries& b) { return a + (-1.0) * b; }
inline TSeries operator*(const TSeries& a, const TSeries& b) {
    TSeries r;
    r.t = a.t;
    for (int n = 0; n < TSeries::kOrder; ++n) {
        double binom = 1.0;
        for (int k = 0; k <= n; ++k) {
            r.c[static_cast<std::size_t>(n)] += binom * a.c[static_cast<std::size_t>(k)] * b.c[static_cast<std::size_t>(n - k)];
            binom = binom * (n - k) / (k + 1);
        }
    }
    return r;
}

struct GeneratorSpec {
    GenId id = GenId::V1;
    FuncPreset payload{};   // g, h, r, k for V1..V4
    double constant = 1.0;  // a, b, c, d, e for V5..V9

    static GeneratorSpec with_payload(GenId id, FuncPreset f) { return {id, std::move(f), 1.0}; }
    static GeneratorSpec with_constant(GenId id, double c) { return {id, FuncPreset{}, c}; }
    [[nodiscard]] std::string describe() const {
        if (has_payload(id)) return to_string(id) + "(" + payload.describe() + ")";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", constant);
        return to_string(id) + "(" + buf + ")";
    }
};

// Coefficients (xi1..xi4, phi1..phi4) of a generator whose payload is any
// object exposing at(n, t) for the n-th time derivative.
template <class S, class Payload>
Point8T<S> coeffs_with(GenId id, const Payload& f, double k, const Point8T<S>& q) {
    Point8T<S> c;
    c.fill(S(0.0));
    const S& t = q[T];
    switch (id) {
    case GenId::V1:
        c[X] = f.at(0, t);
        c[U1] = f.at(1, t);
        c[P] = -f.at(2, t) * q[X];
        break;
    case GenId::V2:
        c[Y] = f.at(0, t);
        c[U2] = f.at(1, t);
        c[P] = -f.at(2, t) * q[Y];
        break;
    case GenId::V3:
        c[Z] = f.at(0, t);
        c[U3] = f.at(1, t);
        c[P] = -f.at(2, t) * q[Z];
        break;
    case GenId::V4: c[P] = f.at(0, t); break;
    case GenId::V5:
        c[X] = k * q[X];
        c[Y] = k * q[Y];
        c[Z] = k * q[Z];
        c[T] = 2.0 * k * q[T];
        c[U1] = -k * q[U1];
        c[U2] = -k * q[U2];
        c[U3] = -k * q[U3];
        c[P] = -2.0 * k * q[P];
        break;
    case GenId::V6:
        c[X] = k * q[Y];
        c[Y] = -k * q[X];
        c[U1] = k * q[U2];
        c[U2] = -k * q[U1];
        break;
    case GenId::V7:
        c[Y] = k * q[Z];
        c[Z] = -k * q[Y];
        c[U2] = k * q[U3];
        c[U3] = -k * q[U2];
        break;
    case GenId::V8:
        c[X] = k * q[Z];
        c[Z] = -k * q[X];
        c[U1] = k * q[U3];
        c[U3] = -k * q[U1];
        break;
    case GenId::V9: c[T] = S(k); break;
    }
    return c;
}

template <class S>
Point8T<S> generator_coeffs(const GeneratorSpec& g, const Point8T<S>& q) {
    return coeffs_with<S>(g.id, g.payload, g.constant, q);
}

enum class BracketMode { Analytic, FiniteDiff };

namespace detail {

// A(f) for every coefficient f of B: forward-mode directional derivative.
inline Coeffs directional_analytic(const GeneratorSpec& a, const GeneratorSpec& b, const Point8& pt) {
    const Coeffs da = generator_coeffs<double>(a, pt);
    Point8T<Jet> q;
    for (std::size_t k = 0; k < 8; ++k) {
        q[k] = Jet(pt[k]);
        q[k].d[0] = da[k];
    }
    const auto cb = generator_coeffs<Jet>(b, q);
    Coeffs out{};
    for (std::size_t k = 0; k < 8; ++k) out[k] = cb[k].d[0];
    return out;
}

// Same quantity with 4th-order central differences along x, y, z, u, p and
// the exact payload derivative along t.
inline Coeffs directional_fd(const GeneratorSpec& a, const GeneratorSpec& b, const Point8& pt) {
    const Coeffs da = generator_coeffs<double>(a, pt);
    Coeffs out{};
    for (std::size_t j = 0; j < 8; ++j) {
        if (da[j] == 0.0) continue;
        Coeffs grad{};
        if (j == T) {
            Point8T<Jet> q;
            for (std::size_t k = 0; k < 8; ++k) q[k] = Jet(pt[k]);
            q[T].d[0] = 1.0;
            const auto cb = generator_coeffs<Jet>(b, q);
            for (std::size_t k = 0; k < 8; ++k) grad[k] = cb[k].d[0];
        } else {
            const double h = 1e-3 * (1.0 + std::abs(pt[j]));
            std::array<Coeffs, 4> s;
            const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
            for (int m = 0; m < 4; ++m) {
                Point8 q = pt;
                q[j] += offs[m] * h;
                s[static_cast<std::size_t>(m)] = generator_coeffs<double>(b, q);
            }
            for (std::size_t k = 0; k < 8; ++k) grad[k] = (s[0][k] - 8.0 * s[1][k] + 8.0 * s[2][k] - s[3][k]) / (12.0 * h);
        }
        for (std::size_t k = 0; k < 8; ++k) out[k] += da[j] * grad[k];
    }
    return out;
}

} // namespace detail

// [A, B]^k = A(B^k) - B(A^k).
inline Coeffs lie_bracket_num(const GeneratorSpec& a, const GeneratorSpec& b, const Point8& pt,
                              BracketMode mode = BracketMode::Analytic) {
    const auto dir = mode == BracketMode::Analytic ? detail::directional_analytic : detail::directional_fd;
    const Coeffs ab = dir(a, b, pt), ba = dir(b, a, pt);
    Coeffs out{};
    for (std::size_t k = 0; k < 8; ++k) out[k] = ab[k] - ba[k];
    return out;
}

// ---------------------------------------------------------------------------
// Commutator table

// One generator term on the right side of a bracket relation.
struct RhsTerm {
    GenId id;
    TSeries payload{};
    double constant = 0.0;
};

struct BracketSide {
    const GeneratorSpec* spec;
    TSeries series;
};

struct BracketRule {
    GenId a, b;
    std::string lhs;
    std::string rhs;  // reference right side; "0" for commuting pairs
    std::function<std::vector<RhsTerm>(const BracketSide&, const BracketSide&)> eval;
};

struct Relation {
    std::string id;
    std::vector<BracketRule> rules;
};

namespace detail {

inline BracketRule zero(GenId a, GenId b) {
    return {a, b, "[" + to_string(a) + "," + to_string(b) + "]", "0",
            [](const BracketSide&, const BracketSide&) { return std::vector<RhsTerm>{}; }};
}
using Sides = const BracketSide&;
inline RhsTerm term(GenId id, TSeries s) { return {id, s, 0.0}; }
inline RhsTerm term(GenId id, double c) { return {id, {}, c}; }

// second-derivative cross term g2 g1'' - g1 g2''
inline TSeries wronskian2(const TSeries& f1, const TSeries& f2) {
    return f2 * f1.derivative().derivative() - f1 * f2.derivative().derivative();
}
// a f - 2 a f' t
inline TSeries scaled_drift(double a, const TSeries& f) { return a * f - (2.0 * a) * f.derivative().times_t(); }

inline std::vector<Relation> build_relations() {
    using G = GenId;
    const auto rule = [](G a, G b, std::string lhs, std::string rhs, auto fn) {
        return BracketRule{a, b, std::move(lhs), std::move(rhs), fn};
    };
    std::vector<Relation> r;
    r.push_back({"R01",
                 {rule(G::V1, G::V1, "[V1(g1),V1(g2)]", "V4(g2 g1'' - g1 g2'')",
                       [](Sides A, Sides B) { return std::vector{term(G::V4, wronskian2(A.series, B.series))}; }),
                  rule(G::V2, G::V2, "[V2(h1),V2(h2)]", "V4(h2 h1'' - h1 h2'')",
                       [](Sides A, Sides B) { return std::vector{term(G::V4, wronskian2(A.series, B.series))}; })}});
    r.push_back({"R02",
                 {rule(G::V3, G::V3, "[V3(r1),V3(r2)]", "V4(r2 r1'' - r1 r2'')",
                       [](Sides A, Sides B) { return std::vector{term(G::V4, wronskian2(A.series, B.series))}; }),
                  zero(G::V4, G::V4)}});
    r.push_back({"R03", {zero(G::V1, G::V2), zero(G::V1, G::V3)}});
    r.push_back({"R04",
                 {zero(G::V1, G::V4), rule(G::V1, G::V5, "[V1(g),V5(a)]", "V1(a g - 2 a g' t)", [](Sides A, Sides B) {
                      return std::vector{term(G::V1, scaled_drift(B.spec->constant, A.series))};
                  })}});
    r.push_back({"R05",
                 {rule(G::V1, G::V6, "[V1(g),V6(b)]", "-V2(b g)",
                       [](Sides A, Sides B) { return std::vector{term(G::V2, -B.spec->constant * A.series)}; }),
                  zero(G::V1, G::V7)}});
    r.push_back({"R06",
                 {rule(G::V1, G::V8, "[V1(g),V8(d)]", "-V3(d g)",
                       [](Sides A, Sides B) { return std::vector{term(G::V3, -B.spec->constant * A.series)}; }),
                  rule(G::V1, G::V9, "[V1(g),V9(e)]", "-V1(e g')", [](Sides A, Sides B) {
                      return std::vector{term(G::V1, -B.spec->constant * A.series.derivative())};
                  })}});
    r.push_back({"R07", {zero(G::V2, G::V3), zero(G::V2, G::V4)}});
    r.push_back({"R08",
                 {rule(G::V2, G::V5, "[V2(h),V5(a)]", "V2(a h - 2 a h' t)",
                       [](Sides A, Sides B) { return std::vector{term(G::V2, scaled_drift(B.spec->constant, A.series))}; }),
                  rule(G::V2, G::V6, "[V2(h),V6(b)]", "V1(b h)",
                       [](Sides A, Sides B) { return std::vector{term(G::V1, B.spec->constant * A.series)}; })}});
    r.push_back({"R09",
                 {rule(G::V2, G::V7, "[V2(h),V7(c)]", "-V3(c h)",
                       [](Sides A, Sides B) { return std::vector{term(G::V3, -B.spec->constant * A.series)}; }),
                  zero(G::V2, G::V8)}});
    r.push_back({"R10",
                 {rule(G::V2, G::V9, "[V2(h),V9(e)]", "-V2(e h')",
                       [](Sides A, Sides B) {
                           return std::vector{term(G::V2, -B.spec->constant * A.series.derivative())};
                       }),
                  zero(G::V3, G::V4)}});
    r.push_back({"R11",
                 {rule(G::V3, G::V5, "[V3(r),V5(a)]", "V3(a r - 2 a r' t)",
                       [](Sides A, Sides B) { return std::vector{term(G::V3, scaled_drift(B.spec->constant, A.series))}; }),
                  zero(G::V3, G::V6)}});
    r.push_back({"R12",
                 {rule(G::V3, G::V7, "[V3(r),V7(c)]", "V2(c r)",
                       [](Sides A, Sides B) { return std::vector{term(G::V2, B.spec->constant * A.series)}; }),
                  rule(G::V3, G::V8, "[V3(r),V8(d)]", "V1(d r)",
                       [](Sides A, Sides B) { return std::vector{term(G::V1, B.spec->constant * A.series)}; })}});
    r.push_back({"R13",
                 {rule(G::V3, G::V9, "[V3(r),V9(e)]", "-V3(e r')",
                       [](Sides A, Sides B) {
                           return std::vector{term(G::V3, -B.spec->constant * A.series.derivative())};
                       }),
                  rule(G::V4, G::V5, "[V4(k),V5(a)]", "-2 V4(a k + a k' t)", [](Sides A, Sides B) {
                      const double a = B.spec->constant;
                      return std::vector{term(G::V4, -2.0 * (a * A.series + a * A.series.derivative().times_t()))};
                  })}});
    r.push_back({"R14", {zero(G::V4, G::V6), zero(G::V4, G::V7)}});
    r.push_back({"R15",
                 {zero(G::V4, G::V8), rule(G::V4, G::V9, "[V4(k),V9(e)]", "-V4(e k')", [](Sides A, Sides B) {
                      return std::vector{term(G::V4, -B.spec->constant * A.series.derivative())};
                  })}});
    r.push_back({"R16", {zero(G::V5, G::V6), zero(G::V5, G::V7)}});
    r.push_back({"R17",
                 {zero(G::V5, G::V8), rule(G::V5, G::V9, "[V5(a),V9(e)]", "-2 V9(a e)", [](Sides A, Sides B) {
                      return std::vector{term(G::V9, -2.0 * A.spec->constant * B.spec->constant)};
                  })}});
    r.push_back({"R18",
                 {rule(G::V6, G::V7, "[V6(b),V7(c)]", "-V8(b c)",
                       [](Sides A, Sides B) {
                           return std::vector{term(G::V8, -A.spec->constant * B.spec->constant)};
                       }),
                  rule(G::V6, G::V8, "[V6(b),V8(d)]", "V7(b d)", [](Sides A, Sides B) {
                      return std::vector{term(G::V7, A.spec->constant * B.spec->constant)};
                  })}});
    r.push_back({"R19",
                 {zero(G::V6, G::V9), rule(G::V7, G::V8, "[V7(c),V8(d)]", "-V6(c d)", [](Sides A, Sides B) {
                      return std::vector{term(G::V6, -A.spec->constant * B.spec->constant)};
                  })}});
    r.push_back({"R20", {zero(G::V7, G::V9), zero(G::V8, G::V9)}});
    return r;
}

} // namespace detail

inline const std::vector<Relation>& bracket_relations() {
    static const std::vector<Relation> table = detail::build_relations();
    return table;
}

inline Coeffs rhs_coeffs(const std::vector<RhsTerm>& terms, const Point8& pt) {
    Coeffs out{};
    for (const auto& t : terms) {
        const Coeffs c = coeffs_with<double>(t.id, t.payload, t.constant, pt);
        for (std::size_t k = 0; k < 8; ++k) out[k] += c[k];
    }
    return out;
}

struct SampleSpace {
    double box = 2.0;  // Point8 drawn from [-box, box]^8
    std::uint64_t seed = 20240531;
};

namespace detail {

inline FuncPreset random_preset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return FuncPreset::poly({u(rng), u(rng), u(rng), u(rng)});
    case 1: return FuncPreset::exp(u(rng), u(rng));
    default: return FuncPreset::trig(u(rng), u(rng), 0.5 + 0.5 * (u(rng) + 1.0));
    }
}

inline GeneratorSpec random_spec(GenId id, std::mt19937_64& rng) {
    if (has_payload(id)) return GeneratorSpec::with_payload(id, random_preset(rng));
    std::uniform_real_distribution<double> u(0.25, 2.0);
    const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    return GeneratorSpec::with_constant(id, sign * u(rng));
}

inline Point8 random_point(std::mt19937_64& rng, double box) {
    std::uniform_real_distribution<double> u(-box, box);
    Point8 p;
    for (double& v : p) v = u(rng);
    return p;
}

} // namespace detail

struct BracketResult {
    std::string lhs;
    std::string rhs;
    double max_deviation = 0.0;
    // Least-squares scale s with numeric bracket ~ s * (reference right side / its printed factor);
    // 1 whenever the printed normalisation is matched. NaN for zero right sides.
    double fitted_scale = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
};

struct RelationResult {
    std::string id;
    std::vector<BracketResult> brackets;
    bool pass = false;
    [[nodiscard]] double max_deviation() const {
        double m = 0.0;
        for (const auto& b : brackets) m = std::max(m, b.max_deviation);
        return m;
    }
};

struct ClosureResult {
    std::size_t checks = 0;
    double max_residual = 0.0;  // distance of [Vi,Vj] from span{V6, V7, V8}
    bool pass = false;
};

struct BracketTable {
    std::vector<RelationResult> relations;
    ClosureResult closure;
    std::size_t samples = 0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    BracketMode mode = BracketMode::Analytic;

    [[nodiscard]] std::size_t passed() const {
        return static_cast<std::size_t>(std::count_if(relations.begin(), relations.end(), [](const auto& r) { return r.pass; }));
    }
    [[nodiscard]] bool all_pass() const { return passed() == relations.size() && closure.pass; }
};

inline ClosureResult verify_rotation_closure(std::size_t samples, double tol, const SampleSpace& space = {},
                                             BracketMode mode = BracketMode::Analytic) {
    std::mt19937_64 rng(space.seed ^ 0x9e3779b97f4a7c15ULL);
    const GenId rot[3] = {GenId::V6, GenId::V7, GenId::V8};
    ClosureResult out;
    for (std::size_t s = 0; s < samples; ++s) {
        const Point8 pt = detail::random_point(rng, space.box);
        std::array<Coeffs, 3> basis;
        for (int i = 0; i < 3; ++i) basis[static_cast<std::size_t>(i)] = generator_coeffs<double>(GeneratorSpec::with_constant(rot[i], 1.0), pt);
        Mat3 gram{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t k = 0; k < 8; ++k) gram[i][j] += basis[i][k] * basis[j][k];
        for (GenId a : rot)
            for (GenId b : rot) {
                const Coeffs br = lie_bracket_num(detail::random_spec(a, rng), detail::random_spec(b, rng), pt, mode);
                Vec3 rhs{};
                for (std::size_t i = 0; i < 3; ++i)
                    for (std::size_t k = 0; k < 8; ++k) rhs[i] += basis[i][k] * br[k];
                Vec3 coef{};
                if (std::abs(la::det(gram)) > 1e-14) coef = la::solve(gram, rhs);
                double res = 0.0, scale = 1.0;
                for (std::size_t k = 0; k < 8; ++k) {
                    double fit = 0.0;
                    for (std::size_t i = 0; i < 3; ++i) fit += coef[i] * basis[i][k];
                    res = std::max(res, std::abs(br[k] - fit));
                    scale = std::max(scale, std::abs(br[k]));
                }
                out.max_residual = std::max(out.max_residual, res / scale);
                ++out.checks;
            }
    }
    out.pass = out.max_residual <= tol;
    return out;
}

inline BracketTable verify_bracket_table(std::size_t samples = 100, double tol = 1e-6, const SampleSpace& space = {},
                                         BracketMode mode = BracketMode::Analytic) {
    if (samples < 1) throw UsageError("bracket table: samples must be >= 1");
    BracketTable table;
    table.samples = samples;
    table.tol = tol;
    table.seed = space.seed;
    table.mode = mode;
    std::mt19937_64 rng(space.seed);
    for (const Relation& rel : bracket_relations()) {
        RelationResult rr;
        rr.id = rel.id;
        rr.pass = true;
        for (const BracketRule& rule : rel.rules) {
            BracketResult br{rule.lhs, rule.rhs};
            double num = 0.0, den = 0.0;
            for (std::size_t s = 0; s < samples; ++s) {
                const Point8 pt = detail::random_point(rng, space.box);
                const GeneratorSpec a = detail::random_spec(rule.a, rng);
                const GeneratorSpec b = detail::random_spec(rule.b, rng);
                const Coeffs lhs = lie_bracket_num(a, b, pt, mode);
                const BracketSide sa{&a, TSeries::of(a.payload, pt[T])};
                const BracketSide sb{&b, TSeries::of(b.payload, pt[T])};
                const Coeffs rhs = rhs_coeffs(rule.eval(sa, sb), pt);
                for (std::size_t k = 0; k < 8; ++k) {
                    br.max_deviation = std::max(br.max_deviation, std::abs(lhs[k] - rhs[k]));
                    num += lhs[k] * rhs[k];
                    den += rhs[k] * rhs[k];
                }
            }
            if (den > 0.0) br.fitted_scale = num / den;
            br.pass = br.max_deviation <= tol;
            rr.pass = rr.pass && br.pass;
            rr.brackets.push_back(br);
        }
        table.relations.push_back(rr);
    }
    table.closure = verify_rotation_closure(samples, tol, space, mode);
    return table;
}

// ---------------------------------------------------------------------------
// Finite transformations

struct GroupElement {
    GeneratorSpec spec;
    double epsilon = 0.0;
};

// Flow of the generator for parameter epsilon, applied to a jet-space point.
template <class S>
Point8T<S> apply_group(const GroupElement& g, const Point8T<S>& q) {
    using std::cos;
    using std::exp;
    using std::sin;
    Point8T<S> r = q;
    const double eps = g.epsilon;
    const auto rotate = [&](std::size_t i, std::size_t j, double th) {
        const double c = std::cos(th), s = std::sin(th);
        r[i] = c * q[i] + s * q[j];
        r[j] = -s * q[i] + c * q[j];
    };
    const auto boost = [&](std::size_t xi, std::size_t ui) {
        const S f0 = g.spec.payload.at(0, q[T]), f1 = g.spec.payload.at(1, q[T]), f2 = g.spec.payload.at(2, q[T]);
        r[xi] = q[xi] + eps * f0;
        r[ui] = q[ui] + eps * f1;
        r[P] = q[P] - eps * f2 * q[xi] - 0.5 * eps * eps * f0 * f2;
    };
    switch (g.spec.id) {
    case GenId::V1: boost(X, U1); break;
    case GenId::V2: boost(Y, U2); break;
    case GenId::V3: boost(Z, U3); break;
    case GenId::V4: r[P] = q[P] + eps * g.spec.payload.at(0, q[T]); break;
    case GenId::V5: {
        const double s = g.spec.constant * eps, e1 = std::exp(s), e2 = std::exp(2.0 * s);
        for (std::size_t k : {X, Y, Z}) r[k] = e1 * q[k];
        r[T] = e2 * q[T];
        for (std::size_t k : {U1, U2, U3}) r[k] = q[k] / e1;
        r[P] = q[P] / e2;
        break;
    }
    case GenId::V6:
        rotate(X, Y, g.spec.constant * eps);
        rotate(U1, U2, g.spec.constant * eps);
        break;
    case GenId::V7:
        rotate(Y, Z, g.spec.constant * eps);
        rotate(U2, U3, g.spec.constant * eps);
        break;
    case GenId::V8:
        rotate(X, Z, g.spec.constant * eps);
        rotate(U1, U3, g.spec.constant * eps);
        break;
    case GenId::V9: r[T] = q[T] + g.spec.constant * eps; break;
    }
    return r;
}

inline Point8 transform_point(const GroupElement& g, const Point8& pt) {
    const Point8 r = apply_group<double>(g, pt);
    for (double v : r)
        if (!std::isfinite(v)) throw DomainError("group transform produced a non-finite coordinate");
    return r;
}

inline GroupElement inverse(GroupElement g) {
    g.epsilon = -g.epsilon;
    return g;
}

// Image of a spacetime point under the independent-variable part of g.
inline Point4 map_point(const GroupElement& g, const Point4& p) {
    const Point8 r = transform_point(g, {p.x, p.y, p.z, p.t, 0, 0, 0, 0});
    return {r[X], r[Y], r[Z], r[T]};
}

inline std::vector<Point4> map_points(const GroupElement& g, const std::vector<Point4>& pts) {
    std::vector<Point4> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(map_point(g, p));
    return out;
}

// The transformed solution: (u', p')(x') is obtained by pulling x' back to
// the base point x and pushing (x, u(x), p(x)) forward through g.
template <FieldEvaluator F>
class Pushforward {
public:
    Pushforward(F base, GroupElement g) : base_(std::move(base)), g_(std::move(g)), inv_(inverse(g_)) {}

    template <class S>
    StateT<S> eval(const Vec4T<S>& q) const {
        Point8T<S> pre;
        pre.fill(S(0.0));
        for (std::size_t k = 0; k < 4; ++k) pre[k] = q[k];
        const Point8T<S> back = apply_group<S>(inv_, pre);
        const Vec4T<S> xb{back[X], back[Y], back[Z], back[T]};
        const StateT<S> st = base_.template eval<S>(xb);
        const Point8T<S> full{xb[0], xb[1], xb[2], xb[3], st.u[0], st.u[1], st.u[2], st.p};
        const Point8T<S> img = apply_group<S>(g_, full);
        StateT<S> out;
        out.u = {img[U1], img[U2], img[U3]};
        out.p = img[P];
        return out;
    }

    [[nodiscard]] std::optional<std::string> reject(const Point4& p) const {
        if (!p.finite()) return std::string("non-finite coordinate");
        const Point8 back = apply_group<double>(inv_, {p.x, p.y, p.z, p.t, 0, 0, 0, 0});
        const Point4 b{back[X], back[Y], back[Z], back[T]};
        if (!b.finite()) return std::string("pulled-back point is not finite");
        if (auto why = base_.reject(b)) return "pulled-back point rejected: " + *why;
        return std::nullopt;
    }
    [[nodiscard]] double nu() const { return base_.nu(); }
    [[nodiscard]] double rate() const { return base_.rate(); }
    [[nodiscard]] const GroupElement& element() const { return g_; }
    [[nodiscard]] const F& base() const { return base_; }

private:
    F base_;
    GroupElement g_;
    GroupElement inv_;
};

template <FieldEvaluator F>
Pushforward<F> pushforward_field(F field, GroupElement g) {
    return Pushforward<F>(std::move(field), std::move(g));
}

template <FieldEvaluator F>
StateT<double> eval_pushforward(const Pushforward<F>& f, const Point4& pt) {
    if (auto why = f.reject(pt)) throw DomainError(*why);
    return f.template eval<double>(pt.as_array());
}

} // namespace nsvl::symmetry
