#pragma once

// Pointwise diagnostics from a velocity jet: vorticity, strain, dissipation,
// enstrophy, stretching rate, the chi vector and the dynamic angle phi.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/evaluator.hpp"
#include "nsvl/core/grid.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl {

struct StrainMatrix {
    Mat3 s{};
};

enum class AlignmentFlag { Ok, DegenerateVorticity, DegenerateStretch };

inline const char* to_string(AlignmentFlag f) {
    switch (f) {
    case AlignmentFlag::Ok: return "ok";
    case AlignmentFlag::DegenerateVorticity: return "degenerate_vorticity";
    case AlignmentFlag::DegenerateStretch: return "degenerate_stretch";
    }
    return "?";
}

struct AlignmentSample {
    Vec3 omega{};
    Vec3 s_omega{};
    double alpha = std::numeric_limits<double>::quiet_NaN();
    Vec3 chi{};
    double chi_norm = std::numeric_limits<double>::quiet_NaN();
    double phi = std::numeric_limits<double>::quiet_NaN();
    AlignmentFlag flag = AlignmentFlag::Ok;
};

// Floors below which the angle is reported as degenerate rather than noise.
struct AlignmentFloors {
    double omega = 1e-12;    // absolute |omega| floor
    double stretch = 1e-9;   // |S omega| <= stretch * max(|S|_F, rate) * |omega|
    double rate = 1.0;

    static AlignmentFloors for_rate(double rate) {
        AlignmentFloors f;
        f.rate = rate > 0.0 ? rate : 1.0;
        f.omega = 1e-12 * f.rate;
        return f;
    }
};

inline Vec3 vorticity(const FlowJet& j) {
    return {j.du[2][1] - j.du[1][2], j.du[0][2] - j.du[2][0], j.du[1][0] - j.du[0][1]};
}

inline StrainMatrix strain(const FlowJet& j) {
    StrainMatrix m;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) m.s[a][b] = 0.5 * (j.du[a][b] + j.du[b][a]);
    return m;
}

inline double dissipation(const StrainMatrix& m) {
    double acc = 0.0;
    for (const auto& row : m.s)
        for (double v : row) acc += v * v;
    return acc;
}

inline double enstrophy(const Vec3& w) { return la::dot(w, w); }

// Angle between w and S w by the direct two-vector formula; used to
// cross-check the (alpha, chi) route.
inline double angle_direct(const Vec3& w, const Vec3& sw) {
    return std::atan2(la::norm(la::cross(w, sw)), la::dot(w, sw));
}

inline AlignmentSample classify_alignment(const FlowJet& j, const AlignmentFloors& floors) {
    AlignmentSample out;
    out.omega = vorticity(j);
    const StrainMatrix S = strain(j);
    out.s_omega = la::mul(S.s, out.omega);
    const double wn = la::norm(out.omega);
    if (!(wn > floors.omega)) {
        out.flag = AlignmentFlag::DegenerateVorticity;
        return out;
    }
    const double scale = std::max(la::frobenius(S.s), floors.rate);
    if (la::norm(out.s_omega) <= floors.stretch * scale * wn) {
        out.flag = AlignmentFlag::DegenerateStretch;
        return out;
    }
    const Vec3 xi = la::scale(out.omega, 1.0 / wn);
    const Vec3 sxi = la::mul(S.s, xi);
    out.alpha = la::dot(xi, sxi);
    out.chi = la::cross(xi, sxi);
    out.chi_norm = la::norm(out.chi);
    out.phi = std::atan2(out.chi_norm, out.alpha);
    return out;
}

inline AlignmentSample alignment(const FlowJet& j, const AlignmentFloors& floors = {}) {
    AlignmentSample a = classify_alignment(j, floors);
    if (a.flag == AlignmentFlag::DegenerateVorticity)
        throw DegenerateVorticity("|omega| is below the vorticity floor");
    if (a.flag == AlignmentFlag::DegenerateStretch) throw DegenerateStretch("S omega vanishes; phi undefined");
    return a;
}

struct SweepRow {
    Point4 pt;
    AlignmentSample sample;
    double enstrophy = 0.0;
    double dissipation = 0.0;
};

struct RejectedPoint {
    Point4 pt;
    std::string reason;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<RejectedPoint> rejected;
};

template <FieldEvaluator F>
SweepTable alignment_sweep_points(const F& field, const std::vector<Point4>& pts, DiffMode mode = DiffMode::Analytic) {
    const AlignmentFloors floors = AlignmentFloors::for_rate(field.rate());
    SweepTable table;
    for (const auto& p : pts) {
        if (auto why = field.reject(p)) {
            table.rejected.push_back({p, *why});
            continue;
        }
        const FlowJet j = eval_jet(field, p, mode);
        SweepRow row;
        row.pt = p;
        row.sample = classify_alignment(j, floors);
        row.enstrophy = enstrophy(row.sample.omega);
        row.dissipation = dissipation(strain(j));
        table.rows.push_back(row);
    }
    if (table.rows.empty()) throw EmptyGrid("alignment sweep: no accepted grid points");
    return table;
}

template <FieldEvaluator F>
SweepTable alignment_sweep(const F& field, const GridSpec& grid, DiffMode mode = DiffMode::Analytic) {
    return alignment_sweep_points(field, grid.points(), mode);
}

} // namespace nsvl
