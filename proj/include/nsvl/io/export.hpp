#pragma once

// Exporters: CSV alignment tables, legacy ASCII VTK (structured sweeps and
// triangle meshes), JSON reports, and the hashed output manifest.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/grid.hpp"
#include "nsvl/kinematics.hpp"
#include "nsvl/surfaces.hpp"
#include "nsvl/symmetry.hpp"
#include "nsvl/verify.hpp"

namespace nsvl::io {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kAlignmentHeader = "x,y,z,t,w1,w2,w3,alpha,chi,phi,enstrophy,dissipation,flag";

// 17 significant digits: every double survives a text round trip.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw IoError("sha256: digest computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.close();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct OutputFile {
    std::string path;    // relative to the output directory
    std::string format;  // csv | vtk | json
    std::string sha256;
    std::size_t bytes = 0;
};

struct OutputManifest {
    std::vector<OutputFile> files;
    std::uint64_t seed = 0;
    std::string command;
};

inline json manifest_json(const OutputManifest& m) {
    json files = json::array();
    for (const auto& f : m.files)
        files.push_back({{"path", f.path}, {"format", f.format}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"command", m.command}, {"seed", m.seed}, {"files", files}};
}

// Writes files under one directory and records each in the manifest.
class OutputSink {
public:
    OutputSink(std::filesystem::path dir, std::string command, std::uint64_t seed) : dir_(std::move(dir)) {
        manifest_.command = std::move(command);
        manifest_.seed = seed;
    }

    const std::filesystem::path& dir() const { return dir_; }
    const OutputManifest& manifest() const { return manifest_; }

    std::filesystem::path write(const std::string& name, const std::string& format, std::string_view content) {
        const auto path = dir_ / name;
        write_text(path, content);
        manifest_.files.push_back({name, format, sha256_hex(content), content.size()});
        return path;
    }

    std::filesystem::path finish() {
        const auto path = dir_ / "manifest.json";
        write_text(path, manifest_json(manifest_).dump(2) + "\n");
        return path;
    }

private:
    std::filesystem::path dir_;
    OutputManifest manifest_;
};

// ---------------------------------------------------------------------------
// CSV

inline std::string alignment_csv(const SweepTable& table, std::uint64_t seed) {
    std::string out = "# seed=" + std::to_string(seed) + "\n";
    out += kAlignmentHeader;
    out += '\n';
    for (const auto& r : table.rows) {
        const auto& s = r.sample;
        const double vals[] = {r.pt.x,   r.pt.y,     r.pt.z,  r.pt.t,      s.omega[0],    s.omega[1],
                               s.omega[2], s.alpha, s.chi_norm, s.phi, r.enstrophy, r.dissipation};
        for (double v : vals) {
            out += fmt17(v);
            out += ',';
        }
        out += to_string(s.flag);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// VTK legacy ASCII

namespace detail {

inline void vtk_header(std::string& out, const std::string& title) {
    out += "# vtk DataFile Version 3.0\n";
    std::string t = title.substr(0, 255);
    for (char& c : t)
        if (c == '\n') c = ' ';
    out += t + "\nASCII\n";
}

} // namespace detail

// One STRUCTURED_GRID file per time slice. Rejected points keep their
// position, carry zeros in the data arrays and valid = 0.
inline std::vector<std::string> sweep_vtk(const GridSpec& grid, const SweepTable& table, std::uint64_t seed) {
    grid.validate();
    const std::size_t n = grid.slice_size();
    std::size_t row = 0, rej = 0;
    const auto same = [](const Point4& a, const Point4& b) { return a.x == b.x && a.y == b.y && a.z == b.z && a.t == b.t; };
    std::vector<std::string> files;
    for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
        const double t = grid.times[ti];
        std::string pts, phi, alpha, ens, dis, valid, vort;
        for (int k = 0; k < grid.z.count; ++k)
            for (int j = 0; j < grid.y.count; ++j)
                for (int i = 0; i < grid.x.count; ++i) {
                    const Point4 p = grid.point(i, j, k, t);
                    pts += fmt17(p.x) + ' ' + fmt17(p.y) + ' ' + fmt17(p.z) + '\n';
                    const SweepRow* r = nullptr;
                    if (row < table.rows.size() && same(table.rows[row].pt, p)) {
                        r = &table.rows[row++];
                    } else if (rej < table.rejected.size() && same(table.rejected[rej].pt, p)) {
                        ++rej;
                    } else {
                        throw UsageError("sweep_vtk: table does not match the grid");
                    }
                    const bool ok = r && r->sample.flag == AlignmentFlag::Ok;
                    const auto finite_or_zero = [](double v) { return std::isfinite(v) ? v : 0.0; };
                    phi += fmt17(ok ? r->sample.phi : 0.0) + '\n';
                    alpha += fmt17(ok ? r->sample.alpha : 0.0) + '\n';
                    ens += fmt17(r ? finite_or_zero(r->enstrophy) : 0.0) + '\n';
                    dis += fmt17(r ? finite_or_zero(r->dissipation) : 0.0) + '\n';
                    valid += ok ? "1\n" : "0\n";
                    const Vec3 w = r ? r->sample.omega : Vec3{};
                    vort += fmt17(w[0]) + ' ' + fmt17(w[1]) + ' ' + fmt17(w[2]) + '\n';
                }
        std::string out;
        detail::vtk_header(out, "alignment sweep seed=" + std::to_string(seed) + " t=" + fmt17(t));
        out += "DATASET STRUCTURED_GRID\n";
        out += "DIMENSIONS " + std::to_string(grid.x.count) + ' ' + std::to_string(grid.y.count) + ' ' +
               std::to_string(grid.z.count) + '\n';
        out += "POINTS " + std::to_string(n) + " double\n" + pts;
        out += "POINT_DATA " + std::to_string(n) + '\n';
        const auto scalars = [&](const char* name, const std::string& data, const char* type = "double") {
            out += std::string("SCALARS ") + name + ' ' + type + " 1\nLOOKUP_TABLE default\n" + data;
        };
        scalars("phi", phi);
        scalars("alpha", alpha);
        scalars("enstrophy", ens);
        scalars("dissipation", dis);
        scalars("valid", valid, "int");
        out += "VECTORS vorticity double\n" + vort;
        files.push_back(std::move(out));
    }
    return files;
}

inline std::string mesh_vtk(const surfaces::Mesh& mesh, const std::string& title) {
    std::string out;
    detail::vtk_header(out, title);
    out += "DATASET POLYDATA\n";
    out += "POINTS " + std::to_string(mesh.vertices.size()) + " double\n";
    for (const auto& v : mesh.vertices) out += fmt17(v[0]) + ' ' + fmt17(v[1]) + ' ' + fmt17(v[2]) + '\n';
    out += "POLYGONS " + std::to_string(mesh.triangles.size()) + ' ' + std::to_string(4 * mesh.triangles.size()) + '\n';
    for (const auto& t : mesh.triangles)
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline json num(double v) { return std::isfinite(v) ? json(v) : json(fmt17(v)); }
inline json vec(const Vec3& v) { return json::array({num(v[0]), num(v[1]), num(v[2])}); }

inline json residual_json(const ResidualReport& r) {
    return {{"max_mom", vec(r.max_mom)}, {"mean_mom", vec(r.mean_mom)}, {"max_div", num(r.max_div)},
            {"n_points", r.n_points},    {"n_rejected", r.n_rejected},  {"mode", to_string(r.mode)}};
}

inline json ode_json(const OdeCheckReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"id", e.id}, {"equation", e.equation}, {"max_residual", num(e.max_residual)}, {"samples", e.samples}});
    return {{"family", family_info(r.family).key}, {"max_residual", num(r.max_residual())}, {"entries", entries}};
}

inline json audit_json(const AuditReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"formula_id", e.formula_id},
                           {"reference_form", e.reference_form},
                           {"corrected_form", e.corrected_form},
                           {"samples", e.samples},
                           {"max_abs_deviation", num(e.max_abs_deviation)},
                           {"correction_factor", num(e.correction_factor)},
                           {"factor_spread", num(e.factor_spread)},
                           {"corrected_deviation", num(e.corrected_deviation)},
                           {"verdict", e.verdict}});
    return {{"family", family_info(r.family).key}, {"entries", entries}};
}

inline json bracket_json(const symmetry::BracketTable& t) {
    json rel = json::array();
    for (const auto& r : t.relations) {
        json br = json::array();
        for (const auto& b : r.brackets)
            br.push_back({{"lhs", b.lhs}, {"rhs", b.rhs}, {"max_deviation", num(b.max_deviation)},
                          {"fitted_scale", num(b.fitted_scale)}, {"pass", b.pass}});
        rel.push_back({{"id", r.id}, {"pass", r.pass}, {"max_deviation", num(r.max_deviation())}, {"brackets", br}});
    }
    return {{"samples", t.samples},
            {"tol", t.tol},
            {"seed", t.seed},
            {"mode", t.mode == symmetry::BracketMode::Analytic ? "Analytic" : "FiniteDiff"},
            {"passed", t.passed()},
            {"relations", rel},
            {"closure",
             {{"checks", t.closure.checks}, {"max_residual", num(t.closure.max_residual)}, {"pass", t.closure.pass}}}};
}

inline json invariance_json(const surfaces::InvarianceReport& r) {
    json members = json::array();
    for (const auto& m : r.members)
        members.push_back({{"name", m.name}, {"formula_id", m.formula_id}, {"max_drift", num(m.max_drift)}, {"unwrapped", m.unwrapped}});
    return {{"case", surfaces::to_string(r.case_id)}, {"trajectories", r.trajectories}, {"members", members}};
}

inline json calibration_json(const std::vector<surfaces::CalibrationEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries)
        out.push_back({{"case", e.case_name},
                       {"formula_id", e.formula_id},
                       {"reference_form", e.reference_form},
                       {"reference_drift", num(e.reference_drift)},
                       {"calibrated_form", e.calibrated_form},
                       {"calibrated_drift", num(e.calibrated_drift)},
                       {"finding", e.finding}});
    return out;
}

// Every JSON output: the configuration echo, the seed and the report body.
inline json wrap_report(json config, std::uint64_t seed, json report) {
    return {{"config", std::move(config)}, {"seed", seed}, {"report", std::move(report)}};
}

} // namespace nsvl::io
