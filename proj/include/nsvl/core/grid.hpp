#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "nsvl/core/errors.hpp"
#include "nsvl/core/types.hpp"

namespace nsvl {

struct Axis {
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    [[nodiscard]] double at(int i) const {
        if (count == 1) return min;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

// Sampling lattice. With `cylindrical` set, the x axis holds r, the y axis
// holds theta (radians) and points are mapped to Cartesian coordinates.
// Points are ordered time-major, then z, y, x (x fastest).
struct GridSpec {
    Axis x, y, z;
    std::vector<double> times{0.0};
    bool cylindrical = false;

    void validate() const {
        const auto check = [](const Axis& a, const char* name) {
            if (a.count < 1) throw UsageError(std::string("grid axis ") + name + ": count must be >= 1");
            if (a.count >= 2 && !(a.min < a.max))
                throw UsageError(std::string("grid axis ") + name + ": min must be < max");
            if (!std::isfinite(a.min) || !std::isfinite(a.max))
                throw UsageError(std::string("grid axis ") + name + ": non-finite bound");
        };
        check(x, "x");
        check(y, "y");
        check(z, "z");
        if (times.empty()) throw UsageError("grid: at least one time slice is required");
        if (cylindrical && x.min < 0.0) throw UsageError("grid: cylindrical radius must be >= 0");
    }

    [[nodiscard]] std::size_t slice_size() const {
        return static_cast<std::size_t>(x.count) * static_cast<std::size_t>(y.count) *
               static_cast<std::size_t>(z.count);
    }
    [[nodiscard]] std::size_t size() const { return slice_size() * times.size(); }

    [[nodiscard]] Point4 point(int i, int j, int k, double t) const {
        const double a = x.at(i), b = y.at(j), c = z.at(k);
        if (cylindrical) return {a * std::cos(b), a * std::sin(b), c, t};
        return {a, b, c, t};
    }

    [[nodiscard]] std::vector<Point4> points() const {
        validate();
        std::vector<Point4> out;
        out.reserve(size());
        for (double t : times)
            for (int k = 0; k < z.count; ++k)
                for (int j = 0; j < y.count; ++j)
                    for (int i = 0; i < x.count; ++i) out.push_back(point(i, j, k, t));
        return out;
    }
};

inline bool operator==(const Axis& a, const Axis& b) {
    return a.min == b.min && a.max == b.max && a.count == b.count;
}
inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z && a.times == b.times && a.cylindrical == b.cylindrical;
}

} // namespace nsvl
