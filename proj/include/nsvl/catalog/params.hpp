#pragma once

#include <array>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "nsvl/core/errors.hpp"

namespace nsvl {

enum class FamilyId {
    KummerShear,
    ErfProductShear,
    BurgersShearLayer,
    ExpSaddle,
    BesselTransient,
    IrrotationalPotential,
    ScaleInvariant,
    AxisymSource,
    AxisymBessel,
    BurgersVortex,
    BurgersLundgren,
    SechVortex,
};

inline constexpr std::array<FamilyId, 12> kAllFamilies = {
    FamilyId::KummerShear,      FamilyId::ErfProductShear,       FamilyId::BurgersShearLayer,
    FamilyId::ExpSaddle,        FamilyId::BesselTransient,       FamilyId::IrrotationalPotential,
    FamilyId::ScaleInvariant,   FamilyId::AxisymSource,          FamilyId::AxisymBessel,
    FamilyId::BurgersVortex,    FamilyId::BurgersLundgren,       FamilyId::SechVortex,
};

// Named real parameters of one family. Missing names fall back to the
// family defaults when the field is built.
class ParamSet {
public:
    ParamSet() = default;
    ParamSet(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

    ParamSet& set(const std::string& name, double v) {
        values_[name] = v;
        return *this;
    }
    [[nodiscard]] bool has(const std::string& name) const { return values_.count(name) != 0; }
    [[nodiscard]] double get(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw ParamError("missing parameter '" + name + "'");
        return it->second;
    }
    [[nodiscard]] const std::map<std::string, double>& values() const { return values_; }

private:
    std::map<std::string, double> values_;
};

} // namespace nsvl
