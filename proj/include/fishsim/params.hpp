#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fishsim/types.hpp"

namespace fishsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All physical constants of the robot. Defaults describe a half-metre
// tuna-scale prototype and are the shipped configuration; every value can be
// overridden from a key=value config file.
struct RobotParams {
    double body_length = 0.50;        // m
    double mass = 1.77;               // kg
    double yaw_inertia = 0.0018;      // kg m^2
    double fluid_density = 1000.0;    // kg/m^3
    double cd_surge = 0.21;
    double cd_sway = 1.5;
    double frontal_area = 0.0016;     // m^2
    double lateral_area = 0.135;      // m^2
    double yaw_damping = 0.009;       // N m s^2, quadratic
    double added_mass_surge = 0.18;   // kg
    double added_mass_sway = 3.5;     // kg
    double added_yaw_inertia = 0.0018; // kg m^2
    double pivot_offset = 0.05;       // m, CoM to plate root (aft)
    double fin_offset = 0.076;        // m, plate root to fin centre of pressure
    double fin_area = 0.0043;         // m^2
    double fin_normal_coeff = 13.3;   // lumped normal-force scale
    double linkage_ratio = 1.0;       // servo angle -> plate-root drive angle
    double plate_stiffness = 4.0;     // N m/rad
    double plate_damping = 0.034;     // N m s/rad
    double hinge_stiffness = 1.0;     // N m/rad
    double hinge_damping = 0.033;     // N m s/rad
    double fin_inertia = 0.001;       // kg m^2, fin about its hinge
};

namespace detail {

using FieldPtr = double RobotParams::*;

inline const std::vector<std::pair<std::string, FieldPtr>>& param_fields() {
    static const std::vector<std::pair<std::string, FieldPtr>> fields = {
        {"body_length", &RobotParams::body_length},
        {"mass", &RobotParams::mass},
        {"yaw_inertia", &RobotParams::yaw_inertia},
        {"fluid_density", &RobotParams::fluid_density},
        {"cd_surge", &RobotParams::cd_surge},
        {"cd_sway", &RobotParams::cd_sway},
        {"frontal_area", &RobotParams::frontal_area},
        {"lateral_area", &RobotParams::lateral_area},
        {"yaw_damping", &RobotParams::yaw_damping},
        {"added_mass_surge", &RobotParams::added_mass_surge},
        {"added_mass_sway", &RobotParams::added_mass_sway},
        {"added_yaw_inertia", &RobotParams::added_yaw_inertia},
        {"pivot_offset", &RobotParams::pivot_offset},
        {"fin_offset", &RobotParams::fin_offset},
        {"fin_area", &RobotParams::fin_area},
        {"fin_normal_coeff", &RobotParams::fin_normal_coeff},
        {"linkage_ratio", &RobotParams::linkage_ratio},
        {"plate_stiffness", &RobotParams::plate_stiffness},
        {"plate_damping", &RobotParams::plate_damping},
        {"hinge_stiffness", &RobotParams::hinge_stiffness},
        {"hinge_damping", &RobotParams::hinge_damping},
        {"fin_inertia", &RobotParams::fin_inertia},
    };
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline void validate_params(const RobotParams& p) {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("parameter `") + key +
                              "` must be strictly positive");
    };
    auto non_negative = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("parameter `") + key +
                              "` must be non-negative");
    };
    positive(p.body_length, "body_length");
    positive(p.mass, "mass");
    positive(p.yaw_inertia, "yaw_inertia");
    positive(p.fluid_density, "fluid_density");
    positive(p.frontal_area, "frontal_area");
    positive(p.lateral_area, "lateral_area");
    positive(p.added_mass_surge, "added_mass_surge");
    positive(p.added_mass_sway, "added_mass_sway");
    positive(p.added_yaw_inertia, "added_yaw_inertia");
    positive(p.pivot_offset, "pivot_offset");
    positive(p.fin_offset, "fin_offset");
    positive(p.fin_area, "fin_area");
    positive(p.fin_normal_coeff, "fin_normal_coeff");
    positive(p.plate_stiffness, "plate_stiffness");
    positive(p.hinge_stiffness, "hinge_stiffness");
    positive(p.fin_inertia, "fin_inertia");
    non_negative(p.cd_surge, "cd_surge");
    non_negative(p.cd_sway, "cd_sway");
    non_negative(p.yaw_damping, "yaw_damping");
    non_negative(p.plate_damping, "plate_damping");
    non_negative(p.hinge_damping, "hinge_damping");
    if (!(p.linkage_ratio > 0.0 && p.linkage_ratio <= 2.0))
        throw ConfigError("parameter `linkage_ratio` must be in (0, 2]");
}

// Flat key=value text, one entry per line, `#` starts a comment. Unspecified
// keys keep their defaults.
inline RobotParams load_params(std::string_view config_text) {
    RobotParams p;
    std::istringstream in{std::string(config_text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value");
        std::string key{detail::trim(line.substr(0, eq))};
        std::string value{detail::trim(line.substr(eq + 1))};
        bool known = false;
        for (const auto& [name, ptr] : detail::param_fields()) {
            if (name == key) {
                try {
                    size_t consumed = 0;
                    double parsed = std::stod(value, &consumed);
                    if (consumed != value.size()) throw std::invalid_argument(value);
                    p.*ptr = parsed;
                } catch (const std::exception&) {
                    throw ConfigError("unparsable value for `" + key + "`: " + value);
                }
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown key `" + key + "`");
    }
    validate_params(p);
    return p;
}

// Shortest decimal that round-trips the double exactly.
inline std::string format_exact(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) break;
    }
    return buf;
}

inline std::string serialize_params(const RobotParams& p) {
    std::string out;
    for (const auto& [name, ptr] : detail::param_fields()) {
        out += name;
        out += '=';
        out += format_exact(p.*ptr);
        out += '\n';
    }
    return out;
}

// FNV-1a over the exact serialized text; changes iff any value changes.
inline std::string params_digest(const RobotParams& p) {
    const std::string text = serialize_params(p);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fishsim
