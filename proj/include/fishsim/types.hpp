#pragma once

#include <cmath>
#include <numbers>

namespace fishsim {

constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Commanded stroke of the servo sinusoid. Amplitude stays in degrees at the
// command boundary; everything downstream works in radians.
struct TailCommand {
    double amplitude_deg = 0.0;
    double frequency_hz = 0.0;
};

constexpr double kMaxAmplitudeDeg = 80.0;
constexpr double kMaxFrequencyHz = 7.0;

// ok iff the command lies inside the closed box [0,80] deg x [0,7] Hz.
// 0 is the rest command on either axis.
enum class CommandCheck { Ok, AmplitudeOutOfRange, FrequencyOutOfRange };

inline CommandCheck validate_command(const TailCommand& cmd) {
    if (!(cmd.amplitude_deg >= 0.0 && cmd.amplitude_deg <= kMaxAmplitudeDeg) ||
        !std::isfinite(cmd.amplitude_deg))
        return CommandCheck::AmplitudeOutOfRange;
    if (!(cmd.frequency_hz >= 0.0 && cmd.frequency_hz <= kMaxFrequencyHz) ||
        !std::isfinite(cmd.frequency_hz))
        return CommandCheck::FrequencyOutOfRange;
    return CommandCheck::Ok;
}

// Planar pose plus body-frame velocities.
struct BodyState {
    double x = 0.0;    // m, world
    double y = 0.0;    // m, world
    double yaw = 0.0;  // rad
    double u = 0.0;    // m/s, surge (body frame)
    double v = 0.0;    // m/s, sway
    double r = 0.0;    // rad/s, yaw rate
};

// Two-stage tail compliance: lumped elastic plate at the root plus the
// spring-loaded fin hinge. Angles in radians, relative chain:
// fin chord absolute angle = yaw + plate_angle + hinge_angle.
struct TailState {
    double plate_angle = 0.0;
    double plate_rate = 0.0;
    double hinge_angle = 0.0;
    double hinge_rate = 0.0;
};

struct SimConfig {
    double dt = 5e-4;             // s, fixed integrator step, must be in (0, 0.01]
    double max_duration = 120.0;  // s
    double telemetry_rate = 50.0; // frames/s
    long seed = 0;                // reserved; the simulation is deterministic
};

inline bool valid(const SimConfig& cfg) {
    return cfg.dt > 0.0 && cfg.dt <= 0.01 && cfg.max_duration > 0.0 &&
           cfg.telemetry_rate > 0.0;
}

struct FullState {
    BodyState body;
    TailState tail;
    double t = 0.0;
};

inline bool finite(const BodyState& b) {
    return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.yaw) &&
           std::isfinite(b.u) && std::isfinite(b.v) && std::isfinite(b.r);
}

inline bool finite(const TailState& s) {
    return std::isfinite(s.plate_angle) && std::isfinite(s.plate_rate) &&
           std::isfinite(s.hinge_angle) && std::isfinite(s.hinge_rate);
}

inline bool finite(const FullState& s) {
    return finite(s.body) && finite(s.tail) && std::isfinite(s.t);
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 rotate(Vec2 a, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}

}  // namespace fishsim
