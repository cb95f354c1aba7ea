#pragma once

#include <cmath>
#include <stdexcept>

#include "fishsim/params.hpp"
#include "fishsim/types.hpp"

namespace fishsim {

// Servo program: A sin(2 pi f t). Identically zero at rest command.
inline double servo_angle(const TailCommand& cmd, double t) {
    if (cmd.amplitude_deg == 0.0 || cmd.frequency_hz == 0.0) return 0.0;
    return deg2rad(cmd.amplitude_deg) * std::sin(2.0 * kPi * cmd.frequency_hz * t);
}

inline double servo_rate(const TailCommand& cmd, double t) {
    if (cmd.amplitude_deg == 0.0 || cmd.frequency_hz == 0.0) return 0.0;
    const double omega = 2.0 * kPi * cmd.frequency_hz;
    return deg2rad(cmd.amplitude_deg) * omega * std::cos(omega * t);
}

// Kinematic rod constraint: the plate root follows the servo through the
// wire rods with a fixed ratio.
inline double plate_drive_angle(double servo, const RobotParams& p) {
    return p.linkage_ratio * servo;
}

struct TailDeriv {
    double plate_angle;
    double plate_rate;
    double hinge_angle;
    double hinge_rate;
};

// Lumped two-spring tail ODE. The plate is pulled toward the drive angle by
// a torsional spring-damper acting on the fin-bearing assembly; the hinge is
// a damped oscillator forced by the hydrodynamic moment on the fin.
inline TailDeriv tail_derivative(const TailState& s, double drive, double drive_rate,
                                 double fin_hydro_moment, const RobotParams& p) {
    const double plate_accel =
        (-p.plate_stiffness * (s.plate_angle - drive) -
         p.plate_damping * (s.plate_rate - drive_rate)) / p.fin_inertia;
    const double hinge_accel =
        (-p.hinge_stiffness * s.hinge_angle - p.hinge_damping * s.hinge_rate +
         fin_hydro_moment) / p.fin_inertia;
    return {s.plate_rate, plate_accel, s.hinge_rate, hinge_accel};
}

// One RK4 step of the tail alone. Drive is extrapolated linearly across the
// step; the hydrodynamic moment is held constant.
inline TailState step_tail(const TailState& state, double drive, double drive_rate,
                           double fin_hydro_moment, double dt, const RobotParams& p) {
    if (!finite(state) || !std::isfinite(drive) || !std::isfinite(drive_rate) ||
        !std::isfinite(fin_hydro_moment))
        throw std::domain_error("step_tail: non-finite input");

    auto deriv = [&](const TailState& s, double tau) {
        return tail_derivative(s, drive + tau * drive_rate, drive_rate,
                               fin_hydro_moment, p);
    };
    auto advance = [](const TailState& s, const TailDeriv& d, double h) {
        return TailState{s.plate_angle + h * d.plate_angle,
                         s.plate_rate + h * d.plate_rate,
                         s.hinge_angle + h * d.hinge_angle,
                         s.hinge_rate + h * d.hinge_rate};
    };

    const TailDeriv k1 = deriv(state, 0.0);
    const TailDeriv k2 = deriv(advance(state, k1, dt / 2), dt / 2);
    const TailDeriv k3 = deriv(advance(state, k2, dt / 2), dt / 2);
    const TailDeriv k4 = deriv(advance(state, k3, dt), dt);

    const double s = dt / 6.0;
    return TailState{
        state.plate_angle + s * (k1.plate_angle + 2 * k2.plate_angle +
                                 2 * k3.plate_angle + k4.plate_angle),
        state.plate_rate + s * (k1.plate_rate + 2 * k2.plate_rate +
                                2 * k3.plate_rate + k4.plate_rate),
        state.hinge_angle + s * (k1.hinge_angle + 2 * k2.hinge_angle +
                                 2 * k3.hinge_angle + k4.hinge_angle),
        state.hinge_rate + s * (k1.hinge_rate + 2 * k2.hinge_rate +
                                2 * k3.hinge_rate + k4.hinge_rate)};
}

struct FinKinematics {
    Vec2 position;      // world, m
    double orientation; // rad, yaw + plate_angle + hinge_angle
    Vec2 velocity;      // world, m/s
};

// Rigid chain CoM -> pivot_offset -> plate -> fin_offset -> fin centre of
// pressure. The fin arm rotates about the plate root by the total tail angle.
inline FinKinematics fin_world_kinematics(const BodyState& body, const TailState& tail,
                                          const RobotParams& p) {
    const double tail_angle = tail.plate_angle + tail.hinge_angle;
    const double tail_rate = tail.plate_rate + tail.hinge_rate;

    // Aft unit vector rotated by the tail angle, in the body frame.
    const Vec2 aft{-std::cos(tail_angle), -std::sin(tail_angle)};
    const Vec2 root_b{-p.pivot_offset, 0.0};
    const Vec2 fin_b = root_b + p.fin_offset * aft;

    // Body-frame velocity of the fin point: rigid body term plus tail sweep.
    const Vec2 vel_b = Vec2{body.u, body.v} + body.r * perp(fin_b) +
                       (tail_rate * p.fin_offset) * perp(aft);

    return {Vec2{body.x, body.y} + rotate(fin_b, body.yaw),
            body.yaw + tail_angle, rotate(vel_b, body.yaw)};
}

}  // namespace fishsim
