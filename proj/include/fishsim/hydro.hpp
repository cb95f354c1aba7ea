#pragma once

#include <cmath>

#include "fishsim/params.hpp"
#include "fishsim/tail.hpp"
#include "fishsim/types.hpp"

namespace fishsim {

// Planar wrench in the body frame.
struct Wrench {
    double fx = 0.0; // N
    double fy = 0.0; // N
    double mz = 0.0; // N m about the CoM
};

// Quadratic hull drag, lumped replacement for the CFD resistance study.
inline Wrench body_wrench(const BodyState& b, const RobotParams& p) {
    Wrench w;
    w.fx = -0.5 * p.fluid_density * p.cd_surge * p.frontal_area * b.u * std::abs(b.u);
    w.fy = -0.5 * p.fluid_density * p.cd_sway * p.lateral_area * b.v * std::abs(b.v);
    w.mz = -p.yaw_damping * b.r * std::abs(b.r);
    return w;
}

struct FinWrench {
    Wrench wrench;              // body frame, about the CoM
    double hinge_moment = 0.0;  // N m about the fin hinge, fed back to the tail ODE
};

// Quasi-steady flat-plate normal force on the fin in still water. The force
// acts along the fin normal with magnitude 0.5 rho S Cn |W|^2 sin(alpha) and
// a quarter-offset lever arm sets the hinge feedback moment.
inline FinWrench fin_wrench(const FinKinematics& fin, const BodyState& body,
                            const RobotParams& p) {
    const Vec2 flow{-fin.velocity.x, -fin.velocity.y};
    const double speed = norm(flow);
    if (speed == 0.0) return {};

    const Vec2 chord_aft{-std::cos(fin.orientation), -std::sin(fin.orientation)};
    const Vec2 normal = perp(chord_aft);

    // Signed sin(alpha) * |W|^2 = |W| * (W . n)
    const double normal_flow = dot(flow, normal);
    const double magnitude =
        0.5 * p.fluid_density * p.fin_area * p.fin_normal_coeff * speed * normal_flow;
    const Vec2 force_w = magnitude * normal;

    const Vec2 force_b = rotate(force_w, -body.yaw);
    const Vec2 fin_rel_b = rotate(fin.position - Vec2{body.x, body.y}, -body.yaw);

    FinWrench out;
    out.wrench.fx = force_b.x;
    out.wrench.fy = force_b.y;
    out.wrench.mz = cross(fin_rel_b, force_b);
    // Centre of pressure a quarter of the fin arm behind the hinge.
    out.hinge_moment = cross(0.25 * p.fin_offset * chord_aft, force_w);
    return out;
}

}  // namespace fishsim
