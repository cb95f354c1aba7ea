#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fishsim/hydro.hpp"
#include "fishsim/params.hpp"
#include "fishsim/tail.hpp"
#include "fishsim/types.hpp"

namespace fishsim {

using StateVec = std::array<double, 10>;

inline StateVec pack(const FullState& s) {
    return {s.body.x, s.body.y, s.body.yaw, s.body.u, s.body.v, s.body.r,
            s.tail.plate_angle, s.tail.plate_rate, s.tail.hinge_angle,
            s.tail.hinge_rate};
}

inline FullState unpack(const StateVec& v, double t) {
    FullState s;
    s.body = {v[0], v[1], v[2], v[3], v[4], v[5]};
    s.tail = {v[6], v[7], v[8], v[9]};
    s.t = t;
    return s;
}

// Time derivative of the coupled body + tail ODE. Newton equations with
// effective masses (rigid + added); total wrench = hull drag + fin force.
inline StateVec derivative(const FullState& s, const TailCommand& cmd,
                           const RobotParams& p) {
    const double servo = servo_angle(cmd, s.t);
    const double drive = plate_drive_angle(servo, p);
    const double drive_rate = plate_drive_angle(servo_rate(cmd, s.t), p);

    const FinKinematics fin = fin_world_kinematics(s.body, s.tail, p);
    const Wrench hull = body_wrench(s.body, p);
    const FinWrench fw = fin_wrench(fin, s.body, p);

    const double fx = hull.fx + fw.wrench.fx;
    const double fy = hull.fy + fw.wrench.fy;
    const double mz = hull.mz + fw.wrench.mz;

    const TailDeriv td =
        tail_derivative(s.tail, drive, drive_rate, fw.hinge_moment, p);

    const double cy = std::cos(s.body.yaw), sy = std::sin(s.body.yaw);
    return {s.body.u * cy - s.body.v * sy,
            s.body.u * sy + s.body.v * cy,
            s.body.r,
            fx / (p.mass + p.added_mass_surge),
            fy / (p.mass + p.added_mass_sway),
            mz / (p.yaw_inertia + p.added_yaw_inertia),
            td.plate_angle,
            td.plate_rate,
            td.hinge_angle,
            td.hinge_rate};
}

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool stable(const StateVec& v) {
    for (double x : v)
        if (!std::isfinite(x) || std::abs(x) > 1e6) return false;
    return true;
}

// One classical RK4 step of the full coupled ODE. Deterministic: identical
// inputs give bit-identical output.
inline FullState step_rk4(const FullState& state, const TailCommand& cmd, double dt,
                          const RobotParams& p) {
    const StateVec y0 = pack(state);
    auto eval = [&](const StateVec& y, double t) {
        return derivative(unpack(y, t), cmd, p);
    };
    auto advance = [&](const StateVec& y, const StateVec& d, double h) {
        StateVec out;
        for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * d[i];
        return out;
    };

    const StateVec k1 = eval(y0, state.t);
    const StateVec k2 = eval(advance(y0, k1, dt / 2), state.t + dt / 2);
    const StateVec k3 = eval(advance(y0, k2, dt / 2), state.t + dt / 2);
    const StateVec k4 = eval(advance(y0, k3, dt), state.t + dt);

    StateVec y1;
    for (size_t i = 0; i < y0.size(); ++i)
        y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

    if (!stable(y1))
        throw IntegrationError("step_rk4: state diverged at t=" +
                               std::to_string(state.t));
    return unpack(y1, state.t + dt);
}

// Telemetry record of a launch; the simulator's stand-in for the video tape.
struct TrajectoryLog {
    std::vector<FullState> samples;
    TailCommand cmd;
    std::string params_digest;
    bool truncated = false; // instability abort before max_duration
};

inline std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string to_csv(const TrajectoryLog& log) {
    std::string out = "t,x,y,yaw,u,v,r,plate_angle,hinge_angle\n";
    for (const FullState& s : log.samples) {
        out += format_g9(s.t) + ',' + format_g9(s.body.x) + ',' +
               format_g9(s.body.y) + ',' + format_g9(s.body.yaw) + ',' +
               format_g9(s.body.u) + ',' + format_g9(s.body.v) + ',' +
               format_g9(s.body.r) + ',' + format_g9(s.tail.plate_angle) + ',' +
               format_g9(s.tail.hinge_angle) + '\n';
    }
    return out;
}

// Integrate from init for cfg.max_duration, sampling at cfg.telemetry_rate.
// An instability abort truncates the log and sets the flag.
inline TrajectoryLog simulate(const FullState& init, const TailCommand& cmd,
                              const SimConfig& cfg, const RobotParams& p) {
    TrajectoryLog log;
    log.cmd = cmd;
    log.params_digest = params_digest(p);

    const long steps = std::lround(cfg.max_duration / cfg.dt);
    const long stride =
        std::max(1l, std::lround(1.0 / (cfg.telemetry_rate * cfg.dt)));

    FullState s = init;
    log.samples.push_back(s);
    for (long i = 1; i <= steps; ++i) {
        try {
            s = step_rk4(s, cmd, cfg.dt, p);
        } catch (const IntegrationError&) {
            log.truncated = true;
            return log;
        }
        if (i % stride == 0) log.samples.push_back(s);
    }
    return log;
}

}  // namespace fishsim
