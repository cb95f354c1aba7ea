#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fishsim/dynamics.hpp"
#include "fishsim/harness.hpp"

using namespace fishsim;

TEST_CASE("all-zero state with zero command is a global fixed point") {
    RobotParams p;
    const StateVec d = derivative(FullState{}, {0, 0}, p);
    for (double v : d) CHECK(v == 0.0);

    FullState s;
    for (int i = 0; i < 1000; ++i) s = step_rk4(s, {0, 0}, 5e-4, p);
    CHECK(s.body.x == 0.0);
    CHECK(s.body.y == 0.0);
    CHECK(s.body.u == 0.0);
    CHECK(s.tail.plate_angle == 0.0);
    CHECK(s.t == Catch::Approx(0.5));
}

TEST_CASE("kinematic frame rotation") {
    RobotParams p;
    FullState s;
    s.body.yaw = kPi / 2;
    s.body.u = 1.0;
    const StateVec d = derivative(s, {0, 0}, p);
    CHECK(d[0] == Catch::Approx(0.0).margin(1e-15)); // xdot
    CHECK(d[1] == Catch::Approx(1.0).margin(1e-15)); // ydot
    CHECK(d[2] == 0.0);                              // yawdot
}

TEST_CASE("derivative matches a central finite difference of the flow") {
    RobotParams p;
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ang(-0.6, 0.6), vel(-1.5, 1.5);
    const double eps = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        FullState s;
        s.body = {vel(rng), vel(rng), ang(rng), vel(rng), vel(rng), vel(rng)};
        s.tail = {ang(rng), vel(rng), ang(rng), vel(rng)};
        s.t = 0.37;
        const TailCommand cmd{40, 2};
        const StateVec d = derivative(s, cmd, p);
        const StateVec fwd = pack(step_rk4(s, cmd, eps, p));
        const StateVec bwd = pack(step_rk4(s, cmd, -eps, p));
        const StateVec y0 = pack(s);
        for (size_t i = 0; i < d.size(); ++i) {
            INFO("component " << i);
            const double fd = (fwd[i] - bwd[i]) / (2 * eps);
            CHECK(fd == Catch::Approx(d[i]).margin(1e-6).epsilon(1e-6));
            (void)y0;
        }
    }
}

TEST_CASE("coasting matches the closed-form drag decay") {
    RobotParams p;
    const double beta = 0.5 * p.fluid_density * p.cd_surge * p.frontal_area /
                        (p.mass + p.added_mass_surge);
    FullState s;
    s.body.u = 0.5;
    const double dt = 1e-3;
    for (int i = 0; i < 5000; ++i) s = step_rk4(s, {0, 0}, dt, p);
    const double exact = 0.5 / (1 + beta * 0.5 * 5.0);
    CHECK(std::abs(s.body.u - exact) / exact < 1e-6);
    // pure surge decay: no sway or yaw is excited
    CHECK(s.body.v == 0.0);
    CHECK(s.body.r == 0.0);
    CHECK(s.body.y == 0.0);
}

namespace {

// Coasting error against the closed form, with drag boosted so the
// discretization error sits well above roundoff.
double coast_error(double dt) {
    RobotParams p;
    p.cd_surge = 1.0;
    p.frontal_area = 0.4;
    const double beta = 0.5 * p.fluid_density * p.cd_surge * p.frontal_area /
                        (p.mass + p.added_mass_surge);
    FullState s;
    s.body.u = 0.5;
    const double t_end = 0.2;
    const long n = std::lround(t_end / dt);
    for (long i = 0; i < n; ++i) s = step_rk4(s, {0, 0}, dt, p);
    return std::abs(s.body.u - 0.5 / (1 + beta * 0.5 * t_end));
}

}  // namespace

TEST_CASE("integrator shows fourth-order convergence") {
    const double ratio = coast_error(2.5e-3) / coast_error(1.25e-3);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("phase-inverted command mirrors the trajectory") {
    RobotParams p;
    SimConfig cfg;
    cfg.max_duration = 4.0;
    const TrajectoryLog a = simulate(FullState{}, {40, 2}, cfg, p);
    const TrajectoryLog b = simulate(FullState{}, {-40, 2}, cfg, p);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        const FullState& sa = a.samples[i];
        const FullState& sb = b.samples[i];
        REQUIRE(sa.body.x == Catch::Approx(sb.body.x).margin(1e-12));
        REQUIRE(sa.body.y == Catch::Approx(-sb.body.y).margin(1e-12));
        REQUIRE(sa.body.yaw == Catch::Approx(-sb.body.yaw).margin(1e-12));
        REQUIRE(sa.body.u == Catch::Approx(sb.body.u).margin(1e-12));
        REQUIRE(sa.body.v == Catch::Approx(-sb.body.v).margin(1e-12));
        REQUIRE(sa.body.r == Catch::Approx(-sb.body.r).margin(1e-12));
        REQUIRE(sa.tail.plate_angle ==
                Catch::Approx(-sb.tail.plate_angle).margin(1e-12));
        REQUIRE(sa.tail.hinge_angle ==
                Catch::Approx(-sb.tail.hinge_angle).margin(1e-12));
    }
}

TEST_CASE("simulate is deterministic to the byte") {
    RobotParams p;
    SimConfig cfg;
    cfg.max_duration = 3.0;
    const TrajectoryLog a = simulate(FullState{}, {60, 3}, cfg, p);
    const TrajectoryLog b = simulate(FullState{}, {60, 3}, cfg, p);
    CHECK(to_csv(a) == to_csv(b));
    CHECK(a.params_digest == b.params_digest);
}

TEST_CASE("zero command from rest logs identical zero states") {
    RobotParams p;
    SimConfig cfg;
    cfg.max_duration = 2.0;
    const TrajectoryLog log = simulate(FullState{}, {0, 0}, cfg, p);
    CHECK_FALSE(log.truncated);
    for (const FullState& s : log.samples) {
        REQUIRE(s.body.x == 0.0);
        REQUIRE(s.body.y == 0.0);
        REQUIRE(s.body.u == 0.0);
    }
}

TEST_CASE("telemetry timestamps are uniformly spaced") {
    RobotParams p;
    SimConfig cfg;
    cfg.max_duration = 2.0;
    const TrajectoryLog log = simulate(FullState{}, {40, 2}, cfg, p);
    const double frame = 1.0 / cfg.telemetry_rate;
    REQUIRE(log.samples.size() == 101);
    for (size_t i = 1; i < log.samples.size(); ++i)
        REQUIRE(log.samples[i].t - log.samples[i - 1].t ==
                Catch::Approx(frame).margin(0.5 * cfg.dt));
}

TEST_CASE("halving dt barely moves the trajectory") {
    RobotParams p;
    SimConfig c1;
    c1.max_duration = 10.0;
    SimConfig c2 = c1;
    c2.dt = c1.dt / 2;
    const TrajectoryLog a = simulate(FullState{}, {40, 2}, c1, p);
    const TrajectoryLog b = simulate(FullState{}, {40, 2}, c2, p);
    const BodyState& ba = a.samples.back().body;
    const BodyState& bb = b.samples.back().body;
    CHECK(std::hypot(ba.x - bb.x, ba.y - bb.y) < 1e-5);
}

TEST_CASE("free deceleration never gains mechanical energy") {
    RobotParams p;
    auto energy = [&](const FullState& f) {
        return 0.5 * ((p.mass + p.added_mass_surge) * f.body.u * f.body.u +
                      (p.mass + p.added_mass_sway) * f.body.v * f.body.v +
                      (p.yaw_inertia + p.added_yaw_inertia) * f.body.r * f.body.r +
                      p.fin_inertia * (f.tail.plate_rate * f.tail.plate_rate +
                                       f.tail.hinge_rate * f.tail.hinge_rate) +
                      p.plate_stiffness * f.tail.plate_angle * f.tail.plate_angle +
                      p.hinge_stiffness * f.tail.hinge_angle * f.tail.hinge_angle);
    };
    FullState s;
    s.body.u = 0.4;
    s.body.v = 0.2;
    s.body.r = 1.0;
    double prev = energy(s);
    for (int i = 0; i < 20000; ++i) {
        s = step_rk4(s, {0, 0}, 5e-4, p);
        const double e = energy(s);
        REQUIRE(e <= prev * (1 + 1e-12));
        prev = e;
    }
}

TEST_CASE("steady swimming holds its heading on average") {
    RobotParams p;
    SimConfig cfg;
    const TrajectoryLog log = run_launch({20, 3}, cfg, p);
    const auto seg = detect_steady(log);
    REQUIRE(seg.has_value());
    const double t0 = seg->t_start;
    const double t1 = t0 + 20.0 / 3.0; // 20 stroke periods
    double mean = 0.0;
    int n = 0;
    for (const FullState& s : log.samples) {
        if (s.t < t0 || s.t > t1) continue;
        mean += s.body.yaw;
        ++n;
    }
    REQUIRE(n > 0);
    CHECK(std::abs(rad2deg(mean / n)) < 2.0);
}

TEST_CASE("instability aborts with a truncated, flagged log") {
    RobotParams p;
    p.fin_inertia = 1e-6; // hinge far stiffer than the step can resolve
    p.hinge_stiffness = 5.0;
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.max_duration = 5.0;
    const TrajectoryLog log = simulate(FullState{}, {80, 7}, cfg, p);
    CHECK(log.truncated);
    CHECK(log.samples.size() < 251);
}
