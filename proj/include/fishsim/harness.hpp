#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fishsim/dynamics.hpp"
#include "fishsim/params.hpp"
#include "fishsim/tail.hpp"
#include "fishsim/types.hpp"

namespace fishsim {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Window of a launch where the period-averaged speed is constant within
// tolerance; the measurement segment of the pool protocol.
struct SteadySegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double mean_speed = 0.0;       // m/s
    double yaw_peak_to_peak = 0.0; // rad
};

// One sweep cell.
struct ExperimentRecord {
    double amp_cmd_deg = 0.0;
    double freq_cmd_hz = 0.0;
    double amp_actual_deg = 0.0;
    double period_actual_s = 0.0;
    double speed_mps = 0.0;
    double yaw_pp_rad = 0.0;
    bool steady_reached = false;
};

// Launch from rest at the origin, heading +x.
inline TrajectoryLog run_launch(const TailCommand& cmd, const SimConfig& cfg,
                                const RobotParams& p) {
    return simulate(FullState{}, cmd, cfg, p);
}

namespace detail {

// Linear interpolation at the exact instant. Period boundaries rarely land
// on telemetry samples; interpolation keeps them period-synchronous so the
// rocking oscillation cancels.
inline FullState sample_at(const TrajectoryLog& log, double t) {
    const double t0 = log.samples.front().t;
    const double dt = log.samples[1].t - log.samples[0].t;
    const double pos = (t - t0) / dt;
    const size_t lo = static_cast<size_t>(
        std::clamp(std::floor(pos), 0.0, static_cast<double>(log.samples.size() - 1)));
    if (lo + 1 >= log.samples.size()) return log.samples.back();
    const double w = std::clamp(pos - static_cast<double>(lo), 0.0, 1.0);
    const FullState& a = log.samples[lo];
    const FullState& b = log.samples[lo + 1];
    FullState s;
    s.t = (1 - w) * a.t + w * b.t;
    s.body.x = (1 - w) * a.body.x + w * b.body.x;
    s.body.y = (1 - w) * a.body.y + w * b.body.y;
    s.body.yaw = (1 - w) * a.body.yaw + w * b.body.yaw;
    s.body.u = (1 - w) * a.body.u + w * b.body.u;
    s.body.v = (1 - w) * a.body.v + w * b.body.v;
    s.body.r = (1 - w) * a.body.r + w * b.body.r;
    s.tail.plate_angle = (1 - w) * a.tail.plate_angle + w * b.tail.plate_angle;
    s.tail.hinge_angle = (1 - w) * a.tail.hinge_angle + w * b.tail.hinge_angle;
    return s;
}

// Straight-line CoM displacement per stroke period, divided by the period.
// Period-synchronous endpoints cancel the flapping-induced rocking.
inline std::vector<double> period_speeds(const TrajectoryLog& log, double period) {
    std::vector<double> speeds;
    const double t_begin = log.samples.front().t;
    const double t_last = log.samples.back().t;
    for (int k = 0;; ++k) {
        const double t0 = t_begin + k * period;
        const double t1 = t_begin + (k + 1) * period;
        if (t1 > t_last + 1e-9) break;
        const FullState a = sample_at(log, t0);
        const FullState b = sample_at(log, t1);
        speeds.push_back(std::hypot(b.body.x - a.body.x, b.body.y - a.body.y) /
                         period);
    }
    return speeds;
}

}  // namespace detail

// Earliest run of at least min_periods consecutive stroke periods whose
// per-period speeds all lie within rel_tol of the run mean; the run is
// extended as far as the condition holds.
inline std::optional<SteadySegment> detect_steady(const TrajectoryLog& log,
                                                  double rel_tol = 0.02,
                                                  int min_periods = 5) {
    if (log.samples.size() < 2) throw HarnessError("detect_steady: empty log");
    if (log.cmd.frequency_hz <= 0.0)
        throw HarnessError("detect_steady: zero stroke frequency");
    const double period = 1.0 / log.cmd.frequency_hz;
    const std::vector<double> speeds = detail::period_speeds(log, period);

    auto window_ok = [&](size_t start, size_t len) {
        double mean = 0.0;
        for (size_t i = start; i < start + len; ++i) mean += speeds[i];
        mean /= static_cast<double>(len);
        for (size_t i = start; i < start + len; ++i)
            if (std::abs(speeds[i] - mean) > rel_tol * std::abs(mean)) return false;
        return true;
    };

    const size_t want = static_cast<size_t>(min_periods);
    for (size_t start = 0; start + want <= speeds.size(); ++start) {
        if (!window_ok(start, want)) continue;
        size_t len = want;
        while (start + len + 1 <= speeds.size() && window_ok(start, len + 1)) ++len;

        SteadySegment seg;
        const double t_begin = log.samples.front().t;
        seg.t_start = t_begin + start * period;
        seg.t_end = t_begin + (start + len) * period;
        double mean = 0.0;
        for (size_t i = start; i < start + len; ++i) mean += speeds[i];
        seg.mean_speed = mean / static_cast<double>(len);

        double yaw_min = 1e300, yaw_max = -1e300;
        for (const FullState& s : log.samples) {
            if (s.t < seg.t_start - 1e-9 || s.t > seg.t_end + 1e-9) continue;
            yaw_min = std::min(yaw_min, s.body.yaw);
            yaw_max = std::max(yaw_max, s.body.yaw);
        }
        seg.yaw_peak_to_peak = yaw_max - yaw_min;
        return seg;
    }
    return std::nullopt;
}

// Straight-line displacement across the segment (truncated to a whole number
// of stroke periods) projected on the mean heading, over elapsed time.
inline double measure_speed(const TrajectoryLog& log, const SteadySegment& seg,
                            const TailCommand& cmd) {
    if (cmd.frequency_hz <= 0.0)
        throw HarnessError("measure_speed: zero stroke frequency");
    const double period = 1.0 / cmd.frequency_hz;
    const double span = seg.t_end - seg.t_start;
    const long whole = static_cast<long>(std::floor(span / period + 1e-9));
    if (whole < 1) throw HarnessError("measure_speed: segment shorter than one period");
    const double t_end = seg.t_start + whole * period;

    const FullState a = detail::sample_at(log, seg.t_start);
    const FullState b = detail::sample_at(log, t_end);

    double heading_sum_c = 0.0, heading_sum_s = 0.0;
    for (const FullState& s : log.samples) {
        if (s.t < seg.t_start - 1e-9 || s.t > t_end + 1e-9) continue;
        heading_sum_c += std::cos(s.body.yaw);
        heading_sum_s += std::sin(s.body.yaw);
    }
    const double heading = std::atan2(heading_sum_s, heading_sum_c);

    const double dx = b.body.x - a.body.x;
    const double dy = b.body.y - a.body.y;
    return (dx * std::cos(heading) + dy * std::sin(heading)) / (b.t - a.t);
}

struct GridMeasurement {
    double distance = 0.0; // m
    double elapsed = 0.0;  // s
    double speed = 0.0;    // m/s
};

// Marked-grid digitization of the trajectory: CoM positions are quantized to
// the nearest cell corner and straight segments between successive distinct
// corners are summed. Quantization error is bounded by 2*cell per endpoint.
inline GridMeasurement grid_digitize(const TrajectoryLog& log, double cell = 0.1) {
    if (cell <= 0.0) throw HarnessError("grid_digitize: cell must be positive");
    if (log.samples.size() < 2) throw HarnessError("grid_digitize: empty log");

    auto corner = [&](const FullState& s) {
        return std::pair<long, long>{std::lround(s.body.x / cell),
                                     std::lround(s.body.y / cell)};
    };

    GridMeasurement out;
    auto prev = corner(log.samples.front());
    int cells_visited = 0;
    for (const FullState& s : log.samples) {
        const auto c = corner(s);
        if (c != prev) {
            out.distance += cell * std::hypot(static_cast<double>(c.first - prev.first),
                                              static_cast<double>(c.second - prev.second));
            prev = c;
            ++cells_visited;
        }
    }
    if (cells_visited < 1)
        throw HarnessError("grid_digitize: trajectory spans fewer than 2 cells");
    out.elapsed = log.samples.back().t - log.samples.front().t;
    out.speed = out.distance / out.elapsed;
    return out;
}

struct TailCalibration {
    double amp_actual_deg = 0.0;
    double period_actual_s = 0.0;
};

// Clamped-body calibration: body frozen at rest, tail ODE active with hydro
// feedback. After a 10-period transient, the actual fin amplitude is half the
// peak-to-peak of the total tail angle and the period is the mean spacing of
// upward zero crossings.
inline TailCalibration calibrate_tail(const TailCommand& cmd, const SimConfig& cfg,
                                      const RobotParams& p) {
    if (cmd.frequency_hz <= 0.0)
        throw HarnessError("calibrate_tail: zero stroke frequency");
    const double period = 1.0 / cmd.frequency_hz;
    const double t_transient = 10.0 * period;
    const int measure_periods = 6;
    const double t_stop = t_transient + measure_periods * period;

    const BodyState clamped{};
    TailState tail;
    double t = 0.0;

    double angle_min = 1e300, angle_max = -1e300;
    std::vector<double> crossings;
    double prev_angle = 0.0;
    double prev_t = 0.0;

    while (t < t_stop - 0.5 * cfg.dt) {
        const FinKinematics fin = fin_world_kinematics(clamped, tail, p);
        const double hinge_moment = fin_wrench(fin, clamped, p).hinge_moment;
        const double servo = servo_angle(cmd, t);
        const double drive = plate_drive_angle(servo, p);
        const double drive_rate = plate_drive_angle(servo_rate(cmd, t), p);
        tail = step_tail(tail, drive, drive_rate, hinge_moment, cfg.dt, p);
        if (!finite(tail) || std::abs(tail.plate_angle) > 1e6 ||
            std::abs(tail.hinge_angle) > 1e6 || std::abs(tail.plate_rate) > 1e6 ||
            std::abs(tail.hinge_rate) > 1e6)
            throw IntegrationError("calibrate_tail: tail diverged at t=" +
                                   std::to_string(t));
        t += cfg.dt;

        if (t >= t_transient) {
            const double angle = tail.plate_angle + tail.hinge_angle;
            angle_min = std::min(angle_min, angle);
            angle_max = std::max(angle_max, angle);
            if (prev_t >= t_transient && prev_angle <= 0.0 && angle > 0.0) {
                // linear interpolation of the upward crossing instant
                crossings.push_back(prev_t + cfg.dt * (-prev_angle) /
                                                 (angle - prev_angle));
            }
            prev_angle = angle;
            prev_t = t;
        }
    }

    TailCalibration out;
    out.amp_actual_deg = rad2deg(0.5 * (angle_max - angle_min));
    if (crossings.size() >= 2)
        out.period_actual_s = (crossings.back() - crossings.front()) /
                              static_cast<double>(crossings.size() - 1);
    return out;
}

inline ExperimentRecord run_cell(double amp_deg, double freq_hz, const SimConfig& cfg,
                                 const RobotParams& p) {
    ExperimentRecord rec;
    rec.amp_cmd_deg = amp_deg;
    rec.freq_cmd_hz = freq_hz;
    const TailCommand cmd{amp_deg, freq_hz};

    try {
        const TailCalibration cal = calibrate_tail(cmd, cfg, p);
        rec.amp_actual_deg = cal.amp_actual_deg;
        rec.period_actual_s = cal.period_actual_s;

        const TrajectoryLog log = run_launch(cmd, cfg, p);
        if (log.truncated) return rec;
        if (auto seg = detect_steady(log)) {
            rec.steady_reached = true;
            rec.speed_mps = measure_speed(log, *seg, cmd);
            rec.yaw_pp_rad = seg->yaw_peak_to_peak;
        }
    } catch (const IntegrationError&) {
        rec.steady_reached = false;
    }
    return rec;
}

inline std::string sweep_csv(const std::vector<ExperimentRecord>& records) {
    std::string out =
        "amp_cmd_deg,freq_cmd_hz,amp_actual_deg,period_actual_s,speed_mps,"
        "yaw_pp_rad,steady_reached\n";
    for (const ExperimentRecord& r : records) {
        out += format_g9(r.amp_cmd_deg) + ',' + format_g9(r.freq_cmd_hz) + ',' +
               format_g9(r.amp_actual_deg) + ',' + format_g9(r.period_actual_s) +
               ',' + format_g9(r.speed_mps) + ',' + format_g9(r.yaw_pp_rad) + ',' +
               (r.steady_reached ? "1" : "0") + '\n';
    }
    return out;
}

// Full amplitude x frequency sweep. Per-cell failures leave the row with
// steady_reached=0 and the sweep continues. Writes the main CSV plus the two
// derived tables (speed vs actual amplitude, speed vs actual period).
inline std::vector<ExperimentRecord> sweep(const std::vector<double>& amps_deg,
                                           const std::vector<double>& freqs_hz,
                                           const SimConfig& cfg, const RobotParams& p,
                                           const std::string& out_path = "") {
    std::vector<ExperimentRecord> records;
    for (double amp : amps_deg)
        for (double freq : freqs_hz) records.push_back(run_cell(amp, freq, cfg, p));

    if (!out_path.empty()) {
        {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw HarnessError("cannot write " + out_path);
            f << sweep_csv(records);
        }
        {
            std::ofstream f(out_path + ".speed_vs_amplitude.csv", std::ios::binary);
            f << "freq_cmd_hz,amp_actual_deg,speed_mps\n";
            for (const ExperimentRecord& r : records)
                f << format_g9(r.freq_cmd_hz) << ',' << format_g9(r.amp_actual_deg)
                  << ',' << format_g9(r.speed_mps) << '\n';
        }
        {
            std::ofstream f(out_path + ".speed_vs_period.csv", std::ios::binary);
            f << "amp_cmd_deg,period_actual_s,speed_mps\n";
            for (const ExperimentRecord& r : records)
                f << format_g9(r.amp_cmd_deg) << ',' << format_g9(r.period_actual_s)
                  << ',' << format_g9(r.speed_mps) << '\n';
        }
    }
    return records;
}

}  // namespace fishsim
