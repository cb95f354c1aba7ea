// Command-line front end: single launches, tail calibration, the full
// amplitude x frequency sweep, and the control-protocol server.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "fishsim/harness.hpp"
#include "fishsim/server.hpp"

namespace {

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

fishsim::RobotParams load_config(const std::string& path) {
    if (path.empty()) return fishsim::RobotParams{};
    std::ifstream f(path);
    if (!f) throw fishsim::ConfigError("cannot open config file " + path);
    std::ostringstream text;
    text << f.rdbuf();
    return fishsim::load_params(text.str());
}

void write_or_print(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw fishsim::HarnessError("cannot write " + out_path);
    f << text;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thunniform robotic fish simulator and experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    double amp = 40.0, freq = 2.0;
    std::string amps_csv = "20,40,60,80", freqs_csv = "0.5,1,2,3,5,7";
    int port = fishsim::kDefaultPort;
    fishsim::SimConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "robot parameter file (key=value)");
        sub->add_option("--dt", cfg.dt, "integrator step, s")->check(CLI::Range(1e-7, 0.01));
        sub->add_option("--duration", cfg.max_duration, "simulated time, s");
    };

    CLI::App* run = app.add_subcommand("run", "single launch, trajectory CSV");
    run->add_option("--amp", amp, "stroke amplitude, deg")->required();
    run->add_option("--freq", freq, "stroke frequency, Hz")->required();
    run->add_option("--out", out_path, "output CSV path (default stdout)");
    add_common(run);

    CLI::App* sweep = app.add_subcommand("sweep", "amplitude x frequency sweep");
    sweep->add_option("--amps", amps_csv, "amplitudes, deg (comma separated)");
    sweep->add_option("--freqs", freqs_csv, "frequencies, Hz (comma separated)");
    sweep->add_option("--out", out_path, "output CSV path (default stdout)");
    add_common(sweep);

    CLI::App* calibrate = app.add_subcommand("calibrate", "clamped-body tail calibration");
    calibrate->add_option("--amp", amp, "stroke amplitude, deg")->required();
    calibrate->add_option("--freq", freq, "stroke frequency, Hz")->required();
    add_common(calibrate);

    CLI::App* serve = app.add_subcommand("serve", "control-protocol server");
    serve->add_option("--port", port, "TCP port");
    add_common(serve);

    CLI11_PARSE(app, argc, argv);

    try {
        const fishsim::RobotParams params = load_config(config_path);

        if (run->parsed()) {
            const fishsim::TailCommand cmd{amp, freq};
            if (fishsim::validate_command(cmd) != fishsim::CommandCheck::Ok) {
                std::cerr << "error: command out of range (amp in [0,80] deg, "
                             "freq in [0,7] Hz)\n";
                return 1;
            }
            const auto log = fishsim::run_launch(cmd, cfg, params);
            write_or_print(out_path, fishsim::to_csv(log));
            if (log.truncated) {
                std::cerr << "error: simulation went unstable; log truncated\n";
                return 1;
            }
        } else if (sweep->parsed()) {
            const auto amps = parse_list(amps_csv);
            const auto freqs = parse_list(freqs_csv);
            for (double a : amps)
                for (double f : freqs)
                    if (fishsim::validate_command({a, f}) != fishsim::CommandCheck::Ok) {
                        std::cerr << "error: sweep cell (" << a << " deg, " << f
                                  << " Hz) out of range\n";
                        return 1;
                    }
            const auto records = fishsim::sweep(amps, freqs, cfg, params, out_path);
            if (out_path.empty()) std::cout << fishsim::sweep_csv(records);
        } else if (calibrate->parsed()) {
            const fishsim::TailCommand cmd{amp, freq};
            if (fishsim::validate_command(cmd) != fishsim::CommandCheck::Ok ||
                cmd.frequency_hz <= 0.0) {
                std::cerr << "error: calibration needs amp in [0,80] deg and "
                             "freq in (0,7] Hz\n";
                return 1;
            }
            const auto cal = fishsim::calibrate_tail(cmd, cfg, params);
            std::cout << "amp_actual_deg=" << fishsim::format_g9(cal.amp_actual_deg)
                      << "\nperiod_actual_s="
                      << fishsim::format_g9(cal.period_actual_s) << "\n";
        } else if (serve->parsed()) {
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            fishsim::ProtocolServer server(cfg, params, port);
            std::cerr << "listening on 127.0.0.1:" << server.port() << "\n";
            server.run(g_stop);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
