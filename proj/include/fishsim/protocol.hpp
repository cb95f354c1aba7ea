#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fishsim/types.hpp"

namespace fishsim {

// Ground-station command set. One command per protocol line.
struct Command {
    enum class Kind { SetAmplitude, SetFrequency, Start, Stop, Status };
    Kind kind = Kind::Status;
    double value = 0.0; // SetAmplitude: deg, SetFrequency: Hz
};

struct ProtocolError {
    enum class Kind { Syntax, Range };
    Kind kind;
    std::string message;
};

using ParseResult = std::variant<Command, ProtocolError>;

namespace detail {

// Strict decimal: digits with optional fraction, no sign, no exponent.
inline std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0) return std::nullopt;
    if (i < s.size()) {
        if (s[i] != '.') return std::nullopt;
        size_t j = ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == j || i != s.size()) return std::nullopt;
    }
    return std::stod(std::string(s));
}

inline std::vector<std::string_view> split_single_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (start <= line.size()) {
        size_t sp = line.find(' ', start);
        if (sp == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, sp - start));
        start = sp + 1;
    }
    return out;
}

}  // namespace detail

// Grammar: `SET AMP <decimal>` | `SET FREQ <decimal>` | `START` | `STOP` |
// `STATUS`. Case-sensitive, fields separated by single spaces. Range limits
// checked at parse time.
inline ParseResult parse_command(std::string_view line) {
    const auto tokens = detail::split_single_spaces(line);
    for (auto t : tokens)
        if (t.empty())
            return ProtocolError{ProtocolError::Kind::Syntax, "malformed spacing"};

    if (tokens.size() == 1) {
        if (tokens[0] == "START") return Command{Command::Kind::Start};
        if (tokens[0] == "STOP") return Command{Command::Kind::Stop};
        if (tokens[0] == "STATUS") return Command{Command::Kind::Status};
        return ProtocolError{ProtocolError::Kind::Syntax,
                             "unknown command `" + std::string(tokens[0]) + "`"};
    }
    if (tokens.size() == 3 && tokens[0] == "SET") {
        auto value = detail::parse_decimal(tokens[2]);
        if (!value)
            return ProtocolError{ProtocolError::Kind::Syntax,
                                 "bad decimal `" + std::string(tokens[2]) + "`"};
        if (tokens[1] == "AMP") {
            if (*value > kMaxAmplitudeDeg)
                return ProtocolError{ProtocolError::Kind::Range,
                                     "amplitude above 80 deg"};
            return Command{Command::Kind::SetAmplitude, *value};
        }
        if (tokens[1] == "FREQ") {
            if (*value > kMaxFrequencyHz)
                return ProtocolError{ProtocolError::Kind::Range,
                                     "frequency above 7 Hz"};
            return Command{Command::Kind::SetFrequency, *value};
        }
    }
    return ProtocolError{ProtocolError::Kind::Syntax, "unknown command"};
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline std::string serialize_command(const Command& c) {
    switch (c.kind) {
        case Command::Kind::SetAmplitude: return "SET AMP " + format_number(c.value);
        case Command::Kind::SetFrequency: return "SET FREQ " + format_number(c.value);
        case Command::Kind::Start: return "START";
        case Command::Kind::Stop: return "STOP";
        case Command::Kind::Status: return "STATUS";
    }
    return "";
}

// Launch state machine. Parameters are frozen at START and stay locked until
// STOP, mirroring one pool launch with fixed controller settings.
struct SessionState {
    enum class Mode { Idle, Running };
    Mode mode = Mode::Idle;
    TailCommand pending_cmd;
    TailCommand active_cmd;
};

struct SessionResult {
    SessionState state;
    std::string response;
};

inline std::string status_line(const SessionState& s) {
    const bool running = s.mode == SessionState::Mode::Running;
    const TailCommand& shown = running ? s.active_cmd : s.pending_cmd;
    return std::string("STATUS ") + (running ? "RUNNING" : "IDLE") + " AMP " +
           format_number(shown.amplitude_deg) + " FREQ " +
           format_number(shown.frequency_hz);
}

inline SessionResult session_step(const SessionState& state, const Command& cmd) {
    SessionState next = state;
    switch (cmd.kind) {
        case Command::Kind::SetAmplitude:
        case Command::Kind::SetFrequency:
            if (state.mode == SessionState::Mode::Running)
                return {state, "ERR LOCKED"};
            if (cmd.kind == Command::Kind::SetAmplitude)
                next.pending_cmd.amplitude_deg = cmd.value;
            else
                next.pending_cmd.frequency_hz = cmd.value;
            return {next, "OK"};
        case Command::Kind::Start:
            next.mode = SessionState::Mode::Running;
            next.active_cmd = state.pending_cmd;
            return {next, "OK RUNNING"};
        case Command::Kind::Stop:
            next.mode = SessionState::Mode::Idle;
            return {next, "OK IDLE"};
        case Command::Kind::Status:
            return {state, status_line(state)};
    }
    return {state, "ERR INTERNAL"};
}

// Telemetry frame: `T <t> <x> <y> <yaw> <u> <v> <r>`, 9 significant digits.
inline std::string encode_telemetry(const FullState& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "T %.9g %.9g %.9g %.9g %.9g %.9g %.9g", s.t,
                  s.body.x, s.body.y, s.body.yaw, s.body.u, s.body.v, s.body.r);
    return buf;
}

inline std::optional<FullState> decode_telemetry(std::string_view frame) {
    FullState s;
    char tail = 0;
    const int n =
        std::sscanf(std::string(frame).c_str(), "T %lf %lf %lf %lf %lf %lf %lf %c",
                    &s.t, &s.body.x, &s.body.y, &s.body.yaw, &s.body.u, &s.body.v,
                    &s.body.r, &tail);
    if (n != 7) return std::nullopt;
    if (!finite(s)) return std::nullopt;
    return s;
}

}  // namespace fishsim
