#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>

#include "fishsim/dynamics.hpp"
#include "fishsim/protocol.hpp"

namespace fishsim {

constexpr int kDefaultPort = 4747;

struct ServerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-based command server over TCP: the stand-in for the WiFi link between
// the ground station and the robot. One client at a time; a second connection
// is refused with "ERR BUSY". While Running, the simulation advances in wall
// time and telemetry frames are pushed at the telemetry rate.
class ProtocolServer {
  public:
    ProtocolServer(SimConfig cfg, RobotParams params, int port = kDefaultPort)
        : cfg_(cfg), params_(std::move(params)) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw ServerError("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<uint16_t>(port));
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(listen_fd_);
            throw ServerError("bind() failed on port " + std::to_string(port));
        }
        if (::listen(listen_fd_, 4) < 0) {
            ::close(listen_fd_);
            throw ServerError("listen() failed");
        }
        socklen_t len = sizeof(addr);
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }

    ~ProtocolServer() {
        if (client_fd_ >= 0) ::close(client_fd_);
        if (listen_fd_ >= 0) ::close(listen_fd_);
    }

    ProtocolServer(const ProtocolServer&) = delete;
    ProtocolServer& operator=(const ProtocolServer&) = delete;

    int port() const { return port_; }

    // Blocks until stop becomes true.
    void run(const std::atomic<bool>& stop) {
        using clock = std::chrono::steady_clock;
        const auto frame_interval = std::chrono::duration_cast<clock::duration>(
            std::chrono::duration<double>(1.0 / cfg_.telemetry_rate));
        auto next_frame = clock::now();

        while (!stop.load()) {
            pollfd fds[2];
            fds[0] = {listen_fd_, POLLIN, 0};
            fds[1] = {client_fd_, POLLIN, 0};
            const int nfds = client_fd_ >= 0 ? 2 : 1;

            int timeout_ms = 20;
            if (running()) {
                const auto until = next_frame - clock::now();
                timeout_ms = static_cast<int>(std::max<long long>(
                    0, std::chrono::duration_cast<std::chrono::milliseconds>(until)
                           .count()));
                timeout_ms = std::min(timeout_ms, 20);
            }
            ::poll(fds, static_cast<nfds_t>(nfds), timeout_ms);

            if (fds[0].revents & POLLIN) accept_client();
            if (nfds == 2 && (fds[1].revents & (POLLIN | POLLHUP))) read_client();

            if (running() && clock::now() >= next_frame) {
                advance_one_frame();
                next_frame += frame_interval;
                if (clock::now() > next_frame + 10 * frame_interval)
                    next_frame = clock::now(); // dropped behind; resynchronize
            } else if (!running()) {
                next_frame = clock::now();
            }
        }
    }

  private:
    bool running() const {
        return client_fd_ >= 0 && session_.mode == SessionState::Mode::Running;
    }

    void accept_client() {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return;
        if (client_fd_ >= 0) {
            const char busy[] = "ERR BUSY\n";
            ::send(fd, busy, sizeof(busy) - 1, MSG_NOSIGNAL);
            ::close(fd);
            return;
        }
        client_fd_ = fd;
        session_ = SessionState{};
        rx_.clear();
    }

    void drop_client() {
        ::close(client_fd_);
        client_fd_ = -1;
        session_ = SessionState{};
        rx_.clear();
    }

    void read_client() {
        char buf[512];
        const ssize_t n = ::recv(client_fd_, buf, sizeof(buf), 0);
        if (n <= 0) {
            drop_client();
            return;
        }
        rx_.append(buf, static_cast<size_t>(n));
        size_t nl;
        while (client_fd_ >= 0 && (nl = rx_.find('\n')) != std::string::npos) {
            std::string line = rx_.substr(0, nl);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            rx_.erase(0, nl + 1);
            handle_line(line);
        }
    }

    void handle_line(const std::string& line) {
        const ParseResult parsed = parse_command(line);
        if (const auto* err = std::get_if<ProtocolError>(&parsed)) {
            send_line((err->kind == ProtocolError::Kind::Syntax ? "ERR SYNTAX "
                                                                : "ERR RANGE ") +
                      err->message);
            return;
        }
        const Command& cmd = std::get<Command>(parsed);
        const bool was_idle = session_.mode == SessionState::Mode::Idle;
        SessionResult result = session_step(session_, cmd);
        session_ = result.state;
        if (was_idle && session_.mode == SessionState::Mode::Running)
            sim_state_ = FullState{}; // fresh launch from rest
        send_line(result.response);
    }

    void advance_one_frame() {
        const long steps =
            std::max(1l, std::lround(1.0 / (cfg_.telemetry_rate * cfg_.dt)));
        try {
            for (long i = 0; i < steps; ++i)
                sim_state_ = step_rk4(sim_state_, session_.active_cmd, cfg_.dt, params_);
        } catch (const IntegrationError&) {
            send_line("ERR UNSTABLE");
            session_.mode = SessionState::Mode::Idle;
            return;
        }
        send_line(encode_telemetry(sim_state_));
    }

    void send_line(const std::string& line) {
        if (client_fd_ < 0) return;
        const std::string out = line + "\n";
        if (::send(client_fd_, out.data(), out.size(), MSG_NOSIGNAL) < 0)
            drop_client();
    }

    SimConfig cfg_;
    RobotParams params_;
    int listen_fd_ = -1;
    int client_fd_ = -1;
    int port_ = 0;
    SessionState session_;
    FullState sim_state_;
    std::string rx_;
};

}  // namespace fishsim
