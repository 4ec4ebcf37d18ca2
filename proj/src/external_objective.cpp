#include "hdbo/external_objective.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string_view>
#include <thread>
#include <vector>

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hdbo/error.hpp"

extern char** environ;

namespace hdbo {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left > 0 ? static_cast<int>(left) : 0;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

ExternalObjective::ExternalObjective(std::string command, std::size_t dim, std::chrono::milliseconds timeout)
    : command_(std::move(command)), dim_(dim), timeout_(timeout) {
    if (command_.empty()) throw ConfigError("external objective command is empty");
    if (timeout_.count() <= 0) throw ConfigError("external objective timeout must be positive");
    spawn();
}

ExternalObjective::~ExternalObjective() {
    terminate();
}

void ExternalObjective::spawn() {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
        throw EvaluationError(std::string("socketpair failed: ") + std::strerror(errno));
    }
    // Everything the child needs is prepared before fork(); between fork and
    // exec only async-signal-safe calls are made.
    std::vector<std::string> env_storage;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        if (std::strncmp(*e, "BO_OBJECTIVE_DIM=", 17) != 0) env_storage.emplace_back(*e);
    }
    env_storage.push_back("BO_OBJECTIVE_DIM=" + std::to_string(dim_));
    std::vector<char*> envp;
    for (auto& s : env_storage) envp.push_back(s.data());
    envp.push_back(nullptr);
    const char* argv[] = {"sh", "-c", command_.c_str(), nullptr};

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(sv[0]);
        ::close(sv[1]);
        throw EvaluationError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(sv[1], STDIN_FILENO);
        ::dup2(sv[1], STDOUT_FILENO);
        ::execve("/bin/sh", const_cast<char* const*>(argv), envp.data());
        ::_exit(127);
    }
    ::close(sv[1]);
    fd_ = sv[0];
    pid_ = pid;
}

void ExternalObjective::terminate() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    if (pid_ > 0) {
        // Give the child a moment to exit on EOF before killing it.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
    }
}

void ExternalObjective::fail(const std::string& why, const std::string& request) {
    broken_ = true;
    terminate();
    throw EvaluationError("external objective '" + command_ + "': " + why + " (request: " + request + ")");
}

std::string ExternalObjective::format_request(const Eigen::VectorXd& x) {
    std::string line = "EVAL";
    char buf[64];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), x[i]);
        line.push_back(' ');
        line.append(buf, res.ptr);
    }
    return line;
}

double ExternalObjective::operator()(const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != dim_) throw ContractError("point has the wrong dimension");
    const std::string request = format_request(x);
    if (broken_) throw EvaluationError("external objective '" + command_ + "' failed earlier (request: " + request + ")");

    const auto deadline = Clock::now() + timeout_;
    const std::string wire = request + "\n";
    std::size_t sent = 0;
    while (sent < wire.size()) {
        pollfd p{fd_, POLLOUT, 0};
        const int ready = ::poll(&p, 1, remaining_ms(deadline));
        if (ready == 0) fail("timed out writing request", request);
        if (ready < 0) {
            if (errno == EINTR) continue;
            fail(std::string("poll failed: ") + std::strerror(errno), request);
        }
        const ssize_t n = ::send(fd_, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            fail(std::string("write failed: ") + std::strerror(errno), request);
        }
        sent += static_cast<std::size_t>(n);
    }

    std::size_t newline = buffer_.find('\n');
    while (newline == std::string::npos) {
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, remaining_ms(deadline));
        if (ready == 0) fail("timed out waiting for a reply", request);
        if (ready < 0) {
            if (errno == EINTR) continue;
            fail(std::string("poll failed: ") + std::strerror(errno), request);
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n == 0) fail("process closed its output (crashed or exited)", request);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            fail(std::string("read failed: ") + std::strerror(errno), request);
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
        newline = buffer_.find('\n');
    }
    const std::string line = buffer_.substr(0, newline);
    buffer_.erase(0, newline + 1);

    const std::string_view token = trim(line);
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(value)) {
        fail("malformed reply '" + line + "'", request);
    }
    ++evaluations_;
    return value;
}

double external_eval(const std::string& command, std::chrono::milliseconds timeout, const Eigen::VectorXd& x) {
    ExternalObjective objective(command, static_cast<std::size_t>(x.size()), timeout);
    return objective(x);
}

}  // namespace hdbo
