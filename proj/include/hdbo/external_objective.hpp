#ifndef HDBO_EXTERNAL_OBJECTIVE_HPP
#define HDBO_EXTERNAL_OBJECTIVE_HPP

#include <chrono>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "hdbo/objectives.hpp"

namespace hdbo {

/// Black box served by a child process over a lock-step line protocol.
///
/// The command runs under /bin/sh with BO_OBJECTIVE_DIM set to the
/// dimension. Each evaluation writes "EVAL v1 v2 ... vD\n" (shortest
/// round-trip decimal) to the child's stdin and reads one line holding a
/// single decimal real from its stdout. Timeouts, a dead child or a
/// malformed reply raise EvaluationError quoting the request, and the child
/// is not reused afterwards.
class ExternalObjective final : public Objective {
public:
    ExternalObjective(std::string command, std::size_t dim, std::chrono::milliseconds timeout);
    ~ExternalObjective() override;

    ExternalObjective(const ExternalObjective&) = delete;
    ExternalObjective& operator=(const ExternalObjective&) = delete;

    double operator()(const Eigen::VectorXd& x) override;
    [[nodiscard]] std::size_t dim() const override { return dim_; }
    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

    /// Request line for x, without the trailing newline.
    static std::string format_request(const Eigen::VectorXd& x);

private:
    void spawn();
    void terminate();
    [[noreturn]] void fail(const std::string& why, const std::string& request);

    std::string command_;
    std::size_t dim_;
    std::chrono::milliseconds timeout_;
    int fd_ = -1;
    int pid_ = -1;
    bool broken_ = false;
    std::string buffer_;
    std::size_t evaluations_ = 0;
};

double external_eval(const std::string& command, std::chrono::milliseconds timeout, const Eigen::VectorXd& x);

}  // namespace hdbo

#endif  // HDBO_EXTERNAL_OBJECTIVE_HPP
