#ifndef HDBO_OBJECTIVES_HPP
#define HDBO_OBJECTIVES_HPP

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "hdbo/doe.hpp"

namespace hdbo {

enum class ObjectiveKind { Sphere, Ellipsoid, Rosenbrock, Ackley, Rastrigin, Griewank, Levy, Fig1Demo, External };

std::string to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view name);

/// Literature domain for each analytic kind (fig1-demo: [-5, 5]).
SearchBox default_box(ObjectiveKind kind, std::size_t dim);

/// Analytic functions are evaluated as f(Q (x - shift)). Rosenbrock and
/// Levy are stated in the shifted-by-one form, so every analytic kind except
/// fig1-demo has global minimum 0 at x = shift.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Sphere;
    SearchBox box = SearchBox::cube(1, -1.0, 1.0);
    std::optional<Eigen::VectorXd> shift;
    std::optional<Eigen::MatrixXd> rotation;
    std::string command;
    std::chrono::milliseconds timeout{10000};

    /// Spec with the kind's default box.
    static ObjectiveSpec make(ObjectiveKind kind, std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return box.dim(); }
    /// Checks shift-in-box, rotation orthogonality and per-kind dimension rules.
    void validate() const;
};

/// Untransformed base functions.
namespace functions {
double sphere(const Eigen::VectorXd& z);
double ellipsoid(const Eigen::VectorXd& z);
double rosenbrock(const Eigen::VectorXd& z);
double ackley(const Eigen::VectorXd& z);
double rastrigin(const Eigen::VectorXd& z);
double griewank(const Eigen::VectorXd& z);
double levy(const Eigen::VectorXd& z);
double fig1_demo(double x);
}  // namespace functions

/// Analytic objective value; pure and thread-safe. Throws ConfigError for
/// the external kind.
double evaluate(const ObjectiveSpec& spec, const Eigen::VectorXd& x);

/// A callable black box. Analytic instances are stateless; external ones
/// own a child process and must not be shared between concurrent runs.
class Objective {
public:
    virtual ~Objective() = default;
    virtual double operator()(const Eigen::VectorXd& x) = 0;
    [[nodiscard]] virtual std::size_t dim() const = 0;
};

/// Fresh objective instance for one optimizer run.
std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec);

}  // namespace hdbo

#endif  // HDBO_OBJECTIVES_HPP
