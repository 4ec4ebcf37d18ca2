#include "hdbo/objectives.hpp"

#include <cmath>
#include <numbers>

#include "hdbo/error.hpp"
#include "hdbo/external_objective.hpp"

namespace hdbo {

namespace {

constexpr double kPi = std::numbers::pi;

struct KindName {
    ObjectiveKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {ObjectiveKind::Sphere, "sphere"},       {ObjectiveKind::Ellipsoid, "ellipsoid"},
    {ObjectiveKind::Rosenbrock, "rosenbrock"}, {ObjectiveKind::Ackley, "ackley"},
    {ObjectiveKind::Rastrigin, "rastrigin"}, {ObjectiveKind::Griewank, "griewank"},
    {ObjectiveKind::Levy, "levy"},           {ObjectiveKind::Fig1Demo, "fig1-demo"},
    {ObjectiveKind::External, "external"},
};

}  // namespace

std::string to_string(ObjectiveKind kind) {
    for (const auto& k : kKindNames) {
        if (k.kind == kind) return k.name;
    }
    return "unknown";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
    for (const auto& k : kKindNames) {
        if (name == k.name) return k.kind;
    }
    throw ConfigError("unknown objective kind '" + std::string(name) + "'");
}

SearchBox default_box(ObjectiveKind kind, std::size_t dim) {
    switch (kind) {
        case ObjectiveKind::Sphere:
        case ObjectiveKind::Ellipsoid:
        case ObjectiveKind::External: return SearchBox::cube(dim, -100.0, 100.0);
        case ObjectiveKind::Rosenbrock: return SearchBox::cube(dim, -5.0, 10.0);
        case ObjectiveKind::Ackley: return SearchBox::cube(dim, -32.768, 32.768);
        case ObjectiveKind::Rastrigin: return SearchBox::cube(dim, -5.12, 5.12);
        case ObjectiveKind::Griewank: return SearchBox::cube(dim, -600.0, 600.0);
        case ObjectiveKind::Levy: return SearchBox::cube(dim, -10.0, 10.0);
        case ObjectiveKind::Fig1Demo: return SearchBox::cube(dim, -5.0, 5.0);
    }
    throw ConfigError("unknown objective kind");
}

ObjectiveSpec ObjectiveSpec::make(ObjectiveKind kind, std::size_t dim) {
    ObjectiveSpec spec;
    spec.kind = kind;
    spec.box = default_box(kind, dim);
    return spec;
}

void ObjectiveSpec::validate() const {
    const auto n = static_cast<Eigen::Index>(dim());
    if (kind == ObjectiveKind::Fig1Demo && dim() != 1) throw ConfigError("fig1-demo is one-dimensional");
    if (kind == ObjectiveKind::Rosenbrock && dim() < 2) throw ConfigError("rosenbrock needs at least two dimensions");
    if (kind == ObjectiveKind::External && command.empty()) throw ConfigError("external objective needs a command");
    if (shift) {
        if (shift->size() != n) throw ConfigError("shift vector has the wrong dimension");
        if (!box.contains(*shift)) throw ConfigError("shift vector lies outside the search box");
    }
    if (rotation) {
        if (rotation->rows() != n || rotation->cols() != n) throw ConfigError("rotation matrix has the wrong shape");
        const double err = (rotation->transpose() * *rotation - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        if (err > 1e-10) throw ConfigError("rotation matrix is not orthogonal");
    }
}

namespace functions {

double sphere(const Eigen::VectorXd& z) {
    return z.squaredNorm();
}

double ellipsoid(const Eigen::VectorXd& z) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += static_cast<double>(i + 1) * z[i] * z[i];
    return s;
}

// Classic Rosenbrock evaluated at z + 1.
double rosenbrock(const Eigen::VectorXd& z) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i] + 1.0;
        const double b = z[i + 1] + 1.0;
        s += 100.0 * (b - a * a) * (b - a * a) + z[i] * z[i];
    }
    return s;
}

double ackley(const Eigen::VectorXd& z) {
    const double n = static_cast<double>(z.size());
    const double sq = z.squaredNorm() / n;
    const double cs = (2.0 * kPi * z.array()).cos().sum() / n;
    const double v = -20.0 * std::exp(-0.2 * std::sqrt(sq)) - std::exp(cs) + 20.0 + std::numbers::e;
    return std::max(0.0, v);
}

double rastrigin(const Eigen::VectorXd& z) {
    return (z.array().square() - 10.0 * (2.0 * kPi * z.array()).cos() + 10.0).sum();
}

double griewank(const Eigen::VectorXd& z) {
    double prod = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
    return z.squaredNorm() / 4000.0 - prod + 1.0;
}

// Levy evaluated at z + 1, so w = 1 + z / 4.
double levy(const Eigen::VectorXd& z) {
    const Eigen::Index n = z.size();
    auto w = [&](Eigen::Index i) { return 1.0 + z[i] / 4.0; };
    const double s0 = std::sin(kPi * w(0));
    double s = s0 * s0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double wi = w(i);
        const double t = std::sin(kPi * wi + 1.0);
        s += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * t * t);
    }
    const double wn = w(n - 1);
    const double t = std::sin(2.0 * kPi * wn);
    s += (wn - 1.0) * (wn - 1.0) * (1.0 + t * t);
    return s;
}

double fig1_demo(double x) {
    return std::cos(x) + std::sin(2.0 * x) + 0.5 * x;
}

}  // namespace functions

double evaluate(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != spec.dim()) throw ContractError("point has the wrong dimension");
    Eigen::VectorXd z = spec.shift ? Eigen::VectorXd(x - *spec.shift) : x;
    if (spec.rotation) z = *spec.rotation * z;
    switch (spec.kind) {
        case ObjectiveKind::Sphere: return functions::sphere(z);
        case ObjectiveKind::Ellipsoid: return functions::ellipsoid(z);
        case ObjectiveKind::Rosenbrock: return functions::rosenbrock(z);
        case ObjectiveKind::Ackley: return functions::ackley(z);
        case ObjectiveKind::Rastrigin: return functions::rastrigin(z);
        case ObjectiveKind::Griewank: return functions::griewank(z);
        case ObjectiveKind::Levy: return functions::levy(z);
        case ObjectiveKind::Fig1Demo: return functions::fig1_demo(z[0]);
        case ObjectiveKind::External: break;
    }
    throw ConfigError("evaluate() cannot run an external objective; use make_objective");
}

namespace {

class AnalyticObjective final : public Objective {
public:
    explicit AnalyticObjective(ObjectiveSpec spec) : spec_(std::move(spec)) {}
    double operator()(const Eigen::VectorXd& x) override { return evaluate(spec_, x); }
    [[nodiscard]] std::size_t dim() const override { return spec_.dim(); }

private:
    ObjectiveSpec spec_;
};

}  // namespace

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec) {
    spec.validate();
    if (spec.kind == ObjectiveKind::External) {
        return std::make_unique<ExternalObjective>(spec.command, spec.dim(), spec.timeout);
    }
    return std::make_unique<AnalyticObjective>(spec);
}

}  // namespace hdbo
