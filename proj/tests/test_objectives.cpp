#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "hdbo/doe.hpp"
#include "hdbo/error.hpp"
#include "hdbo/external_objective.hpp"
#include "hdbo/objectives.hpp"

using namespace hdbo;
using namespace std::chrono_literals;

namespace {

const ObjectiveKind kAnalytic[] = {ObjectiveKind::Sphere,    ObjectiveKind::Ellipsoid, ObjectiveKind::Rosenbrock,
                                   ObjectiveKind::Ackley,    ObjectiveKind::Rastrigin, ObjectiveKind::Griewank,
                                   ObjectiveKind::Levy};

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::string server() { return HDBO_SPHERE_SERVER; }

}  // namespace

TEST(Functions, ReferenceValues) {
    // Values of the textbook definitions at the given points.
    EXPECT_DOUBLE_EQ(functions::sphere(vec({1.0, 2.0})), 5.0);
    EXPECT_DOUBLE_EQ(functions::ellipsoid(vec({1.0, 1.0, 1.0})), 6.0);
    EXPECT_DOUBLE_EQ(functions::ellipsoid(vec({0.0, 2.0})), 8.0);
    EXPECT_NEAR(functions::rastrigin(vec({1.0, 0.0})), 1.0, 1e-12);
    EXPECT_NEAR(functions::ackley(vec({1.0, 1.0})), 3.6253849384403627, 1e-12);
    EXPECT_NEAR(functions::ackley(vec({0.5, -0.25, 2.0})), 5.982445225488778, 1e-12);
    EXPECT_NEAR(functions::griewank(vec({3.0, -4.0})), 0.06440764161308299, 1e-12);
    // Rosenbrock and Levy take z = x - 1, so their minimum sits at z = 0.
    EXPECT_NEAR(functions::rosenbrock(vec({-1.0, -1.0})), 1.0, 1e-12);
    EXPECT_NEAR(functions::rosenbrock(vec({-0.5, -2.0, 1.0})), 260.5, 1e-12);
    EXPECT_NEAR(functions::levy(vec({-1.0, -1.0})), 0.7158445541169746, 1e-12);
    EXPECT_NEAR(functions::levy(vec({-0.5, -3.0, 2.0})), 6.395352643718636, 1e-12);
    EXPECT_EQ(functions::fig1_demo(0.0), 1.0);
    EXPECT_NEAR(functions::fig1_demo(1.3), 1.4330002004460516, 1e-14);
}

TEST(Objectives, GlobalMinimaAtTheShift) {
    Rng rng(RngState{1, 0});
    for (ObjectiveKind kind : kAnalytic) {
        for (std::size_t D : {2u, 5u, 30u}) {
            ObjectiveSpec spec = ObjectiveSpec::make(kind, D);
            EXPECT_NEAR(evaluate(spec, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D))), 0.0, 1e-12) << to_string(kind);
            Eigen::VectorXd u(static_cast<Eigen::Index>(D));
            for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = 0.1 + 0.8 * rng.uniform();
            const Eigen::VectorXd s = spec.box.from_unit(u);
            spec.shift = s;
            spec.rotation = random_rotation(D, rng);
            spec.validate();
            EXPECT_NEAR(evaluate(spec, s), 0.0, 1e-12) << to_string(kind) << " D=" << D;
            EXPECT_GT(evaluate(spec, spec.box.clamp(s + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(D), 0.5))), 0.0);
        }
    }
}

TEST(Objectives, ShiftRotationInvariance) {
    Rng rng(RngState{2, 0});
    for (ObjectiveKind kind : kAnalytic) {
        const std::size_t D = 7;
        ObjectiveSpec spec = ObjectiveSpec::make(kind, D);
        const Eigen::VectorXd s = spec.box.from_unit(Eigen::VectorXd::Constant(7, 0.45));
        const Eigen::MatrixXd Q = random_rotation(D, rng);
        spec.shift = s;
        spec.rotation = Q;
        ObjectiveSpec plain = ObjectiveSpec::make(kind, D);
        plain.box = SearchBox::cube(D, -1e6, 1e6);
        for (int t = 0; t < 50; ++t) {
            const Eigen::VectorXd x = uniform_point(spec.box, rng);
            const double expected = evaluate(plain, Q * (x - s));
            EXPECT_NEAR(evaluate(spec, x), expected, 1e-12 * (1.0 + std::abs(expected))) << to_string(kind);
        }
    }
}

TEST(Objectives, DemoFunction) {
    const ObjectiveSpec spec = ObjectiveSpec::make(ObjectiveKind::Fig1Demo, 1);
    EXPECT_EQ(spec.box.lower()[0], -5.0);
    EXPECT_EQ(spec.box.upper()[0], 5.0);
    EXPECT_EQ(evaluate(spec, vec({0.0})), 1.0);
}

TEST(Objectives, DefaultBoxes) {
    EXPECT_EQ(default_box(ObjectiveKind::Sphere, 3).upper()[2], 100.0);
    EXPECT_EQ(default_box(ObjectiveKind::Ackley, 3).lower()[0], -32.768);
    EXPECT_EQ(default_box(ObjectiveKind::Rastrigin, 3).upper()[0], 5.12);
    EXPECT_EQ(default_box(ObjectiveKind::Griewank, 3).lower()[1], -600.0);
    EXPECT_EQ(default_box(ObjectiveKind::Levy, 3).upper()[0], 10.0);
    EXPECT_EQ(default_box(ObjectiveKind::Rosenbrock, 3).lower()[0], -5.0);
    EXPECT_EQ(default_box(ObjectiveKind::Rosenbrock, 3).upper()[0], 10.0);
}

TEST(Objectives, SpecValidation) {
    ObjectiveSpec spec = ObjectiveSpec::make(ObjectiveKind::Sphere, 3);
    spec.shift = vec({0.0, 0.0, 500.0});
    EXPECT_THROW(spec.validate(), ConfigError);
    spec.shift.reset();
    spec.rotation = Eigen::MatrixXd::Identity(3, 3) * 1.1;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec.rotation = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(spec.validate(), ConfigError);
    EXPECT_THROW(ObjectiveSpec::make(ObjectiveKind::Rosenbrock, 1).validate(), ConfigError);
    EXPECT_THROW(ObjectiveSpec::make(ObjectiveKind::Fig1Demo, 2).validate(), ConfigError);
    EXPECT_THROW(parse_objective_kind("schwefel"), ConfigError);
    EXPECT_EQ(parse_objective_kind("fig1-demo"), ObjectiveKind::Fig1Demo);
}

TEST(ExternalObjective, RequestFormatRoundTrips) {
    const Eigen::VectorXd x = vec({0.1, -1e-300, 123456789.125, 1.0 / 3.0});
    const std::string req = ExternalObjective::format_request(x);
    EXPECT_EQ(req.rfind("EVAL ", 0), 0u);
    std::istringstream in(req.substr(5));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        std::string tok;
        in >> tok;
        EXPECT_EQ(std::stod(tok), x[i]);
    }
}

TEST(ExternalObjective, EchoServer) {
    ExternalObjective obj("while read line; do echo 0.0; done", 3, 5000ms);
    EXPECT_EQ(obj(vec({1.0, 2.0, 3.0})), 0.0);
    EXPECT_EQ(obj(vec({4.0, 5.0, 6.0})), 0.0);
    EXPECT_EQ(obj.evaluations(), 2u);
}

TEST(ExternalObjective, SphereServerMatchesInternalSphere) {
    ExternalObjective obj(server(), 6, 5000ms);
    Rng rng(RngState{3, 0});
    const SearchBox box = SearchBox::cube(6, -100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd x = uniform_point(box, rng);
        const double expected = functions::sphere(x);
        EXPECT_NEAR(obj(x), expected, 1e-12 * (1.0 + expected));
    }
}

TEST(ExternalObjective, ChildSeesDimension) {
    // The server exits (no reply) when the request length differs from
    // BO_OBJECTIVE_DIM, so a mismatch surfaces as an evaluation error.
    ExternalObjective ok(server(), 2, 5000ms);
    EXPECT_EQ(ok(vec({3.0, 4.0})), 25.0);
    EXPECT_EQ(external_eval("echo $BO_OBJECTIVE_DIM", 5000ms, vec({1.0, 2.0, 3.0, 4.0})), 4.0);
}

TEST(ExternalObjective, CrashIsReportedWithTheRequest) {
    ExternalObjective obj(server() + " crash-after=2", 2, 5000ms);
    EXPECT_EQ(obj(vec({1.0, 0.0})), 1.0);
    EXPECT_EQ(obj(vec({2.0, 0.0})), 4.0);
    try {
        obj(vec({0.5, 0.25}));
        FAIL() << "expected an evaluation error";
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("EVAL 0.5 0.25"), std::string::npos) << e.what();
    }
    // A failed child is not reused.
    EXPECT_THROW(obj(vec({1.0, 1.0})), EvaluationError);
}

TEST(ExternalObjective, MalformedReply) {
    ExternalObjective obj(server() + " garbage", 1, 5000ms);
    EXPECT_THROW(obj(vec({1.0})), EvaluationError);
}

TEST(ExternalObjective, Timeout) {
    ExternalObjective obj("sleep 5", 1, 200ms);
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_THROW(obj(vec({1.0})), EvaluationError);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, 3s);
}

TEST(ExternalObjective, MissingCommand) {
    EXPECT_THROW(external_eval("/nonexistent/objective-server", 2000ms, vec({1.0})), EvaluationError);
}

TEST(ExternalObjective, ThroughMakeObjective) {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::External;
    spec.box = SearchBox::cube(3, -1.0, 1.0);
    spec.command = server();
    spec.timeout = 5000ms;
    auto obj = make_objective(spec);
    EXPECT_EQ(obj->dim(), 3u);
    EXPECT_DOUBLE_EQ((*obj)(vec({0.5, 0.5, 0.5})), 0.75);
    EXPECT_THROW(evaluate(spec, vec({0.0, 0.0, 0.0})), ConfigError);
}
