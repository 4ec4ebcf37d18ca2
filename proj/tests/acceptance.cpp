// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hdbo/acquisition.hpp"
#include "hdbo/demo.hpp"
#include "hdbo/experiment.hpp"
#include "hdbo/ga.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/optimizers.hpp"
#include "hdbo/stats.hpp"
#include "hdbo/trace_io.hpp"
#include "hdbo/validation.hpp"

using namespace hdbo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

std::string fmt(const char* pattern, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hdbo_acceptance_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void criterion_gp_oracle(Outcome& o) {
    const auto t0 = Clock::now();
    Rng rng(RngState{1001, 0});
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t D = 1 + rng.below(10);
        const std::size_t n = 5 + rng.below(36);
        const SearchBox box = SearchBox::cube(D, -5.0, 5.0);
        const Eigen::MatrixXd X = lhs_sample(n, box, rng);
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X.row(i).array().cos().sum() + 0.05 * X.row(i).squaredNorm();
        const double spacing = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(D));
        const double l = rng.uniform(0.3, 1.0) * spacing * std::sqrt(static_cast<double>(D));
        const GpModel model = GpModel::fit_fixed(Archive(X, y), box, l);
        const oracle::NaiveKriging ref(model.scaled_inputs(), y, l, model.jitter());
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
        worst = std::max({worst, rel(model.mu_hat(), ref.mu_hat()), rel(model.sigma2_hat(), ref.sigma2_hat()),
                          rel(model.nll(), ref.nll())});
        for (int q = 0; q < 20; ++q) {
            const Eigen::VectorXd x = uniform_point(box, rng);
            const Prediction p = model.predict_formula(x);
            const auto [m, v] = ref.predict(box.to_unit(x));
            worst = std::max({worst, rel(p.mean, m), rel(p.variance, v)});
        }
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 1e-8, "relative deviation");
    o.require(secs < 10.0, "runtime");
    o.detail << "50 instances, worst relative deviation " << fmt("%.2e", worst) << ", " << fmt("%.2f s", secs);
}

void criterion_interpolation(Outcome& o) {
    const SearchBox box = SearchBox::cube(5, -100.0, 100.0);
    Rng rng(RngState{1002, 0});
    const Eigen::MatrixXd X = lhs_sample(20, box, rng);
    const Eigen::VectorXd y = X.rowwise().squaredNorm();
    const GpModel model = GpModel::fit(Archive(X, y), box);
    double worst_mean = 0.0;
    double worst_var = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        // Both the public predict and the raw formula are held to the bound.
        for (const Prediction& p : {model.predict(X.row(i).transpose()), model.predict_formula(X.row(i).transpose())}) {
            worst_mean = std::max(worst_mean, std::abs(p.mean - y[i]) / (1.0 + std::abs(y[i])));
            worst_var = std::max(worst_var, p.variance / model.sigma2_hat());
        }
    }
    o.require(model.jitter() <= 1e-10, "jitter above 1e-10");
    o.require(worst_mean <= 1e-6, "mean");
    o.require(worst_var <= 1e-6, "variance");
    o.detail << "max |y_hat - y|/(1+|y|) " << fmt("%.2e", worst_mean) << ", max s2/sigma2 " << fmt("%.2e", worst_var);
}

void criterion_ei(Outcome& o) {
    Rng rng(RngState{1003, 0});
    int outside = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double mean = rng.uniform(-3.0, 3.0);
        const double sd = rng.uniform(0.05, 3.0);
        const double f_min = mean + sd * rng.uniform(-3.0, 3.0);
        const double closed = expected_improvement(mean, sd, f_min);
        const auto mc = oracle::mc_expected_improvement(mean, sd, f_min, 10'000'000, rng);
        const double z = std::abs(closed - mc.mean) / mc.std_error;
        worst = std::max(worst, z);
        outside += z > 3.0;
    }
    const double centre = expected_improvement(0.0, 1.0, 0.0);
    o.require(outside == 0, "MC agreement");
    o.require(std::abs(centre - 0.3989423) <= 1e-6, "EI(mean=f_min, sd=1)");
    o.require(expected_improvement(2.0, 0.0, 5.0) == 0.0 && expected_improvement(-1.0, 0.0, 5.0) == 0.0, "sd = 0");
    o.detail << "100 triples x 1e7 samples, " << outside << " beyond 3 SE (worst " << fmt("%.2f SE", worst)
             << "), EI(0,1,0) = " << fmt("%.9f", centre);
}

void criterion_dimension_rule(Outcome& o) {
    o.require(update_dimension(5, 90.3, 63.9) == 4, "(5, 90.3, 63.9)");
    o.require(update_dimension(4, 49.8, 63.9) == 4, "(4, 49.8, 63.9)");
    const Eigen::MatrixXd X = (Eigen::MatrixXd(3, 1) << 0.0, 1.0, 2.0).finished();
    const auto [x_star, f_star] = update_incumbent(Archive(X, Eigen::Vector3d(63.9, 90.3, 49.8)));
    o.require(f_star == 49.8 && x_star[0] == 2.0, "incumbent update");

    const std::size_t D = 10;
    OptimizerConfig c;
    c.algorithm = Algorithm::AdaDropout;
    c.box = SearchBox::cube(D, -1.0, 1.0);
    c.n_init = 12;
    c.n_max = 30;
    std::size_t calls = 0;
    const ObjectiveFn never_improving = [&](const Eigen::VectorXd& x) {
        return calls++ < c.n_init ? x.squaredNorm() : 1e9;
    };
    const RunTrace t = run_adadropout(never_improving, c, RngState{1004, 0});
    const auto it = t.iterations();
    std::size_t first_one = 0;
    for (std::size_t k = 0; k < it.size(); ++k) {
        if (it[k].d == 1) {
            first_one = k + 1;
            break;
        }
    }
    // d = 1 first drives iteration 10, i.e. after nine iterations.
    o.require(t.ok() && first_one == 10, "never-improving run");
    for (std::size_t k = first_one; k < it.size(); ++k) o.require(it[k].d == 1, "floor at one");
    o.detail << "example rows give 4 and 4; never-improving D=10 run first uses d=1 at iteration " << first_one;
}

void criterion_budget(Outcome& o) {
    auto eq = [](GaBudget b, std::size_t p, std::size_t g) { return b.population == p && b.generations == g; };
    o.require(eq(ga_budget(Algorithm::StandardBo, 100), 200, 100), "standard BO");
    o.require(eq(ga_budget(Algorithm::AdaDropout, 1), 10, 20), "AdaDropout d=1");
    o.require(eq(ga_budget(Algorithm::AdaDropout, 100), 400, 50), "AdaDropout d=100");
    o.require(eq(ga_budget(Algorithm::CoordinateLine, 1), 10, 20), "CoordinateLineBO");
    o.detail << "(200,100) (10,20) (400,50) (10,20)";
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        // std::stod rejects subnormals such as tail EI values; from_chars does not.
        while (std::getline(cells, cell, ',')) {
            double v = NAN;
            std::from_chars(cell.data(), cell.data() + cell.size(), v);
            row.push_back(v);
        }
        rows.push_back(row);
    }
    return rows;
}

void criterion_demo(Outcome& o, const std::string& cli) {
    const fs::path dir = scratch("demo");
    const int rc = std::system((cli + " demo --output_dir " + dir.string() + " >/dev/null").c_str());
    o.require(rc == 0, "demo exit status");
    o.require(fs::exists(dir / "demo_gp.svg") && fs::exists(dir / "demo_ei.svg"), "plots written");
    if (!fs::exists(dir / "demo_curves.csv")) {
        o.require(false, "curve file");
        return;
    }
    const DemoResult demo = run_demo();
    const auto rows = read_csv_rows(dir / "demo_curves.csv");  // x, truth, mean, sd, ei
    double worst_mean = 0.0;
    double worst_var = 0.0;
    double max_ei_at_samples = 0.0;
    std::vector<std::size_t> sample_rows;
    for (std::size_t s = 0; s < demo.sample_x.size(); ++s) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r][0] != demo.sample_x[s]) continue;
            sample_rows.push_back(r);
            worst_mean = std::max(worst_mean, std::abs(rows[r][2] - demo.sample_y[s]) / (1.0 + std::abs(demo.sample_y[s])));
            worst_var = std::max(worst_var, rows[r][3] * rows[r][3] / demo.sigma2_hat);
            max_ei_at_samples = std::max(max_ei_at_samples, rows[r][4]);
        }
    }
    int positive_gaps = 0;
    for (std::size_t s = 0; s + 1 < sample_rows.size(); ++s) {
        bool positive = false;
        for (std::size_t r = sample_rows[s] + 1; r < sample_rows[s + 1]; ++r) positive = positive || rows[r][4] > 0.0;
        positive_gaps += positive;
    }
    o.require(sample_rows.size() == demo.sample_x.size(), "samples on the grid");
    o.require(worst_mean <= 1e-6 && worst_var <= 1e-6, "interpolation");
    o.require(max_ei_at_samples == 0.0, "EI zero at samples");
    o.require(positive_gaps >= 2, "EI positive between samples");
    o.detail << demo.sample_x.size() << " samples, mean error " << fmt("%.2e", worst_mean) << ", EI at samples "
             << fmt("%g", max_ei_at_samples) << ", positive in " << positive_gaps << "/" << sample_rows.size() - 1
             << " gaps";
}

void criterion_desk_scale(Outcome& o, const fs::path& config_path) {
    ExperimentConfig config = load_experiment_config(config_path);
    config.output_dir = scratch("desk");
    const auto t0 = Clock::now();
    const ExperimentResult result = run_experiment(config);
    const double secs = seconds_since(t0);
    o.require(result.failed_runs == 0, "failed runs");

    const std::string ada = to_string(Algorithm::AdaDropout);
    const std::string bo = to_string(Algorithm::StandardBo);
    int better = 0;
    for (const auto& report : result.reports) {
        double m_ada = NAN;
        double m_bo = NAN;
        for (const auto& s : report.summaries) {
            if (s.label == ada) m_ada = s.median;
            if (s.label == bo) m_bo = s.median;
        }
        better += m_ada <= m_bo;
        o.detail << report.name << " median " << fmt("%.3g", m_ada) << " vs " << fmt("%.3g", m_bo) << "; ";
        for (std::size_t k = 0; k < config.runs; ++k) {
            const auto trace = trace_from_csv(read_file(config.output_dir / report.name / ada / ("run_" + std::to_string(k) + ".csv")));
            for (std::size_t i = 1; i < trace.records.size(); ++i) {
                const auto& prev = trace.records[i - 1];
                const auto& cur = trace.records[i];
                o.require(cur.f_min <= prev.f_min, "f_min monotone");
                if (!prev.design && !cur.design) o.require(cur.d <= prev.d, "d monotone");
            }
        }
    }
    o.require(better >= 1, "AdaDropout median not better on any problem");
    o.require(secs < 600.0, "runtime");
    o.detail << "traces monotone, " << fmt("%.0f s", secs) << " on " << std::max(1u, std::thread::hardware_concurrency())
             << " core(s)";
    fs::remove_all(config.output_dir);
}

void criterion_wilcoxon(Outcome& o, const fs::path& scratch_dir) {
    Rng rng(RngState{1008, 0});
    int mismatches = 0;
    int cases = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int t = 0; t < 40; ++t) {
            std::vector<double> a(n);
            std::vector<double> b(n);
            for (std::size_t i = 0; i < n; ++i) {
                // Rounded values produce zero differences and tied ranks.
                a[i] = std::round(rng.uniform(0.0, 6.0));
                b[i] = std::round(rng.uniform(0.0, 6.0));
            }
            const ComparisonVerdict v = wilcoxon_signed_rank(a, b);
            if (v.degenerate || !v.exact) continue;
            ++cases;
            mismatches += v.p_value != oracle::brute_force_wilcoxon_p(a, b);
        }
    }
    const std::vector<double> better{1, 2, 3, 4, 5, 6};
    const std::vector<double> worse{2, 3, 4, 5, 6, 7};
    const ComparisonVerdict six = wilcoxon_signed_rank(better, worse);
    o.require(cases > 100 && mismatches == 0, "exact vs brute force");
    o.require(six.p_value == 0.03125, "n = 6 dominated");

    // Format check on a two-objective, two-algorithm experiment.
    ExperimentConfig c;
    ObjectiveDecl sphere;
    sphere.kind = "sphere";
    ObjectiveDecl ellipsoid;
    ellipsoid.kind = "ellipsoid";
    c.objectives = {sphere, ellipsoid};
    c.algorithms = {Algorithm::AdaDropout, Algorithm::StandardBo};
    c.dim = 3;
    c.n_init = 5;
    c.n_max = 8;
    c.runs = 6;
    c.plot = false;
    c.output_dir = scratch_dir;
    const std::string table = verdict_table(run_experiment(c).reports);
    std::size_t marks = 0;
    for (const char* m : {" + |", " ≈ |", " - |"}) {
        for (auto p = table.find(m); p != std::string::npos; p = table.find(m, p + 1)) ++marks;
    }
    o.require(marks == 2, "one mark per objective");
    o.require(table.find("| +/≈/- |") != std::string::npos && table.find("N.A.") != std::string::npos, "count row");
    o.detail << cases << " exact cases match brute force, n=6 p = " << fmt("%g", six.p_value)
             << ", table has +/≈/- row";
}

std::string f_min_columns(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.path().extension() == ".csv") files.push_back(fs::relative(e.path(), dir));
    }
    std::sort(files.begin(), files.end());
    std::string out;
    for (const auto& f : files) {
        out += f.string() + "\n";
        std::istringstream in(read_file(dir / f));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto a = line.find(',');
            out += line.substr(a + 1, line.find(',', a + 1) - a - 1) + "\n";
        }
    }
    return out;
}

void criterion_reproducibility(Outcome& o, const std::string& cli) {
    const fs::path dir = scratch("repro");
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"objectives": [{"kind": "ackley", "shift": "random", "rotate": true}, {"kind": "rosenbrock"}],
                  "algorithms": ["adadropout", "standard-bo", "dropout", "coordinate-line"],
                  "dim": 6, "n_init": 8, "n_max": 16, "runs": 3, "seed": 31, "plot": false})";
    }
    std::string columns[2];
    for (int r = 0; r < 2; ++r) {
        const fs::path out = dir / ("out" + std::to_string(r));
        const std::string cmd = cli + " run " + (dir / "cfg.json").string() + " --output_dir " + out.string() +
                                " --workers " + (r == 0 ? "1" : "3") + " >/dev/null 2>&1";
        o.require(std::system(cmd.c_str()) == 0, "run exit status");
        columns[r] = f_min_columns(out);
    }
    o.require(!columns[0].empty() && columns[0] == columns[1], "f_min columns differ");
    o.detail << "24 trace files per execution, f_min columns byte-identical across 1 and 3 workers";
    fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: hdbo_acceptance <hdbo cli> <desk-scale config>\n";
        return 1;
    }
    const std::string cli = argv[1];
    const fs::path desk_config = argv[2];
    const fs::path wilcoxon_dir = scratch("wilcoxon");

    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"GP oracle equivalence", criterion_gp_oracle},
        {"GP interpolation", criterion_interpolation},
        {"EI correctness", criterion_ei},
        {"adaptive rule fidelity", criterion_dimension_rule},
        {"GA budget table", criterion_budget},
        {"1-D demo reproduction", [&](Outcome& o) { criterion_demo(o, cli); }},
        {"desk-scale comparison", [&](Outcome& o) { criterion_desk_scale(o, desk_config); }},
        {"Wilcoxon validity", [&](Outcome& o) { criterion_wilcoxon(o, wilcoxon_dir); }},
        {"reproducibility", [&](Outcome& o) { criterion_reproducibility(o, cli); }},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << "exception: " << e.what();
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail.str() << std::endl;
        all = all && o.passed;
    }
    fs::remove_all(wilcoxon_dir);
    return all ? 0 : 1;
}
