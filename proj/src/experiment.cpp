#include "hdbo/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "hdbo/error.hpp"
#include "hdbo/optimizers.hpp"
#include "hdbo/svg_plot.hpp"
#include "hdbo/trace_io.hpp"

namespace hdbo {

using nlohmann::json;

namespace {

constexpr std::uint64_t kObjectiveStreamBase = 0x0b1ec7000ULL;
constexpr std::uint64_t kRunStreamBase = 0x5eed0000ULL;

template <typename T>
T get_as(const json& j, const char* key) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::vector<double> scalar_or_array(const json& j, const char* key) {
    if (j.is_number()) return {get_as<double>(j, key)};
    return get_as<std::vector<double>>(j, key);
}

ObjectiveDecl objective_decl_from_json(const json& j) {
    ObjectiveDecl d;
    if (j.is_string()) {
        d.kind = j.get<std::string>();
        return d;
    }
    if (!j.is_object()) throw ConfigError("each objective must be a kind name or an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") d.kind = get_as<std::string>(value, "kind");
        else if (key == "name") d.name = get_as<std::string>(value, "name");
        else if (key == "dim") d.dim = get_as<std::size_t>(value, "dim");
        else if (key == "shift") {
            if (value.is_string()) d.shift = value.get<std::string>();
            else {
                d.shift = "vector";
                d.shift_vector = get_as<std::vector<double>>(value, "shift");
            }
        } else if (key == "rotate") d.rotate = get_as<bool>(value, "rotate");
        else if (key == "lower") d.lower = scalar_or_array(value, "lower");
        else if (key == "upper") d.upper = scalar_or_array(value, "upper");
        else if (key == "command") d.command = get_as<std::string>(value, "command");
        else if (key == "timeout_ms") d.timeout_ms = get_as<std::int64_t>(value, "timeout_ms");
        else throw ConfigError("unknown objective key '" + key + "'");
    }
    parse_objective_kind(d.kind);
    if (d.shift != "none" && d.shift != "random" && d.shift != "vector") {
        throw ConfigError("objective shift must be \"none\", \"random\" or an array");
    }
    return d;
}

json objective_decl_to_json(const ObjectiveDecl& d) {
    json j;
    j["kind"] = d.kind;
    if (!d.name.empty()) j["name"] = d.name;
    if (d.dim) j["dim"] = *d.dim;
    if (d.shift == "vector") j["shift"] = d.shift_vector;
    else j["shift"] = d.shift;
    j["rotate"] = d.rotate;
    if (!d.lower.empty()) j["lower"] = d.lower;
    if (!d.upper.empty()) j["upper"] = d.upper;
    if (!d.command.empty()) {
        j["command"] = d.command;
        j["timeout_ms"] = d.timeout_ms;
    }
    return j;
}

Eigen::VectorXd expand_bound(const std::vector<double>& v, std::size_t dim, const char* what) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), v[0]);
    if (v.size() != dim) throw ConfigError(std::string("objective ") + what + " bound has the wrong length");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string trace_relpath(const std::string& objective, Algorithm alg, std::size_t run) {
    return objective + "/" + to_string(alg) + "/run_" + std::to_string(run) + ".csv";
}

/// Traces of one objective, indexed [algorithm][run]; nullopt for failed runs.
using TraceTable = std::vector<std::vector<std::optional<RunTrace>>>;

ObjectiveReport build_report(const std::string& name, const ExperimentConfig& config, const TraceTable& table) {
    ObjectiveReport report;
    report.name = name;
    report.reference = to_string(config.reference);
    report.alpha = config.alpha;
    std::size_t ref_pos = config.algorithms.size();
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
        if (config.algorithms[a] == config.reference) ref_pos = a;
        std::vector<RunTrace> ok;
        for (const auto& t : table[a]) {
            if (t) ok.push_back(*t);
        }
        if (!ok.empty()) report.summaries.push_back(summarize(ok, to_string(config.algorithms[a])));
    }
    if (ref_pos == config.algorithms.size()) return report;
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
        if (a == ref_pos) continue;
        std::vector<double> ref_finals;
        std::vector<double> other_finals;
        for (std::size_t k = 0; k < config.runs; ++k) {
            const auto& r = table[ref_pos][k];
            const auto& o = table[a][k];
            if (r && o) {
                ref_finals.push_back(r->records.back().f_min);
                other_finals.push_back(o->records.back().f_min);
            }
        }
        if (ref_finals.empty()) continue;
        report.comparisons[to_string(config.algorithms[a])] =
            wilcoxon_signed_rank(ref_finals, other_finals, config.alpha);
    }
    return report;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (objectives.empty()) throw ConfigError("experiment needs at least one objective");
    if (algorithms.empty()) throw ConfigError("experiment needs at least one algorithm");
    std::set<Algorithm> seen(algorithms.begin(), algorithms.end());
    if (seen.size() != algorithms.size()) throw ConfigError("algorithms must not repeat");
    if (algorithms.size() > 1 && !seen.contains(reference)) {
        throw ConfigError("reference algorithm '" + to_string(reference) + "' is not in the algorithm list");
    }
    if (dim < 1) throw ConfigError("dim must be at least 1");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (n_init < 1 || n_init > n_max) throw ConfigError("need 1 <= n_init <= n_max");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(length_scale_bounds.lower > 0.0 && length_scale_bounds.lower <= length_scale_bounds.upper)) {
        throw ConfigError("length_scale_bounds must satisfy 0 < lower <= upper");
    }
}

ExperimentConfig experiment_config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig c;
    for (const auto& [key, value] : doc.items()) {
        if (key == "objectives") {
            if (!value.is_array()) throw ConfigError("'objectives' must be an array");
            c.objectives.clear();
            for (const auto& o : value) c.objectives.push_back(objective_decl_from_json(o));
        } else if (key == "algorithms") {
            c.algorithms.clear();
            for (const auto& name : get_as<std::vector<std::string>>(value, "algorithms")) {
                c.algorithms.push_back(parse_algorithm(name));
            }
        } else if (key == "dim") c.dim = get_as<std::size_t>(value, "dim");
        else if (key == "n_init") c.n_init = get_as<std::size_t>(value, "n_init");
        else if (key == "n_max") c.n_max = get_as<std::size_t>(value, "n_max");
        else if (key == "runs") c.runs = get_as<std::size_t>(value, "runs");
        else if (key == "seed") c.seed = get_as<std::uint64_t>(value, "seed");
        else if (key == "output_dir") c.output_dir = get_as<std::string>(value, "output_dir");
        else if (key == "workers") c.workers = get_as<std::size_t>(value, "workers");
        else if (key == "alpha") c.alpha = get_as<double>(value, "alpha");
        else if (key == "reference") c.reference = parse_algorithm(get_as<std::string>(value, "reference"));
        else if (key == "dropout_d") c.dropout_d = get_as<std::size_t>(value, "dropout_d");
        else if (key == "d_init") {
            if (!value.is_null()) c.d_init = get_as<std::size_t>(value, "d_init");
        } else if (key == "length_scale_bounds") {
            const auto b = get_as<std::vector<double>>(value, "length_scale_bounds");
            if (b.size() != 2) throw ConfigError("length_scale_bounds must have two entries");
            c.length_scale_bounds = {b[0], b[1]};
        } else if (key == "duplicate_tolerance") c.duplicate_tolerance = get_as<double>(value, "duplicate_tolerance");
        else if (key == "plot") c.plot = get_as<bool>(value, "plot");
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["objectives"] = json::array();
    for (const auto& o : c.objectives) j["objectives"].push_back(objective_decl_to_json(o));
    j["algorithms"] = json::array();
    for (auto a : c.algorithms) j["algorithms"].push_back(to_string(a));
    j["dim"] = c.dim;
    j["n_init"] = c.n_init;
    j["n_max"] = c.n_max;
    j["runs"] = c.runs;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir.string();
    j["workers"] = c.workers;
    j["alpha"] = c.alpha;
    j["reference"] = to_string(c.reference);
    j["dropout_d"] = c.dropout_d;
    j["d_init"] = c.d_init ? json(*c.d_init) : json(nullptr);
    j["length_scale_bounds"] = {c.length_scale_bounds.lower, c.length_scale_bounds.upper};
    j["duplicate_tolerance"] = c.duplicate_tolerance;
    j["plot"] = c.plot;
    return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return experiment_config_from_json(doc);
}

std::vector<ResolvedObjective> resolve_objectives(const ExperimentConfig& config) {
    std::vector<ResolvedObjective> out;
    std::set<std::string> names;
    for (std::size_t i = 0; i < config.objectives.size(); ++i) {
        const ObjectiveDecl& d = config.objectives[i];
        const ObjectiveKind kind = parse_objective_kind(d.kind);
        const std::size_t dim = d.dim.value_or(kind == ObjectiveKind::Fig1Demo ? 1 : config.dim);
        ObjectiveSpec spec = ObjectiveSpec::make(kind, dim);
        if (!d.lower.empty() || !d.upper.empty()) {
            const SearchBox def = default_box(kind, dim);
            spec.box = SearchBox(d.lower.empty() ? def.lower() : expand_bound(d.lower, dim, "lower"),
                                 d.upper.empty() ? def.upper() : expand_bound(d.upper, dim, "upper"));
        }
        Rng rng(RngState{config.seed, 0}.derive(kObjectiveStreamBase + i));
        if (d.shift == "random") {
            Eigen::VectorXd u(static_cast<Eigen::Index>(dim));
            for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = 0.1 + 0.8 * rng.uniform();
            spec.shift = spec.box.from_unit(u);
        } else if (d.shift == "vector") {
            spec.shift = Eigen::Map<const Eigen::VectorXd>(d.shift_vector.data(),
                                                           static_cast<Eigen::Index>(d.shift_vector.size()));
        }
        if (d.rotate) spec.rotation = random_rotation(dim, rng);
        spec.command = d.command;
        spec.timeout = std::chrono::milliseconds(d.timeout_ms);
        spec.validate();

        std::string name = d.name.empty() ? d.kind + "_" + std::to_string(dim) + "d" : d.name;
        if (names.contains(name)) name += "_" + std::to_string(i);
        names.insert(name);
        out.push_back({name, std::move(spec)});
    }
    return out;
}

RngState run_seed(std::uint64_t master_seed, std::size_t run_index) {
    return RngState{master_seed, 0}.derive(kRunStreamBase + run_index);
}

json summary_json(const ObjectiveReport& report) {
    json j;
    j["objective"] = report.name;
    j["reference"] = report.reference;
    j["alpha"] = report.alpha;
    j["algorithms"] = json::array();
    for (const auto& s : report.summaries) {
        j["algorithms"].push_back({{"algorithm", s.label},
                                   {"runs", s.runs},
                                   {"mean", s.mean},
                                   {"median", s.median},
                                   {"std", s.stddev},
                                   {"finals", s.finals},
                                   {"mean_curve", s.mean_curve}});
    }
    j["comparisons"] = json::array();
    json row = json::object();
    for (const auto& s : report.summaries) {
        const auto it = report.comparisons.find(s.label);
        if (it == report.comparisons.end()) continue;
        const ComparisonVerdict& v = it->second;
        j["comparisons"].push_back({{"algorithm", s.label},
                                    {"p_value", v.p_value},
                                    {"verdict", to_string(v.verdict)},
                                    {"symbol", verdict_symbol(v.verdict)},
                                    {"median_reference", v.median_a},
                                    {"median_other", v.median_b},
                                    {"n_effective", v.n_effective},
                                    {"w_plus", v.w_plus},
                                    {"exact", v.exact},
                                    {"degenerate", v.degenerate}});
        row[s.label] = verdict_symbol(v.verdict);
    }
    j["verdict_row"] = row;
    return j;
}

std::string verdict_table(const std::vector<ObjectiveReport>& reports) {
    if (reports.empty()) return {};
    const std::string reference = reports.front().reference;
    std::vector<std::string> columns;
    for (const auto& r : reports) {
        for (const auto& s : r.summaries) {
            if (s.label != reference && std::find(columns.begin(), columns.end(), s.label) == columns.end()) {
                columns.push_back(s.label);
            }
        }
    }
    std::map<std::string, std::array<int, 3>> counts;
    auto cell = [](double mean) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2E", mean);
        return std::string(buf);
    };
    std::string out = "| f |";
    for (const auto& c : columns) out += " " + c + " |";
    out += " " + reference + " |\n|---|";
    for (std::size_t i = 0; i <= columns.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& r : reports) {
        out += "| " + r.name + " |";
        for (const auto& c : columns) {
            const auto s = std::find_if(r.summaries.begin(), r.summaries.end(), [&](const RunSummary& x) { return x.label == c; });
            if (s == r.summaries.end()) {
                out += " n/a |";
                continue;
            }
            out += " " + cell(s->mean);
            const auto v = r.comparisons.find(c);
            if (v != r.comparisons.end()) {
                out += " " + verdict_symbol(v->second.verdict);
                counts[c][static_cast<std::size_t>(v->second.verdict == Verdict::Plus ? 0 : v->second.verdict == Verdict::Approx ? 1 : 2)]++;
            }
            out += " |";
        }
        const auto ref = std::find_if(r.summaries.begin(), r.summaries.end(), [&](const RunSummary& x) { return x.label == reference; });
        out += " " + (ref == r.summaries.end() ? std::string("n/a") : cell(ref->mean)) + " |\n";
    }
    out += "| +/≈/- |";
    for (const auto& c : columns) {
        const auto& n = counts[c];
        out += " " + std::to_string(n[0]) + "/" + std::to_string(n[1]) + "/" + std::to_string(n[2]) + " |";
    }
    out += " N.A. |\n";
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    config.validate();
    const std::vector<ResolvedObjective> objectives = resolve_objectives(config);
    const std::filesystem::path& out_dir = config.output_dir;
    std::filesystem::create_directories(out_dir);

    struct Job {
        std::size_t objective;
        std::size_t algorithm;
        std::size_t run;
    };
    std::vector<Job> jobs;
    for (std::size_t o = 0; o < objectives.size(); ++o) {
        for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
            for (std::size_t k = 0; k < config.runs; ++k) jobs.push_back({o, a, k});
        }
    }
    std::vector<RunTrace> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            const Job& job = jobs[i];
            const ResolvedObjective& obj = objectives[job.objective];
            OptimizerConfig oc;
            oc.algorithm = config.algorithms[job.algorithm];
            oc.n_init = config.n_init;
            oc.n_max = config.n_max;
            oc.box = obj.spec.box;
            oc.d_init = config.d_init;
            oc.dropout_d = std::min(config.dropout_d, obj.spec.dim());
            oc.length_scale_bounds = config.length_scale_bounds;
            oc.duplicate_tolerance = config.duplicate_tolerance;
            const RngState seed = run_seed(config.seed, job.run);
            RunTrace trace;
            try {
                auto objective = make_objective(obj.spec);
                trace = run_optimizer([&objective](const Eigen::VectorXd& x) { return (*objective)(x); }, oc, seed);
            } catch (const std::exception& e) {
                trace.algorithm = oc.algorithm;
                trace.seed = seed;
                trace.error = e.what();
            }
            write_file_atomic(out_dir / trace_relpath(obj.name, oc.algorithm, job.run), trace_to_csv(trace));
            if (log != nullptr) {
                std::lock_guard lock(log_mutex);
                *log << obj.name << " " << to_string(oc.algorithm) << " run " << job.run << ": ";
                if (trace.ok()) *log << "f_min = " << format_double(trace.f_min) << "\n";
                else *log << "FAILED: " << *trace.error << "\n";
            }
            results[i] = std::move(trace);
        }
    };
    std::size_t workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
    workers = std::min(workers, jobs.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    ExperimentResult result;
    json manifest;
    manifest["format"] = "hdbo-results/1";
    manifest["config"] = to_json(config);
    manifest["trace_columns"] = std::string(kTraceHeader);
    manifest["objectives"] = json::array();
    for (const auto& o : objectives) {
        json entry{{"name", o.name},
                   {"kind", to_string(o.spec.kind)},
                   {"dim", o.spec.dim()},
                   {"lower", std::vector<double>(o.spec.box.lower().begin(), o.spec.box.lower().end())},
                   {"upper", std::vector<double>(o.spec.box.upper().begin(), o.spec.box.upper().end())},
                   {"rotated", o.spec.rotation.has_value()}};
        entry["shift"] = o.spec.shift ? json(std::vector<double>(o.spec.shift->begin(), o.spec.shift->end())) : json(nullptr);
        if (o.spec.kind == ObjectiveKind::External) entry["command"] = o.spec.command;
        manifest["objectives"].push_back(entry);
    }
    manifest["files"] = json::array();
    manifest["runs"] = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& job = jobs[i];
        const RunTrace& t = results[i];
        const Algorithm alg = config.algorithms[job.algorithm];
        const std::string path = trace_relpath(objectives[job.objective].name, alg, job.run);
        json run{{"objective", objectives[job.objective].name},
                 {"algorithm", to_string(alg)},
                 {"run", job.run},
                 {"seed", {{"seed", t.seed.seed}, {"stream", t.seed.stream}}},
                 {"trace", path},
                 {"status", t.ok() ? "ok" : "failed"},
                 {"evaluations", t.records.size()}};
        if (!t.records.empty()) run["final_f_min"] = t.records.back().f_min;
        if (t.error) {
            run["error"] = *t.error;
            ++result.failed_runs;
        }
        manifest["runs"].push_back(run);
        manifest["files"].push_back({{"path", path}, {"type", "trace"}, {"seed", run["seed"]}});
    }

    for (std::size_t o = 0; o < objectives.size(); ++o) {
        TraceTable table(config.algorithms.size(), std::vector<std::optional<RunTrace>>(config.runs));
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].objective == o && results[i].ok()) table[jobs[i].algorithm][jobs[i].run] = results[i];
        }
        ObjectiveReport report = build_report(objectives[o].name, config, table);
        const std::string summary_path = objectives[o].name + "/summary.json";
        write_file_atomic(out_dir / summary_path, summary_json(report).dump(2) + "\n");
        manifest["files"].push_back({{"path", summary_path}, {"type", "summary"}, {"seed", {{"seed", config.seed}}}});
        if (config.plot && !report.summaries.empty()) {
            const std::string plot_path = objectives[o].name + "/convergence.svg";
            emit_convergence_plot(report.summaries, out_dir / plot_path, objectives[o].name);
            manifest["files"].push_back({{"path", plot_path}, {"type", "plot"}, {"seed", {{"seed", config.seed}}}});
        }
        result.reports.push_back(std::move(report));
    }
    manifest["failed_runs"] = result.failed_runs;
    result.manifest = out_dir / "manifest.json";
    write_file_atomic(result.manifest, manifest.dump(2) + "\n");
    return result;
}

std::vector<ObjectiveReport> compare_results(const std::filesystem::path& results_dir) {
    const std::filesystem::path manifest_path = results_dir / "manifest.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse " + manifest_path.string() + ": " + e.what());
    }
    const ExperimentConfig config = experiment_config_from_json(manifest.at("config"));
    std::vector<std::string> names;
    for (const auto& o : manifest.at("objectives")) names.push_back(o.at("name").get<std::string>());

    std::vector<ObjectiveReport> reports;
    for (const auto& name : names) {
        TraceTable table(config.algorithms.size(), std::vector<std::optional<RunTrace>>(config.runs));
        for (const auto& run : manifest.at("runs")) {
            if (run.at("objective") != name || run.at("status") != "ok") continue;
            const Algorithm alg = parse_algorithm(run.at("algorithm").get<std::string>());
            const auto pos = std::find(config.algorithms.begin(), config.algorithms.end(), alg);
            const auto k = run.at("run").get<std::size_t>();
            if (pos == config.algorithms.end() || k >= config.runs) throw ContractError("manifest run entry does not match its config");
            RunTrace t = trace_from_csv(read_file(results_dir / run.at("trace").get<std::string>()));
            t.algorithm = alg;
            t.seed = RngState{run.at("seed").at("seed").get<std::uint64_t>(), run.at("seed").at("stream").get<std::uint64_t>()};
            table[static_cast<std::size_t>(pos - config.algorithms.begin())][k] = std::move(t);
        }
        reports.push_back(build_report(name, config, table));
    }
    return reports;
}

}  // namespace hdbo
