#include "projsplit/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace projsplit {

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

ScheduleMode parse_policy(const std::string& s) {
    if (s == "rr" || s == "roundrobin") return ScheduleMode::RoundRobin;
    if (s == "random") return ScheduleMode::Random;
    if (s == "greedy") return ScheduleMode::Greedy;
    throw ConfigError("unknown policy '" + s + "' (expected rr, random or greedy)");
}

double best_objective(const RunRecord& rec) {
    double best = std::numeric_limits<double>::infinity();
    for (const IterationRow& row : rec.iterations) {
        if (std::isfinite(row.objective)) best = std::min(best, row.objective);
    }
    return best;
}

const IterationRow* last_metric_row(const RunRecord& rec) {
    for (auto it = rec.iterations.rbegin(); it != rec.iterations.rend(); ++it) {
        if (std::isfinite(it->objective)) return &*it;
    }
    return nullptr;
}

}  // namespace

ExperimentSpec parse_spec_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("parse_spec_json: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("parse_spec_json: " + std::string(e.what()));
    }

    ExperimentSpec spec;
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        const std::string format = d.value("format", "synthetic");
        if (format == "csv") {
            spec.dataset.format = DataFormat::DenseCsv;
        } else if (format == "mm" || format == "matrixmarket") {
            spec.dataset.format = DataFormat::MatrixMarket;
        } else if (format == "synthetic") {
            spec.dataset.format = DataFormat::Synthetic;
        } else {
            throw ConfigError("parse_spec_json: unknown dataset format '" + format + "'");
        }
        spec.dataset.path = d.value("path", "");
        spec.dataset.synth_m = d.value("m", spec.dataset.synth_m);
        spec.dataset.synth_d = d.value("d", spec.dataset.synth_d);
        spec.dataset.synth_seed = d.value("seed", spec.dataset.synth_seed);
        spec.dataset.normalize = d.value("normalize", false);
        spec.dataset.b_column = d.value("b_column", -1);
        spec.dataset.b_path = d.value("b_path", "");
    }
    if (j.contains("lambda")) {
        if (j["lambda"].is_string() && j["lambda"] == "auto-10pct") {
            spec.lambda_auto = true;
        } else {
            spec.lambda = j["lambda"].get<double>();
        }
    }
    spec.budget_iterations = j.value("budget_iterations", spec.budget_iterations);
    spec.budget_q_equivalents = j.value("budget_q_equivalents", spec.budget_q_equivalents);
    spec.target_subgrad_residual = j.value("target_subgrad_residual", 0.0);
    spec.metrics_stride = j.value("metrics_stride", spec.metrics_stride);
    spec.fstar_iterations = j.value("fstar_iterations", spec.fstar_iterations);
    spec.seed = j.value("seed", spec.seed);
    spec.out_dir = j.value("out_dir", spec.out_dir);

    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty()) {
        throw ConfigError("parse_spec_json: need a nonempty 'algorithms' array");
    }
    for (const auto& a : j["algorithms"]) {
        AlgorithmSpec algo;
        algo.kind = a.value("kind", "psfor");
        algo.blocks = a.value("blocks", algo.blocks);
        algo.policy = a.value("policy", algo.policy);
        algo.delay = a.value("delay", 0);
        algo.per_iter = a.value("per_iter", 1);
        algo.gamma = a.value("gamma", 1.0);
        algo.beta = a.value("beta", 1.0);
        algo.delta = a.value("delta", 1.0);
        algo.sigma = a.value("sigma", 0.9);
        algo.rho = a.value("rho", 1.0);
        algo.safeguard = a.value("safeguard", static_cast<std::int64_t>(-1));
        algo.compose_gi = a.value("compose_gi", false);
        algo.permute_rows = a.value("permute_rows", false);
        algo.name = a.value("name", "");
        if (algo.name.empty()) {
            algo.name = algo.kind + "_r" + std::to_string(algo.blocks) + "_" + algo.policy + "_D" +
                        std::to_string(algo.delay);
        }
        spec.algorithms.push_back(std::move(algo));
    }
    return spec;
}

SolverConfig make_solver_config(const AlgorithmSpec& algo, const Splitting& splitting,
                                const ExperimentSpec& spec, const LassoProblem& problem) {
    const std::size_t n = splitting.problem.blocks.size();
    SolverConfig cfg;
    cfg.gamma = algo.gamma;
    cfg.beta = algo.beta;
    cfg.delta = algo.delta;
    cfg.modes = splitting.modes;
    cfg.rho.assign(n, algo.rho);
    cfg.prox_rho_from_forward_average = splitting.prox_rho_from_forward_average;
    cfg.policy.mode = parse_policy(algo.policy);
    cfg.policy.blocks_per_iter = algo.per_iter;
    cfg.policy.always_active = splitting.always_active;
    cfg.policy.safeguard_m =
        algo.safeguard < 0 ? static_cast<std::int64_t>(10 * n) : algo.safeguard;
    cfg.delay.max_delay = algo.delay;
    cfg.stopping.max_iterations = spec.budget_iterations;
    cfg.stopping.max_q_equivalents = spec.budget_q_equivalents;
    cfg.stopping.target_subgrad_residual = spec.target_subgrad_residual;
    cfg.metrics_stride = spec.metrics_stride;
    cfg.metrics = lasso_metrics(problem);
    cfg.seed = spec.seed;
    return cfg;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.algorithms.empty()) throw ConfigError("run_experiment: no algorithms configured");
    if (spec.budget_iterations <= 0 && !(spec.budget_q_equivalents > 0.0)) {
        throw ConfigError("run_experiment: budget is zero");
    }

    ExperimentResult result;
    if (spec.dataset.format == DataFormat::Synthetic) {
        const std::uint64_t data_seed =
            spec.dataset.synth_seed != 0 ? spec.dataset.synth_seed : spec.seed;
        result.problem = synthetic_lasso(spec.dataset.synth_m, spec.dataset.synth_d, data_seed,
                                         spec.dataset.normalize);
    } else {
        IngestOptions opts;
        opts.normalize = spec.dataset.normalize;
        opts.b_column = spec.dataset.b_column;
        opts.b_path = spec.dataset.b_path;
        result.problem = ingest(spec.dataset.path, spec.dataset.format, opts);
    }

    if (spec.lambda_auto) {
        result.lambda = calibrate_lambda(result.problem).lambda;
    } else {
        result.lambda = spec.lambda;
    }
    result.problem.lambda = result.lambda;
    result.algorithms = spec.algorithms;

    for (const AlgorithmSpec& algo : spec.algorithms) {
        if (algo.kind == "fista") {
            FistaConfig fc;
            fc.max_iterations = spec.budget_iterations;
            fc.max_q_equivalents = spec.budget_q_equivalents;
            fc.target_subgrad_residual = spec.target_subgrad_residual;
            fc.metrics_stride = spec.metrics_stride;
            RunRecord rec = fista(result.problem, fc);
            rec.seed = spec.seed;
            result.runs.push_back(std::move(rec));
            continue;
        }
        SplittingOptions sopts;
        if (algo.kind == "psfor") {
            sopts.kind = SplitKind::PSFor;
        } else if (algo.kind == "psback") {
            sopts.kind = SplitKind::PSBack;
        } else {
            throw ConfigError("run_experiment: unknown algorithm kind '" + algo.kind + "'");
        }
        sopts.sigma = algo.sigma;
        sopts.compose_gi = algo.compose_gi;
        sopts.permute_rows = algo.permute_rows;
        sopts.seed = spec.seed;
        Splitting splitting = build_splitting(result.problem, algo.blocks, sopts);
        SolverConfig cfg = make_solver_config(algo, splitting, spec, result.problem);
        result.runs.push_back(solve(splitting.problem, cfg));
    }

    // F* mirrors the protocol of taking the minimum objective across all
    // algorithms plus a reference run.
    double fstar = estimate_fstar(result.problem, spec.fstar_iterations);
    for (const RunRecord& rec : result.runs) fstar = std::min(fstar, best_objective(rec));
    result.fstar = fstar;

    std::filesystem::create_directories(spec.out_dir);
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        std::string path = spec.out_dir + "/" + spec.algorithms[i].name + ".csv";
        write_run_csv(path, result.runs[i], fstar);
        result.csv_paths.push_back(std::move(path));
    }
    result.summary_path = spec.out_dir + "/summary.csv";
    write_summary_csv(result.summary_path, result);
    return result;
}

void write_run_csv(const std::string& path, const RunRecord& rec, double fstar) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_run_csv: cannot open " + path);
    out << "iteration,q_equivalents,objective_residual,subgrad_residual,phi,pi,alpha,blocks,seed\n";
    for (const IterationRow& row : rec.iterations) {
        const double resid = std::isfinite(row.objective)
                                 ? (fstar > 0.0 ? (row.objective - fstar) / fstar : row.objective - fstar)
                                 : std::numeric_limits<double>::quiet_NaN();
        out << row.k << "," << fmt(row.q_equivalents) << "," << fmt(resid) << ","
            << fmt(row.subgrad_residual) << "," << fmt(row.phi) << "," << fmt(row.pi) << ","
            << fmt(row.alpha) << ",";
        for (std::size_t i = 0; i < row.active.size(); ++i) {
            if (i > 0) out << ";";
            out << row.active[i] + 1;  // 1-based in files
        }
        out << "," << rec.seed << "\n";
    }
}

void write_summary_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_summary_csv: cannot open " + path);
    out << "algorithm,status,iterations,q_equivalents,final_objective_residual,"
           "final_subgrad_residual,lambda,fstar,seed\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const RunRecord& rec = result.runs[i];
        const IterationRow* last = last_metric_row(rec);
        const double resid =
            last ? (result.fstar > 0.0 ? (last->objective - result.fstar) / result.fstar
                                       : last->objective - result.fstar)
                 : std::numeric_limits<double>::quiet_NaN();
        out << result.algorithms[i].name << "," << to_string(rec.status) << ","
            << rec.iterations_run << "," << fmt(rec.total_q_equivalents) << "," << fmt(resid) << ","
            << fmt(last ? last->subgrad_residual : std::numeric_limits<double>::quiet_NaN()) << ","
            << fmt(result.lambda) << "," << fmt(result.fstar) << "," << rec.seed << "\n";
    }
}

const std::vector<Preset>& table_presets() {
    static const std::vector<Preset> presets = {
        {"gene", 100.0, 1e-3, 10.0},
        {"drivface", 100.0, 1.0, 10.0},
        {"hand", 1.0, 0.1, 1.0},
        {"random", 1.0, 0.1, 1.0},
    };
    return presets;
}

void apply_preset(const std::string& name, ExperimentSpec& spec, AlgorithmSpec& algo) {
    // <dataset>-<kind>-<r><G|R|RR>, e.g. random-psfor-10G
    const std::size_t p1 = name.find('-');
    const std::size_t p2 = name.find('-', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos) {
        throw ConfigError("apply_preset: expected <dataset>-<kind>-<r><G|R|RR>, got '" + name + "'");
    }
    const std::string dataset = name.substr(0, p1);
    const std::string kind = name.substr(p1 + 1, p2 - p1 - 1);
    std::string tail = name.substr(p2 + 1);

    const Preset* preset = nullptr;
    for (const Preset& p : table_presets()) {
        if (p.dataset == dataset) preset = &p;
    }
    if (!preset) throw ConfigError("apply_preset: unknown dataset '" + dataset + "'");
    if (kind != "psfor" && kind != "psback" && kind != "fista") {
        throw ConfigError("apply_preset: unknown kind '" + kind + "'");
    }

    algo.kind = kind;
    algo.gamma = preset->gamma;
    algo.rho = preset->rho_backward;
    spec.lambda = preset->lambda;
    spec.lambda_auto = false;

    if (kind != "fista") {
        std::size_t digits = 0;
        while (digits < tail.size() && std::isdigit(static_cast<unsigned char>(tail[digits]))) ++digits;
        if (digits == 0) throw ConfigError("apply_preset: missing block count in '" + name + "'");
        algo.blocks = static_cast<std::size_t>(std::stoul(tail.substr(0, digits)));
        const std::string pol = tail.substr(digits);
        if (pol == "G") {
            algo.policy = "greedy";
        } else if (pol == "R") {
            algo.policy = "random";
        } else if (pol == "RR") {
            algo.policy = "rr";
        } else {
            throw ConfigError("apply_preset: unknown policy suffix '" + pol + "'");
        }
    }
    algo.name = name;
}

}  // namespace projsplit
