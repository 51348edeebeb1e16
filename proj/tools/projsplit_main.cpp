#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "projsplit/experiment.hpp"

namespace {

using namespace projsplit;

DataFormat parse_format(const std::string& s) {
    if (s == "csv") return DataFormat::DenseCsv;
    if (s == "mm" || s == "matrixmarket") return DataFormat::MatrixMarket;
    if (s == "synthetic") return DataFormat::Synthetic;
    throw ConfigError("unknown format '" + s + "' (expected csv, mm or synthetic)");
}

// "MxD" for synthetic datasets, e.g. "100x1000"
void parse_synth_dims(const std::string& s, DatasetSpec& ds) {
    const std::size_t x = s.find('x');
    if (x == std::string::npos) throw ConfigError("synthetic dataset spec must look like 100x1000");
    ds.synth_m = std::stoul(s.substr(0, x));
    ds.synth_d = std::stoul(s.substr(x + 1));
}

struct SolveArgs {
    std::string dataset;
    std::string format = "synthetic";
    bool normalize = false;
    std::string lambda = "1";
    std::string algo = "psfor";
    std::size_t blocks = 10;
    std::string policy = "greedy";
    int delay = 0;
    int per_iter = 1;
    double budget_qe = 0.0;  // 0: unlimited
    std::int64_t budget_iters = 1000;
    std::uint64_t seed = 1;
    std::string out = "run";
    std::string preset;
    std::string b_path;
    int b_column = -1;
    double gamma = 1.0;
    double beta = 1.0;
    double delta = 1.0;
    double sigma = 0.9;
    double rho = 1.0;
    std::int64_t safeguard = -1;
    std::int64_t metrics_stride = 1;
    double target_subgrad = 0.0;
};

void add_dataset_flags(CLI::App* cmd, SolveArgs& a) {
    cmd->add_option("--dataset", a.dataset, "Path to Q (csv/mm), or MxD for synthetic");
    cmd->add_option("--format", a.format, "csv | mm | synthetic")->capture_default_str();
    cmd->add_flag("--normalize", a.normalize, "Scale columns of Q to unit norm");
    cmd->add_option("--b-file", a.b_path, "Right-hand side from a separate file");
    cmd->add_option("--b-col", a.b_column, "CSV column holding b (default: last)");
}

ExperimentSpec build_spec(const SolveArgs& a, std::vector<AlgorithmSpec> algos) {
    ExperimentSpec spec;
    spec.dataset.format = parse_format(a.format);
    if (spec.dataset.format == DataFormat::Synthetic) {
        if (!a.dataset.empty()) parse_synth_dims(a.dataset, spec.dataset);
    } else {
        if (a.dataset.empty()) throw ConfigError("--dataset is required for csv/mm input");
        spec.dataset.path = a.dataset;
    }
    spec.dataset.normalize = a.normalize;
    spec.dataset.b_path = a.b_path;
    spec.dataset.b_column = a.b_column;
    if (a.lambda == "auto" || a.lambda == "auto-10pct") {
        spec.lambda_auto = true;
    } else {
        spec.lambda = std::stod(a.lambda);
    }
    spec.budget_iterations = a.budget_iters;
    spec.budget_q_equivalents =
        a.budget_qe > 0.0 ? a.budget_qe : std::numeric_limits<double>::infinity();
    spec.target_subgrad_residual = a.target_subgrad;
    spec.metrics_stride = a.metrics_stride;
    spec.seed = a.seed;
    spec.out_dir = a.out;
    spec.algorithms = std::move(algos);
    return spec;
}

int run_solve(const SolveArgs& a) {
    AlgorithmSpec algo;
    algo.kind = a.algo;
    algo.blocks = a.blocks;
    algo.policy = a.policy;
    algo.delay = a.delay;
    algo.per_iter = a.per_iter;
    algo.gamma = a.gamma;
    algo.beta = a.beta;
    algo.delta = a.delta;
    algo.sigma = a.sigma;
    algo.rho = a.rho;
    algo.safeguard = a.safeguard;
    algo.name = algo.kind + "_r" + std::to_string(algo.blocks) + "_" + algo.policy + "_D" +
                std::to_string(algo.delay);

    ExperimentSpec spec = build_spec(a, {});
    if (!a.preset.empty()) apply_preset(a.preset, spec, algo);
    spec.algorithms.push_back(algo);

    ExperimentResult result = run_experiment(spec);
    const RunRecord& rec = result.runs.front();
    std::cout << "status=" << to_string(rec.status) << " iterations=" << rec.iterations_run
              << " q_equivalents=" << rec.total_q_equivalents << " lambda=" << result.lambda
              << " fstar=" << result.fstar << "\n";
    std::cout << "wrote " << result.csv_paths.front() << " and " << result.summary_path << "\n";
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_override) {
    ExperimentSpec spec = parse_spec_json(config_path);
    if (!out_override.empty()) spec.out_dir = out_override;
    ExperimentResult result = run_experiment(spec);
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        std::cout << result.algorithms[i].name << ": status=" << to_string(result.runs[i].status)
                  << " iterations=" << result.runs[i].iterations_run
                  << " q_equivalents=" << result.runs[i].total_q_equivalents << "\n";
    }
    std::cout << "wrote " << result.csv_paths.size() << " run files and " << result.summary_path
              << "\n";
    return 0;
}

int run_synth(std::size_t m, std::size_t d, std::uint64_t seed, const std::string& out,
              const std::string& format, bool normalize) {
    LassoProblem p = synthetic_lasso(m, d, seed, normalize);
    if (format == "csv") {
        write_dense_csv(out + ".csv", p.q, &p.b);
        std::cout << "wrote " << out << ".csv (" << m << "x" << d << " plus b column)\n";
    } else if (format == "mm") {
        write_matrix_market(out + ".mtx", p.q);
        std::ofstream bf(out + "_b.csv");
        for (double v : p.b) bf << v << "\n";
        std::cout << "wrote " << out << ".mtx and " << out << "_b.csv\n";
    } else {
        throw ConfigError("synth: format must be csv or mm");
    }
    return 0;
}

int run_presets() {
    std::cout << "dataset    gamma    rho(psback)  lambda\n";
    for (const Preset& p : table_presets()) {
        std::printf("%-10s %-8g %-12g %g\n", p.dataset.c_str(), p.gamma, p.rho_backward, p.lambda);
    }
    std::cout << "\npreset names: <dataset>-<psfor|psback|fista>-<r><G|R|RR>, e.g. random-psfor-10G\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-iterative projective splitting solver and lasso benchmark harness"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Run one algorithm and emit telemetry CSVs");
    add_dataset_flags(solve_cmd, sa);
    solve_cmd->add_option("--lambda", sa.lambda, "Regularization weight, or 'auto' for ~10% nonzeros")
        ->capture_default_str();
    solve_cmd->add_option("--algo", sa.algo, "psfor | psback | fista")->capture_default_str();
    solve_cmd->add_option("--blocks", sa.blocks, "Row blocks r")->capture_default_str();
    solve_cmd->add_option("--policy", sa.policy, "rr | random | greedy")->capture_default_str();
    solve_cmd->add_option("--delay", sa.delay, "Max simulated delay D")->capture_default_str();
    solve_cmd->add_option("--per-iter", sa.per_iter, "Blocks activated per iteration b")
        ->capture_default_str();
    solve_cmd->add_option("--budget-qe", sa.budget_qe, "Stop after this many Q-equivalent multiplies");
    solve_cmd->add_option("--budget-iters", sa.budget_iters, "Iteration budget")->capture_default_str();
    solve_cmd->add_option("--target-subgrad", sa.target_subgrad, "Early stop on subgradient residual");
    solve_cmd->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
    solve_cmd->add_option("--out", sa.out, "Output directory")->capture_default_str();
    solve_cmd->add_option("--preset", sa.preset, "Named preset, e.g. random-psfor-10G");
    solve_cmd->add_option("--gamma", sa.gamma, "Primal-dual scale")->capture_default_str();
    solve_cmd->add_option("--beta", sa.beta, "Projection relaxation in (0,2)")->capture_default_str();
    solve_cmd->add_option("--delta", sa.delta, "Forward-step separation margin")->capture_default_str();
    solve_cmd->add_option("--sigma", sa.sigma, "Relative error constant for CG prox")
        ->capture_default_str();
    solve_cmd->add_option("--rho", sa.rho, "Backward stepsize")->capture_default_str();
    solve_cmd->add_option("--safeguard", sa.safeguard,
                          "Force blocks idle >= M iterations (-1: 10n, 0: off)");
    solve_cmd->add_option("--metrics-stride", sa.metrics_stride, "Evaluate metrics every k iterations");

    std::string sweep_config, sweep_out;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run the algorithms from a JSON experiment spec");
    sweep_cmd->add_option("--config", sweep_config, "Experiment spec (JSON)")->required();
    sweep_cmd->add_option("--out", sweep_out, "Override the spec's output directory");

    std::size_t synth_m = 100, synth_d = 1000;
    std::uint64_t synth_seed = 1;
    std::string synth_out = "synthetic", synth_format = "csv";
    bool synth_normalize = false;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--m", synth_m, "Rows")->capture_default_str();
    synth_cmd->add_option("--d", synth_d, "Columns")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "Seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output base path")->capture_default_str();
    synth_cmd->add_option("--format", synth_format, "csv | mm")->capture_default_str();
    synth_cmd->add_flag("--normalize", synth_normalize, "Normalize columns before writing");

    CLI::App* presets_cmd = app.add_subcommand("presets", "List the named parameter presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return run_solve(sa);
        if (sweep_cmd->parsed()) return run_sweep(sweep_config, sweep_out);
        if (synth_cmd->parsed()) return run_synth(synth_m, synth_d, synth_seed, synth_out,
                                                  synth_format, synth_normalize);
        if (presets_cmd->parsed()) return run_presets();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
