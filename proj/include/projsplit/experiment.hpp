#pragma once

#include <string>

#include "projsplit/ingest.hpp"

namespace projsplit {

struct AlgorithmSpec {
    std::string name;           // label used for the output file and summary row
    std::string kind = "psfor";  // psfor | psback | fista
    std::size_t blocks = 10;     // r
    std::string policy = "greedy";  // rr | random | greedy
    int delay = 0;               // D
    int per_iter = 1;            // b
    double gamma = 1.0;
    double beta = 1.0;
    double delta = 1.0;
    double sigma = 0.9;
    double rho = 1.0;
    std::int64_t safeguard = -1;  // -1: 10*n default; 0: disabled; >0: M
    bool compose_gi = false;
    bool permute_rows = false;
};

struct DatasetSpec {
    DataFormat format = DataFormat::Synthetic;
    std::string path;  // unused for synthetic
    std::size_t synth_m = 100;
    std::size_t synth_d = 1000;
    std::uint64_t synth_seed = 0;  // 0: reuse the experiment seed
    bool normalize = false;
    int b_column = -1;
    std::string b_path;
};

struct ExperimentSpec {
    DatasetSpec dataset;
    double lambda = 1.0;
    bool lambda_auto = false;  // calibrate toward ~10% nonzeros
    std::vector<AlgorithmSpec> algorithms;
    std::int64_t budget_iterations = 1000;
    double budget_q_equivalents = std::numeric_limits<double>::infinity();
    double target_subgrad_residual = 0.0;
    std::int64_t metrics_stride = 1;
    std::int64_t fstar_iterations = 3000;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

// JSON config file for `sweep`; flags override nothing here (the CLI merges
// before calling).
ExperimentSpec parse_spec_json(const std::string& path);

SolverConfig make_solver_config(const AlgorithmSpec& algo, const Splitting& splitting,
                                const ExperimentSpec& spec, const LassoProblem& problem);

struct ExperimentResult {
    LassoProblem problem;
    double lambda = 0.0;
    double fstar = 0.0;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<RunRecord> runs;
    std::vector<std::string> csv_paths;
    std::string summary_path;
};

// Loads the dataset once, runs every algorithm, estimates F* as the best
// objective across a reference FISTA run and all runs, then writes one CSV
// per algorithm plus a summary. Deterministic given the spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// run record as a plot-ready CSV with the fixed header:
// iteration,q_equivalents,objective_residual,subgrad_residual,phi,pi,alpha,blocks,seed
void write_run_csv(const std::string& path, const RunRecord& rec, double fstar);

void write_summary_csv(const std::string& path, const ExperimentResult& result);

struct Preset {
    std::string dataset;  // gene | drivface | hand | random
    double gamma;
    double rho_backward;
    double lambda;
};

const std::vector<Preset>& table_presets();

// "random-psfor-10G" -> dataset preset values + algorithm (kind, r, policy).
// Policy letters: G greedy, R random, RR round-robin.
void apply_preset(const std::string& name, ExperimentSpec& spec, AlgorithmSpec& algo);

}  // namespace projsplit
