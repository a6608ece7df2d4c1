#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucip/baselines.hpp"
#include "ucip/counterfactual.hpp"
#include "ucip/criteria.hpp"
#include "ucip/qbm.hpp"
#include "ucip/trajgen.hpp"

namespace ucip::harness {

// Experiment ids: phase1, temporal, counterfactual, cross_agent, adversarial,
// baselines, dim_sweep, grid_sweep, memory_sweep, alpha_sweep, transfer.
bool is_known_experiment(const std::string& id);

struct ExperimentConfig {
    std::string experiment = "phase1";
    std::uint64_t master_seed = 42;
    std::string out_dir = "runs/out";

    // dataset
    int n_per_class = 30;
    int horizon = 100;
    int grid_size = 10;
    trajgen::AgentParams agent_params;

    // model
    qbm::QbmParams qbm;
    qbm::TrainConfig train;

    criteria::GateThresholds thresholds;
    criteria::CriteriaConfig criteria;

    // counterfactual diagnostics
    int cf_event_time = 50;
    int cf_window = 20;

    // sweeps and controls
    std::vector<int> temporal_windows = {10, 15, 20, 25, 30, 40};
    std::vector<int> dim_sweep_hidden = {4, 8, 12, 16, 20};
    int dim_sweep_epochs = 30;
    std::vector<int> grid_sizes = {10, 20, 50};
    std::vector<int> memory_lengths = {1, 3, 5, 10};
    std::vector<double> mimicry_ratios = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int adversarial_n = 20;
    int alpha_points = 11;
    int alpha_n = 20;
    int n_permutations = 10000;
    int baselines_n_per_class = 100;
    trajgen::CorridorConfig corridor;

    std::string to_json_string(int indent = 2) const;
    static ExperimentConfig from_json_string(const std::string& text);

    std::string config_hash() const;
    std::string thresholds_json() const;
    std::string thresholds_hash() const;
};

struct RunOutcome {
    int exit_code = 0; // 0 success, 2 envelope-withheld classification
    bool envelope_withheld = false;
    std::vector<std::string> files; // written files, relative to out_dir
};

RunOutcome run(const ExperimentConfig& cfg); // dispatch on cfg.experiment

RunOutcome run_phase1(const ExperimentConfig& cfg);
RunOutcome run_temporal(const ExperimentConfig& cfg);
RunOutcome run_counterfactual(const ExperimentConfig& cfg);
RunOutcome run_cross_agent(const ExperimentConfig& cfg);
RunOutcome run_adversarial(const ExperimentConfig& cfg);
RunOutcome run_baselines(const ExperimentConfig& cfg);
RunOutcome run_dim_sweep(const ExperimentConfig& cfg);
RunOutcome run_grid_sweep(const ExperimentConfig& cfg);
RunOutcome run_memory_sweep(const ExperimentConfig& cfg);
RunOutcome run_alpha_sweep(const ExperimentConfig& cfg);
RunOutcome run_transfer(const ExperimentConfig& cfg);

// Generation helpers shared with the CLI.
std::vector<trajgen::Trajectory> build_dataset(const ExperimentConfig& cfg,
                                               const std::vector<trajgen::AgentClass>& classes,
                                               int n_per_class);
qbm::QbmModel train_shared_model(const ExperimentConfig& cfg,
                                 const std::vector<trajgen::Trajectory>& dataset);

// Text rendering of a finished phase1 run directory.
std::string render_report(const std::string& run_dir);

} // namespace ucip::harness
