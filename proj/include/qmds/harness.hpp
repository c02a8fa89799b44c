#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qmds/measurement.hpp"
#include "qmds/solvers.hpp"

namespace qmds {

struct Room {
    double length = 30.0;  // x extent, meters
    double width = 30.0;   // y extent
    double height = 10.0;  // z extent
};

struct ExperimentConfig {
    Room room;
    Points anchors;
    Index n_targets = 15;
    std::vector<double> sigma_d_grid;  // meters
    std::vector<double> epsilon_grid;  // degrees; 0 means noiseless angles
    std::vector<Scenario> scenarios{Scenario::I, Scenario::II};
    std::vector<Algorithm> algorithms{Algorithm::Smds, Algorithm::QdSmds, Algorithm::QdMrc, Algorithm::QdMrcIter};
    int trials = 200;
    double missing_fraction = 0.0;
    int tau_max = 1;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;  // 0 = hardware concurrency
    bool timing = false;   // wall time is nondeterministic, so it is off unless asked for
};

/// 30×30×10 m room, 5 anchors (4 upper corners and one floor corner),
/// 15 targets, σ_d 0.2..4.0 m by 0.2, ε 10..50° by 10.
ExperimentConfig default_config();

/// JSON object whose keys mirror ExperimentConfig; missing keys keep their
/// defaults. Throws InvalidConfig on unknown keys or bad values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// ξ = ‖X̂_T - X_T‖_F / N_T. Throws ShapeMismatch.
double metric_xi(const Points& estimate, const Points& truth);

/// Generator for one trial, seeded from (master seed, scenario, σ_d, ε,
/// trial index). The algorithm is not part of the key.
Rng trial_rng(std::uint64_t master_seed, Scenario scenario, double sigma_d, double epsilon_deg, int trial);

struct TrialInstance {
    NetworkGeometry geometry;
    TrueParameters truth;
    MeasurementSet measurements;
};

/// Targets uniform in the room (redrawn while any anchor-target edge is
/// degenerate), then measurements, then the missing-entry mask.
TrialInstance make_instance(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                            double sigma_d, double epsilon_deg, int trial);

NoiseConfig noise_for(double sigma_d, double epsilon_deg);

struct TrialResult {
    Scenario scenario = Scenario::I;
    Algorithm algorithm = Algorithm::Smds;
    double sigma_d = 0.0;
    double epsilon = 0.0;
    int trial_index = 0;
    bool ok = false;
    double xi = 0.0;
    int iterations = 0;  // MRC updates plus completion sweeps
    double wall_ms = 0.0;
    std::string error;
};

SolverConfig solver_config(const ExperimentConfig& config, Algorithm algorithm);

TrialResult run_trial(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                      Algorithm algorithm, double sigma_d, double epsilon_deg, int trial);

/// Every algorithm in config.algorithms on one shared instance.
std::vector<TrialResult> run_paired(const ExperimentConfig& config, const AnchorFrame& frame, Scenario scenario,
                                    double sigma_d, double epsilon_deg, int trial);

struct CellSummary {
    Scenario scenario = Scenario::I;
    Algorithm algorithm = Algorithm::Smds;
    double sigma_d = 0.0;
    double epsilon = 0.0;
    double missing_fraction = 0.0;
    int trials_ok = 0;
    int trials_failed = 0;
    double mean_xi = 0.0;
    double std_xi = 0.0;  // sample standard deviation
    double mean_iterations = 0.0;
    double mean_wall_ms = 0.0;
    std::vector<double> xi;  // per trial, NaN for failures, in trial order
};

struct ExperimentGrid {
    std::vector<CellSummary> cells;  // ordered by scenario, algorithm, σ_d, ε
    bool timing = false;
};

/// Runs every (scenario, σ_d, ε, trial) task on a thread pool and reduces
/// in key order.
ExperimentGrid run_grid(const ExperimentConfig& config);

const CellSummary* find_cell(const ExperimentGrid& grid, Scenario scenario, Algorithm algorithm, double sigma_d,
                             double epsilon_deg);

void write_csv(std::ostream& out, const ExperimentGrid& grid);
void write_csv(const std::filesystem::path& path, const ExperimentGrid& grid);

struct ConvergenceRow {
    Scenario scenario = Scenario::II;
    double sigma_d = 0.0;
    double epsilon = 0.0;
    int tau = 0;
    int trials_ok = 0;
    double mean_xi = 0.0;
    double std_xi = 0.0;
    double mean_fixed_point_residual = 0.0;  // NaN at τ = 0
    double max_fixed_point_residual = 0.0;
    std::vector<double> xi;
};

/// Iterative MRC traced over τ = 0..tau_max for every (scenario, σ_d, ε).
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config, int tau_max);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace qmds
