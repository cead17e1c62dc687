#pragma once

#include "b5g/channel.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace b5g::engine {

enum class Scenario { CellfreeCdf, IrsSweep, BeamspaceDemo };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

enum class MrWeights { Unit, Optimal };

struct CellfreeParams {
    std::size_t num_aps = 100;
    std::size_t num_ues = 40;
    std::size_t antennas = 1;
    double side_m = 1000.0;
    std::size_t cluster_size = 100;
    std::optional<std::size_t> max_ues_per_ap;
    std::size_t tau_p = 10;
    double ue_power_w = 0.1;
    double noise_dbm = -76.0;
    channel::PathlossConfig pathloss;
    double prelog = 1.0;
    std::size_t batches = 10;
    MrWeights mr_weights = MrWeights::Optimal;
    double maxmin_tol = 1e-4;
    // >1 rebuilds L-MMSE combiners and weights at the previous powers and reruns max-min
    std::size_t maxmin_outer_iterations = 1;

    double noise_w() const;
};

struct IrsParams {
    double d_start = 20.0;
    double d_stop = 80.0;
    double d_step = 2.0;
    std::size_t elements = 100;
    std::size_t oracle_levels = 64;
    std::size_t oracle_max_elements = 4;
    double tol = 1e-6;
    std::size_t max_iters = 100;
    unsigned phase_bits = 0; // 0 keeps continuous phases

    std::vector<double> distances() const;
};

struct BeamPath {
    double gain = 1.0;
    double phase_rad = 0.0;
    double aod = 0.0;
    double aoa = 0.0;
};

struct BeamspaceParams {
    std::size_t n_tx = 64;
    std::size_t n_rx = 16;
    std::vector<BeamPath> paths;  // explicit paths; random ones when empty
    std::size_t num_paths = 3;    // random paths per channel
    double power_w = 1.0;
    double noise_w = 0.01;
    std::vector<std::size_t> budgets; // empty: 1..n_tx
};

struct ExperimentConfig {
    Scenario scenario = Scenario::CellfreeCdf;
    bool scenario_declared = false; // set when the YAML names a scenario
    std::size_t trials = 200;
    std::size_t layouts = 50;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    std::size_t workers = 1;
    CellfreeParams cellfree;
    IrsParams irs;
    BeamspaceParams beamspace;

    void validate() const;
};

// Strict: unknown keys, wrong types and out-of-range values throw
// InvalidArgument naming the offending key.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CdfSummary {
    std::vector<double> sorted;

    std::size_t n_samples() const { return sorted.size(); }
    // Linear interpolation between order statistics at rank q(n-1)+1.
    double quantile(double q) const;
};

CdfSummary compute_cdf(std::vector<double> samples);

// Runs fn(0..n-1) on up to `workers` threads. The first exception by index
// is rethrown after all work stops.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

inline constexpr std::string_view csv_version_line = "# b5g-mimo-sim v1";

// --- cellfree-cdf -----------------------------------------------------------

inline constexpr std::array<std::string_view, 4> cellfree_schemes = {
    "cellfree-mr", "cellfree-lmmse-opt", "smallcell-mr", "cellfree-lmmse-maxmin"};

struct SchemeOutcome {
    Eigen::VectorXd se;                // per UE over all trials
    std::vector<Eigen::VectorXd> batch_se; // per contiguous trial batch
};

struct MaxMinOutcome {
    Eigen::VectorXd powers;
    Eigen::VectorXd sinr;
    double gamma = 0.0;
    double full_power_min_se = 0.0;
    double maxmin_min_se = 0.0;
    double sinr_spread = 0.0; // (max - min) / min over UEs below p_max
};

struct LayoutOutcome {
    std::array<SchemeOutcome, 4> schemes;
    MaxMinOutcome maxmin;
};

LayoutOutcome evaluate_cellfree_layout(const CellfreeParams& params, std::size_t trials, std::uint64_t master_seed,
                                       std::size_t layout_id);

struct CellfreeRun {
    std::vector<LayoutOutcome> layouts;
    std::array<CdfSummary, 4> cdf;
};

CellfreeRun run_cellfree_cdf(const ExperimentConfig& cfg);
std::string cellfree_csv(const CellfreeRun& run);

// --- irs-sweep --------------------------------------------------------------

struct IrsPoint {
    double d = 0.0;
    std::string scheme;
    double snr_db = 0.0; // mean of dB values over seeds
    std::size_t iters = 0; // max over seeds
};

struct IrsRun {
    std::vector<IrsPoint> rows; // d-major, schemes in fixed order
    std::vector<double> distances;
};

IrsRun run_irs_sweep(const ExperimentConfig& cfg);
std::string irs_csv(const IrsRun& run);

// --- beamspace-demo ---------------------------------------------------------

struct BeamspaceRow {
    std::size_t budget = 0;
    double captured_energy = 0.0;
    double se = 0.0;
    double se_full = 0.0;
};

std::vector<BeamspaceRow> run_beamspace_demo(const ExperimentConfig& cfg);
std::string beamspace_csv(const std::vector<BeamspaceRow>& rows);

// Runs the configured scenario and writes its CSV and summary into
// cfg.output_dir. Returns the CSV path.
std::filesystem::path run_and_write(const ExperimentConfig& cfg);

} // namespace b5g::engine
