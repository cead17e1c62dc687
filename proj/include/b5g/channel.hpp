#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace b5g::channel {

using cd = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct NetworkLayout {
    std::vector<Point> ap_positions;
    std::vector<Point> ue_positions;
    double side_length = 0.0;
    bool wrap_around = false;

    std::size_t num_aps() const { return ap_positions.size(); }
    std::size_t num_ues() const { return ue_positions.size(); }
};

// Uniform i.i.d. AP and UE positions in [0, side]^2.
NetworkLayout generate_layout(std::size_t num_aps, std::size_t num_ues, double side, std::uint64_t seed,
                              bool wrap_around = false);

// Euclidean distance between UE k and AP l, measured on the torus when the
// layout wraps around.
double distance(const NetworkLayout& layout, std::size_t k, std::size_t l);

// Log-distance pathloss with optional i.i.d. log-normal shadowing.
struct PathlossConfig {
    double exponent = 3.76;
    double ref_loss_db = 34.5; // at 1 m
    double shadowing_db = 8.0; // standard deviation; 0 disables shadowing
    double d_min_m = 1.0;
    bool wrap_around = false;
};

struct LargeScaleFading {
    Eigen::MatrixXd beta;         // K x L, linear scale
    Eigen::MatrixXd shadowing_db; // K x L, empty when shadowing is disabled

    std::size_t num_ues() const { return static_cast<std::size_t>(beta.rows()); }
    std::size_t num_aps() const { return static_cast<std::size_t>(beta.cols()); }
};

// beta = 10^((-L0 - 10 alpha log10(max(d, d_min)) + s) / 10). Distances wrap
// when either the layout or the config asks for it.
LargeScaleFading compute_large_scale(const NetworkLayout& layout, const PathlossConfig& model, std::uint64_t seed);

struct FadingModel {
    enum class Kind { RayleighIID, RicianLoS };
    Kind kind = Kind::RayleighIID;
    double kappa = 0.0;
    // The LoS phase of each (k, l) pair is drawn from this seed, so it stays
    // fixed across fading realizations of the same layout.
    std::uint64_t los_phase_seed = 0;

    static FadingModel rayleigh() { return {}; }
    static FadingModel rician(double kappa, std::uint64_t los_phase_seed) {
        return {Kind::RicianLoS, kappa, los_phase_seed};
    }
};

// Channel vectors of every UE to every AP. Column k of h stacks
// h_{k,0}, ..., h_{k,L-1}, each of length N.
struct ChannelSet {
    Eigen::MatrixXcd h; // (L*N) x K
    Eigen::MatrixXd beta;
    std::size_t antennas = 1;
    FadingModel model;

    std::size_t num_ues() const { return static_cast<std::size_t>(h.cols()); }
    std::size_t num_aps() const { return static_cast<std::size_t>(h.rows()) / antennas; }

    std::span<const cd> at(std::size_t k, std::size_t l) const {
        return {h.col(static_cast<Eigen::Index>(k)).data() + l * antennas, antennas};
    }
};

ChannelSet draw_channels(const LargeScaleFading& lsf, std::size_t antennas, const FadingModel& model,
                         std::uint64_t seed);

struct PilotAssignment {
    std::size_t tau_p = 1;
    std::vector<std::size_t> pilot_index;
};

// UE k gets pilot k mod tau_p.
PilotAssignment round_robin_pilots(std::size_t num_ues, std::size_t tau_p);

enum class CsiMode { Mmse, Perfect };

struct EstimateSet {
    Eigen::MatrixXcd h_hat;         // same layout as ChannelSet::h
    Eigen::MatrixXd est_variance;   // K x L, per entry
    Eigen::MatrixXd error_variance; // K x L, per entry
    std::size_t antennas = 1;
    // est_variance is the exact per-entry second moment of h_hat, so
    // E{||h_hat||^2} = N * est_variance holds in closed form.
    bool closed_form = true;

    std::size_t num_ues() const { return static_cast<std::size_t>(h_hat.cols()); }
    std::size_t num_aps() const { return static_cast<std::size_t>(h_hat.rows()) / antennas; }

    std::span<const cd> at(std::size_t k, std::size_t l) const {
        return {h_hat.col(static_cast<Eigen::Index>(k)).data() + l * antennas, antennas};
    }
};

// Pilot-based MMSE estimation for the i.i.d. Rayleigh model. Perfect mode
// returns h_hat = h with zero error variance for any fading model.
EstimateSet estimate_channels(const ChannelSet& channels, const PilotAssignment& pilots, double pilot_power,
                              double noise_power, std::uint64_t seed, CsiMode mode = CsiMode::Mmse);

struct Realization {
    ChannelSet channels;
    EstimateSet estimates;
};

// One fading realization (plus its estimates) per trial index; a pure
// function of the trial index.
using TrialGenerator = std::function<Realization(std::size_t trial)>;

struct TrialSetup {
    LargeScaleFading lsf;
    std::size_t antennas = 1;
    FadingModel model;
    PilotAssignment pilots;
    double pilot_power = 0.1;
    double noise_power = 1.0;
    CsiMode csi = CsiMode::Mmse;
};

// Trial t draws fading from derive_seed(seed, {fading, t}) and pilot noise
// from derive_seed(seed, {pilot_noise, t}).
TrialGenerator make_trial_generator(TrialSetup setup, std::uint64_t seed);

} // namespace b5g::channel
