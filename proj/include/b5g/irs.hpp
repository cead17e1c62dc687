#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace b5g::irs {

// Single-user MISO link with an N-element reflecting surface. The effective
// channel is (h_r^H diag(e^{j theta}) G + h_d^H)^H.
struct IrsScenario {
    Eigen::VectorXcd h_d; // M, transmitter -> user
    Eigen::MatrixXcd G;   // N x M, transmitter -> IRS
    Eigen::VectorXcd h_r; // N, IRS -> user
    double p_max = 1e-3;
    double noise = 1e-14;

    std::size_t antennas() const { return static_cast<std::size_t>(h_d.size()); }
    std::size_t elements() const { return static_cast<std::size_t>(h_r.size()); }
    void validate() const;
};

struct IrsSolution {
    Eigen::VectorXcd w;
    std::vector<double> theta; // [0, 2pi)
    double snr = 0.0;
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    std::vector<std::string> diagnostics;
};

struct SweepGeometry {
    double irs_x = 51.0;
    double user_offset = 2.0;
    std::size_t tx_antennas = 2;
    double ref_gain_db = -30.0;    // pathloss at 1 m
    double los_exponent = 2.0;     // transmitter -> IRS
    double fading_exponent = 3.0;  // IRS -> user and transmitter -> user
    double wavelength = 0.125;     // sets the LoS phase only
    double p_max = 1e-3;
    double noise = 1e-14;
};

// Transmitter at the origin, IRS at (irs_x, 0), user at (d, user_offset).
// G is deterministic (half-wavelength ULAs along the x axis, far field);
// h_r and h_d are Rayleigh drawn from seed.
IrsScenario build_sweep_scenario(double d, std::size_t n_elements, std::uint64_t seed, const SweepGeometry& geo = {});

Eigen::VectorXcd composite_channel(const IrsScenario& sc, const std::vector<double>& theta);

// |composite^H w|^2 / noise
double snr(const IrsScenario& sc, const Eigen::VectorXcd& w, const std::vector<double>& theta);

// Phases that rotate every reflected term onto the direct term for fixed w.
std::vector<double> optimal_phases_given_w(const IrsScenario& sc, const Eigen::VectorXcd& w);

// sqrt(p_max) c / ||c||, or zero when c = 0.
Eigen::VectorXcd mrt(const Eigen::VectorXcd& c, double p_max);

IrsSolution alternating_optimize(const IrsScenario& sc, double tol = 1e-6, std::size_t max_iters = 100);

// Exhaustive search over levels^N phase vectors with MRT on each composite
// channel. Refuses levels^N > 1e8.
IrsSolution grid_oracle(const IrsScenario& sc, std::size_t levels);

double no_irs_baseline(const IrsScenario& sc);

// Rounds each phase to the nearest of 2^bits levels.
std::vector<double> quantize_phases(const std::vector<double>& theta, unsigned bits);

} // namespace b5g::irs
