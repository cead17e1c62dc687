#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace b5g::beamspace {

using cd = std::complex<double>;

// ULA response: entry m = exp(-j 2 pi m theta) / sqrt(n), m = 0..n-1, for a
// normalized angle theta in [-1/2, 1/2].
Eigen::VectorXcd array_response(std::size_t n, double theta);

// Maps m/n in [0, 1) to the normalized-angle grid [-1/2, 1/2).
double grid_angle(std::size_t m, std::size_t n);

// Column m is array_response(n, grid_angle(m, n)), i.e. the DFT phases
// exp(-j 2 pi k m / n) / sqrt(n). Square codebooks are unitary.
Eigen::MatrixXcd dft_codebook(std::size_t n, std::size_t n_beams);

struct Path {
    cd gain;
    double aod; // normalized
    double aoa; // normalized
};

struct MultipathChannel {
    std::vector<Path> paths;
    std::size_t n_tx = 1;
    std::size_t n_rx = 1;

    // H = sum_p gain_p sqrt(n_tx n_rx) a_r(aoa_p) a_t(aod_p)^H, n_rx x n_tx.
    // With unit-norm responses and square DFT codebooks, an on-grid path of
    // gain g maps to a single virtual entry of magnitude |g| sqrt(n_tx n_rx).
    Eigen::MatrixXcd matrix() const;
};

struct BeamspaceModel {
    Eigen::MatrixXcd W1; // n_tx x n_vt
    Eigen::MatrixXcd Z;  // n_rx x n_vr
    Eigen::MatrixXcd H_v; // n_vr x n_vt
    std::vector<std::size_t> selected_beams;
};

// H_v = Z^H H W1. With unitary Z the virtual noise Z^H n stays white.
BeamspaceModel virtual_channel(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W1, const Eigen::MatrixXcd& Z);

struct BeamSelection {
    std::vector<std::size_t> beams; // ascending column indices
    double captured_energy = 0.0;   // fraction of ||H_v||_F^2
};

// Transmit-side selection: the budget columns of H_v with the largest energy
// (lower index wins ties).
BeamSelection select_beams(const Eigen::MatrixXcd& H_v, std::size_t budget);

// log2 det(I + power / (noise * n_streams) H H^H), n_streams = columns of H.
double mimo_se(const Eigen::MatrixXcd& H_eff, double power, double noise);

// SE of the selected columns of H_v with the per-beam power the full beam
// set would get (power / n_vt each), so that dropping beams never adds SE.
double selected_se(const Eigen::MatrixXcd& H_v, const std::vector<std::size_t>& beams, double power, double noise);

} // namespace b5g::beamspace
