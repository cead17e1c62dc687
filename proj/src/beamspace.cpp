#include "b5g/beamspace.hpp"

#include "b5g/error.hpp"
#include "b5g/kernels.hpp"
#include "b5g/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace b5g::beamspace {

Eigen::VectorXcd array_response(std::size_t n, double theta) {
    require(n >= 1, "array_response: need at least one element");
    require(std::isfinite(theta) && std::abs(theta) <= 0.5, "array_response: normalized angle outside [-1/2, 1/2]");
    Eigen::VectorXcd a(static_cast<Eigen::Index>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t m = 0; m < n; ++m)
        a(static_cast<Eigen::Index>(m)) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(m) * theta);
    return a;
}

double grid_angle(std::size_t m, std::size_t n) {
    const double u = static_cast<double>(m % n) / static_cast<double>(n);
    return u < 0.5 ? u : u - 1.0;
}

Eigen::MatrixXcd dft_codebook(std::size_t n, std::size_t n_beams) {
    require(n >= 1 && n_beams >= 1 && n_beams <= n, "dft_codebook: need 1 <= n_beams <= n");
    Eigen::MatrixXcd W(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_beams));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t m = 0; m < n_beams; ++m)
        for (std::size_t k = 0; k < n; ++k) {
            // reduce k*m mod n first so large arrays keep exact phases
            const double frac = static_cast<double>((k * m) % n) / static_cast<double>(n);
            W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = std::polar(scale, -2.0 * std::numbers::pi * frac);
        }
    return W;
}

Eigen::MatrixXcd MultipathChannel::matrix() const {
    require(n_tx >= 1 && n_rx >= 1, "MultipathChannel: array sizes must be positive");
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_rx), static_cast<Eigen::Index>(n_tx));
    const double g = std::sqrt(static_cast<double>(n_tx * n_rx));
    for (const auto& p : paths)
        H.noalias() += (p.gain * g) * array_response(n_rx, p.aoa) * array_response(n_tx, p.aod).adjoint();
    return H;
}

BeamspaceModel virtual_channel(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W1, const Eigen::MatrixXcd& Z) {
    require(W1.rows() == H.cols(), "virtual_channel: W1 rows must equal the transmit array size");
    require(Z.rows() == H.rows(), "virtual_channel: Z rows must equal the receive array size");
    BeamspaceModel out;
    out.W1 = W1;
    out.Z = Z;
    out.H_v = Z.adjoint() * H * W1;
    out.selected_beams.resize(static_cast<std::size_t>(W1.cols()));
    std::iota(out.selected_beams.begin(), out.selected_beams.end(), std::size_t{0});
    return out;
}

BeamSelection select_beams(const Eigen::MatrixXcd& H_v, std::size_t budget) {
    const auto n_vt = static_cast<std::size_t>(H_v.cols());
    require(budget >= 1 && budget <= n_vt, "select_beams: budget must lie in [1, n_vt]");
    std::vector<double> energy(n_vt);
    for (std::size_t j = 0; j < n_vt; ++j) {
        const auto col = H_v.col(static_cast<Eigen::Index>(j));
        energy[j] = simd::norm_sq({col.data(), static_cast<std::size_t>(col.size())});
    }
    std::vector<std::size_t> order(n_vt);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });

    BeamSelection out;
    out.beams.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget));
    std::sort(out.beams.begin(), out.beams.end());
    const double total = std::accumulate(energy.begin(), energy.end(), 0.0);
    double kept = 0.0;
    for (auto j : out.beams) kept += energy[j];
    out.captured_energy = total > 0.0 ? kept / total : 1.0;
    return out;
}

double mimo_se(const Eigen::MatrixXcd& H_eff, double power, double noise) {
    require(noise > 0.0, "mimo_se: noise must be positive");
    require(power >= 0.0, "mimo_se: power must be nonnegative");
    if (H_eff.size() == 0) return 0.0;
    const double snr = power / (noise * static_cast<double>(H_eff.cols()));
    // det(I_r + s H H^H) = det(I_c + s H^H H); factor the smaller one
    Eigen::MatrixXcd gram = H_eff.rows() <= H_eff.cols() ? Eigen::MatrixXcd(H_eff * H_eff.adjoint())
                                                         : Eigen::MatrixXcd(H_eff.adjoint() * H_eff);
    Eigen::MatrixXcd m = snr * gram;
    m.diagonal().array() += 1.0;
    return linalg::log2_det_hpd(m);
}

double selected_se(const Eigen::MatrixXcd& H_v, const std::vector<std::size_t>& beams, double power, double noise) {
    require(!beams.empty(), "selected_se: empty beam set");
    Eigen::MatrixXcd sub(H_v.rows(), static_cast<Eigen::Index>(beams.size()));
    for (std::size_t j = 0; j < beams.size(); ++j) {
        require(beams[j] < static_cast<std::size_t>(H_v.cols()), "selected_se: beam index out of range");
        sub.col(static_cast<Eigen::Index>(j)) = H_v.col(static_cast<Eigen::Index>(beams[j]));
    }
    const double per_beam = power / static_cast<double>(H_v.cols());
    return mimo_se(sub, per_beam * static_cast<double>(beams.size()), noise);
}

} // namespace b5g::beamspace
