#include "b5g/cellfree.hpp"

#include "b5g/error.hpp"
#include "b5g/linalg.hpp"

#include <cmath>
#include <limits>

namespace b5g::cellfree {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd closed_form_normalization(const EstimateSet& est, const ClusterAssignment& clusters) {
    const auto K = static_cast<Eigen::Index>(est.num_ues());
    const auto L = static_cast<Eigen::Index>(est.num_aps());
    Eigen::MatrixXd norm = Eigen::MatrixXd::Zero(K, L);
    for (Eigen::Index k = 0; k < K; ++k)
        for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)]) {
            const auto li = static_cast<Eigen::Index>(l);
            norm(k, li) = est.closed_form ? static_cast<double>(est.antennas) * est.est_variance(k, li) : kNaN;
        }
    return norm;
}

Eigen::MatrixXcd unit_weights(const ClusterAssignment& clusters) {
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(clusters.num_ues()),
                                                static_cast<Eigen::Index>(clusters.num_aps));
    for (std::size_t k = 0; k < clusters.num_ues(); ++k)
        for (auto l : clusters.serving_sets[k]) w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = 1.0;
    return w;
}

void check_shapes(const EstimateSet& est, const ClusterAssignment& clusters) {
    require(clusters.num_ues() == est.num_ues() && clusters.num_aps == est.num_aps(),
            "combining: cluster assignment does not match the estimates");
}

// Zero the blocks of UEs that AP l does not serve.
void mask_to_clusters(Eigen::MatrixXcd& v, const ClusterAssignment& clusters, std::size_t antennas) {
    const auto N = static_cast<Eigen::Index>(antennas);
    for (std::size_t k = 0; k < clusters.num_ues(); ++k)
        for (std::size_t l = 0; l < clusters.num_aps; ++l)
            if (!clusters.serves(k, l))
                v.col(static_cast<Eigen::Index>(k)).segment(static_cast<Eigen::Index>(l) * N, N).setZero();
}

// Per AP l: (sum_i weight_il x_il x_il^H + noise I)^-1 x_kl for every k.
// x is (L*N) x K; weight is K x L.
Eigen::MatrixXcd regularized_directions(const Eigen::MatrixXcd& x, const Eigen::MatrixXd& weight, double noise_power,
                                        std::size_t antennas) {
    require(std::isfinite(noise_power) && noise_power > 0.0, "combining: noise power must be positive and finite");
    require(weight.allFinite() && (weight.array() >= 0.0).all(), "combining: powers must be finite and nonnegative");
    require(linalg::all_finite(x), "combining: non-finite channel estimates");

    const auto N = static_cast<Eigen::Index>(antennas);
    const Eigen::Index K = x.cols();
    const Eigen::Index L = x.rows() / N;
    Eigen::MatrixXcd out(x.rows(), K);
    if (N == 1) {
        for (Eigen::Index l = 0; l < L; ++l) {
            double a = noise_power;
            for (Eigen::Index i = 0; i < K; ++i) a += weight(i, l) * std::norm(x(l, i));
            out.row(l) = x.row(l) / a;
        }
        return out;
    }
    for (Eigen::Index l = 0; l < L; ++l) {
        const Eigen::MatrixXcd xl = x.middleRows(l * N, N); // N x K
        Eigen::MatrixXcd a = noise_power * Eigen::MatrixXcd::Identity(N, N);
        for (Eigen::Index i = 0; i < K; ++i) a.noalias() += weight(i, l) * xl.col(i) * xl.col(i).adjoint();
        out.middleRows(l * N, N) = linalg::hermitian_solve(a, xl);
    }
    return out;
}

} // namespace

CombiningSet mr_combining(const EstimateSet& est, const ClusterAssignment& clusters) {
    check_shapes(est, clusters);
    CombiningSet out;
    out.antennas = est.antennas;
    out.v_bar = est.h_hat;
    mask_to_clusters(out.v_bar, clusters, est.antennas);
    out.lsfd_weights = unit_weights(clusters);
    out.normalization = closed_form_normalization(est, clusters);
    return out;
}

CombiningSet lmmse_combining(const EstimateSet& est, const ClusterAssignment& clusters, const Eigen::VectorXd& powers,
                             double noise_power) {
    check_shapes(est, clusters);
    require(static_cast<std::size_t>(powers.size()) == est.num_ues(), "lmmse_combining: need one power per UE");
    const Eigen::MatrixXd weight = powers.replicate(1, static_cast<Eigen::Index>(est.num_aps()));
    CombiningSet out;
    out.antennas = est.antennas;
    out.v_bar = regularized_directions(est.h_hat, weight, noise_power, est.antennas);
    mask_to_clusters(out.v_bar, clusters, est.antennas);
    out.lsfd_weights = unit_weights(clusters);
    out.normalization = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(est.num_ues()),
                                                  static_cast<Eigen::Index>(est.num_aps()), kNaN);
    return out;
}

PrecodingSet mr_precoding(const EstimateSet& est, const ClusterAssignment& clusters) {
    check_shapes(est, clusters);
    PrecodingSet out;
    out.antennas = est.antennas;
    out.w_bar = est.h_hat.conjugate();
    mask_to_clusters(out.w_bar, clusters, est.antennas);
    out.normalization = closed_form_normalization(est, clusters);
    return out;
}

PrecodingSet slnr_precoding(const EstimateSet& est, const ClusterAssignment& clusters, const Eigen::MatrixXd& rho,
                            double noise_power) {
    check_shapes(est, clusters);
    require(rho.rows() == static_cast<Eigen::Index>(est.num_ues()) && rho.cols() == static_cast<Eigen::Index>(est.num_aps()),
            "slnr_precoding: rho must be K x L");
    PrecodingSet out;
    out.antennas = est.antennas;
    out.rho = rho;
    out.w_bar = regularized_directions(est.h_hat.conjugate(), rho, noise_power, est.antennas);
    mask_to_clusters(out.w_bar, clusters, est.antennas);
    out.normalization = Eigen::MatrixXd::Constant(rho.rows(), rho.cols(), kNaN);
    return out;
}

CombiningSet combine(const EstimateSet& est, const ClusterAssignment& clusters, Combiner method,
                     const Eigen::VectorXd& powers, double noise_power) {
    return method == Combiner::MR ? mr_combining(est, clusters) : lmmse_combining(est, clusters, powers, noise_power);
}

PrecodingSet precode(const EstimateSet& est, const ClusterAssignment& clusters, Precoder method,
                     const Eigen::MatrixXd& rho, double noise_power) {
    return method == Precoder::MR ? mr_precoding(est, clusters) : slnr_precoding(est, clusters, rho, noise_power);
}

Eigen::MatrixXd allocate_dl_power(const LargeScaleFading& lsf, const ClusterAssignment& clusters, double p_ap,
                                  DlPowerScheme scheme) {
    require(p_ap > 0.0 && std::isfinite(p_ap), "allocate_dl_power: AP power must be positive");
    require(clusters.num_ues() == lsf.num_ues() && clusters.num_aps == lsf.num_aps(),
            "allocate_dl_power: cluster assignment does not match beta");
    const auto K = static_cast<Eigen::Index>(lsf.num_ues());
    const auto L = static_cast<Eigen::Index>(lsf.num_aps());
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(K, L);
    for (Eigen::Index l = 0; l < L; ++l) {
        const auto served = clusters.served_by(static_cast<std::size_t>(l));
        if (served.empty()) continue;
        if (scheme == DlPowerScheme::Equal) {
            for (auto k : served) rho(static_cast<Eigen::Index>(k), l) = p_ap / static_cast<double>(served.size());
            continue;
        }
        double total = 0.0;
        for (auto k : served) total += std::sqrt(lsf.beta(static_cast<Eigen::Index>(k), l));
        for (auto k : served) {
            const auto ki = static_cast<Eigen::Index>(k);
            rho(ki, l) = p_ap * std::sqrt(lsf.beta(ki, l)) / total;
        }
    }
    return rho;
}

} // namespace b5g::cellfree
