#pragma once

#include "b5g/channel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace b5g::cellfree {

using channel::EstimateSet;
using channel::LargeScaleFading;
using channel::TrialGenerator;

// User-centric AP clusters M_k.
struct ClusterAssignment {
    std::vector<std::vector<std::size_t>> serving_sets; // ascending AP indices
    std::optional<std::size_t> max_ues_per_ap;
    std::size_t num_aps = 0;

    std::size_t num_ues() const { return serving_sets.size(); }
    bool serves(std::size_t k, std::size_t l) const;
    // UEs served by AP l, ascending.
    std::vector<std::size_t> served_by(std::size_t l) const;
};

// Each UE picks its cluster_size strongest APs (lowest index wins ties).
// With a cap, an over-subscribed AP keeps its strongest UEs; a UE left
// without any AP takes its strongest AP that still has room, or else
// displaces the weakest multi-served UE at its strongest AP.
ClusterAssignment select_clusters(const LargeScaleFading& lsf, std::size_t cluster_size,
                                  std::optional<std::size_t> max_ues_per_ap = std::nullopt);

ClusterAssignment all_serve(std::size_t num_ues, std::size_t num_aps);

// --- per-realization combining / precoding ---------------------------------

enum class Combiner { MR, LMMSE };
enum class Precoder { MR, SLNR };

// Combining for one realization. v_bar shares the (L*N) x K layout of the
// channel matrices and is zero for l outside M_k. normalization holds
// E{||v_bar_kl||^2} when it is available in closed form, NaN otherwise.
struct CombiningSet {
    Eigen::MatrixXcd v_bar;
    Eigen::MatrixXcd lsfd_weights; // K x L
    Eigen::MatrixXd normalization; // K x L
    std::size_t antennas = 1;
};

CombiningSet mr_combining(const EstimateSet& est, const ClusterAssignment& clusters);

// v_bar_kl = (sum_i p_i h_hat_il h_hat_il^H + noise I)^-1 h_hat_kl, with the
// sum over all K UEs seen by AP l.
CombiningSet lmmse_combining(const EstimateSet& est, const ClusterAssignment& clusters,
                             const Eigen::VectorXd& powers, double noise_power);

struct PrecodingSet {
    Eigen::MatrixXcd w_bar;
    Eigen::MatrixXd rho;           // K x L, empty until allocated
    Eigen::MatrixXd normalization; // K x L
    std::size_t antennas = 1;
};

PrecodingSet mr_precoding(const EstimateSet& est, const ClusterAssignment& clusters);

// w_bar_kl = (sum_i rho_il conj(h_hat_il) h_hat_il^T + noise I)^-1 conj(h_hat_kl)
PrecodingSet slnr_precoding(const EstimateSet& est, const ClusterAssignment& clusters, const Eigen::MatrixXd& rho,
                            double noise_power);

enum class DlPowerScheme { Equal, PropBetaSqrt };

// Splits P_ap over the UEs each AP serves; APs serving nobody allocate zero.
Eigen::MatrixXd allocate_dl_power(const LargeScaleFading& lsf, const ClusterAssignment& clusters, double p_ap,
                                  DlPowerScheme scheme);

// --- Monte-Carlo statistics -------------------------------------------------

// Expectations of the use-and-then-forget bound. Uplink values are per unit
// transmit power:
//   SINR_k(p) = p_k S_k / (sum_i p_i I_ki - p_k T_k + N_k).
// Downlink values already include the powers rho, and N_k = noise:
//   SINR_k = S_k / (sum_i I_ki - T_k + N_k).
struct SinrCoefficients {
    Eigen::VectorXd signal_gain;   // S_k = |E{e_kk}|^2
    Eigen::MatrixXd interference;  // I_ki = E{|e_ki|^2}
    Eigen::VectorXd self_term;     // T_k = |E{e_kk}|^2
    Eigen::VectorXd noise_factor;  // N_k
    std::size_t trials = 0;
};

struct SinrEstimate {
    SinrCoefficients total;
    std::vector<SinrCoefficients> batches; // contiguous trial batches
};

// Statistical description of a combining scheme. Empty weights mean unit
// weights; empty normalization means "resolve it" (closed form for MR when
// the estimates allow it, sample mean over the trials otherwise).
struct CombiningScheme {
    Combiner method = Combiner::MR;
    Eigen::MatrixXcd weights;
    Eigen::MatrixXd normalization;
};

struct PrecodingScheme {
    Precoder method = Precoder::MR;
    Eigen::MatrixXd rho;
    Eigen::MatrixXd normalization;
};

CombiningSet combine(const EstimateSet& est, const ClusterAssignment& clusters, Combiner method,
                     const Eigen::VectorXd& powers, double noise_power);
PrecodingSet precode(const EstimateSet& est, const ClusterAssignment& clusters, Precoder method,
                     const Eigen::MatrixXd& rho, double noise_power);

// E{||v_bar_kl||^2} per (k, l in M_k); zero outside clusters.
Eigen::MatrixXd resolve_normalization(const TrialGenerator& gen, const CombiningScheme& scheme,
                                      const ClusterAssignment& clusters, const Eigen::VectorXd& powers,
                                      double noise_power, std::size_t trials);
Eigen::MatrixXd resolve_normalization(const TrialGenerator& gen, const PrecodingScheme& scheme,
                                      const ClusterAssignment& clusters, double noise_power, std::size_t trials);

// Combining is recomputed from each trial's estimates (L-MMSE at the given
// powers); expectations are sample means over trials 0..trials-1.
SinrEstimate estimate_ul_sinr(const TrialGenerator& gen, const CombiningScheme& scheme,
                              const ClusterAssignment& clusters, const Eigen::VectorXd& powers, double noise_power,
                              std::size_t trials, std::size_t batches = 1);

SinrEstimate estimate_dl_sinr(const TrialGenerator& gen, const PrecodingScheme& scheme,
                              const ClusterAssignment& clusters, double noise_power, std::size_t trials,
                              std::size_t batches = 1);

// Throws InternalError if an assembled denominator is not positive.
Eigen::VectorXd assemble_ul_sinr(const SinrCoefficients& c, const Eigen::VectorXd& powers);
Eigen::VectorXd assemble_dl_sinr(const SinrCoefficients& c);

Eigen::VectorXd spectral_efficiency(const Eigen::VectorXd& sinr, double prelog = 1.0);

// --- large-scale fading decoding -------------------------------------------

// Per-UE statistics of g_ki[l] = v_bar_kl^H h_il / sqrt(E{||v_bar_kl||^2}),
// indexed over the UE's serving set.
struct LsfdStatistics {
    std::vector<Eigen::MatrixXcd> gram;         // sum_i p_i E{g_ki g_ki^H}
    std::vector<Eigen::VectorXcd> mean_signal;  // E{g_kk}
    std::vector<Eigen::VectorXd> combiner_power; // E{||v_bar_kl||^2} / normalization
    Eigen::VectorXd powers;
    ClusterAssignment clusters;
    std::size_t trials = 0;
};

LsfdStatistics collect_lsfd_statistics(const TrialGenerator& gen, const CombiningScheme& scheme,
                                       const ClusterAssignment& clusters, const Eigen::VectorXd& powers,
                                       double noise_power, std::size_t trials);

struct LsfdWeights {
    Eigen::MatrixXcd weights;      // K x L, unit norm per UE, zero outside M_k
    std::vector<bool> regularized; // per UE
};

// a_k maximizes the uplink SINR as a generalized Rayleigh quotient:
//   a_k ∝ (sum_i p_i E{g_ki g_ki^H} - p_k E{g_kk}E{g_kk}^H + noise D_k)^-1 E{g_kk}.
LsfdWeights optimal_lsfd_weights(const LsfdStatistics& stats, double noise_power);

// --- small-cell baseline ----------------------------------------------------

struct SmallCellResult {
    ClusterAssignment clusters;
    SinrEstimate estimate;
    Eigen::VectorXd se;
};

// Each UE is served by its strongest AP only, with MR combining.
SmallCellResult smallcell_baseline(const TrialGenerator& gen, const LargeScaleFading& lsf,
                                   const Eigen::VectorXd& powers, double noise_power, std::size_t trials,
                                   double prelog = 1.0, std::size_t batches = 1);

} // namespace b5g::cellfree
