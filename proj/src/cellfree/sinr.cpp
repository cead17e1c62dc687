#include "b5g/cellfree.hpp"

#include "b5g/error.hpp"
#include "b5g/kernels.hpp"
#include "b5g/linalg.hpp"

#include <cmath>
#include <span>

namespace b5g::cellfree {
namespace {

using cd = std::complex<double>;

struct Accumulator {
    Eigen::VectorXcd signal;      // sum of e_kk
    Eigen::MatrixXd interference; // sum of |e_ki|^2
    Eigen::VectorXd noise;        // sum of the per-trial noise factor
    std::size_t trials = 0;

    explicit Accumulator(Eigen::Index K)
        : signal(Eigen::VectorXcd::Zero(K)), interference(Eigen::MatrixXd::Zero(K, K)), noise(Eigen::VectorXd::Zero(K)) {}

    void add(const Eigen::MatrixXcd& e, const Eigen::VectorXd& noise_factor) {
        signal += e.diagonal();
        interference += e.cwiseAbs2();
        noise += noise_factor;
        ++trials;
    }

    void merge(const Accumulator& o) {
        signal += o.signal;
        interference += o.interference;
        noise += o.noise;
        trials += o.trials;
    }

    SinrCoefficients finish() const {
        SinrCoefficients c;
        const double n = static_cast<double>(trials);
        c.trials = trials;
        c.signal_gain = (signal / n).cwiseAbs2();
        c.self_term = c.signal_gain;
        c.interference = interference / n;
        c.noise_factor = noise / n;
        return c;
    }
};

std::size_t batch_of(std::size_t t, std::size_t trials, std::size_t batches) { return t * batches / trials; }

SinrEstimate finish_batches(const std::vector<Accumulator>& acc) {
    SinrEstimate out;
    Accumulator total(acc.front().signal.size());
    for (const auto& a : acc) {
        total.merge(a);
        out.batches.push_back(a.finish());
    }
    out.total = total.finish();
    return out;
}

void check_run(std::size_t trials, std::size_t batches) {
    require(trials >= 1, "sinr estimation: need at least one trial");
    require(batches >= 1 && batches <= trials, "sinr estimation: batches must lie in [1, trials]");
}

// Per-block scale factors s_kl applied to v_bar: v_kl = s_kl * v_bar_kl.
Eigen::MatrixXcd scale_blocks(const Eigen::MatrixXcd& v_bar, const Eigen::MatrixXcd& scale, std::size_t antennas) {
    const auto N = static_cast<Eigen::Index>(antennas);
    Eigen::MatrixXcd v(v_bar.rows(), v_bar.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k)
        for (Eigen::Index l = 0; l < scale.cols(); ++l)
            v.col(k).segment(l * N, N) = scale(k, l) * v_bar.col(k).segment(l * N, N);
    return v;
}

double inv_sqrt_or_zero(double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; }

Eigen::MatrixXcd default_weights(const ClusterAssignment& clusters) {
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(clusters.num_ues()),
                                                static_cast<Eigen::Index>(clusters.num_aps));
    for (std::size_t k = 0; k < clusters.num_ues(); ++k)
        for (auto l : clusters.serving_sets[k]) w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = 1.0;
    return w;
}

template <typename SetFn>
Eigen::MatrixXd sample_normalization(const TrialGenerator& gen, const ClusterAssignment& clusters, std::size_t trials,
                                     SetFn&& directions) {
    require(trials >= 1, "normalization: need at least one trial");
    Eigen::MatrixXd sum;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto r = gen(t);
        const Eigen::MatrixXcd v = directions(r.estimates);
        const auto N = static_cast<Eigen::Index>(r.estimates.antennas);
        if (sum.size() == 0) sum = Eigen::MatrixXd::Zero(v.cols(), v.rows() / N);
        for (Eigen::Index k = 0; k < v.cols(); ++k)
            for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)])
                sum(k, static_cast<Eigen::Index>(l)) +=
                    v.col(k).segment(static_cast<Eigen::Index>(l) * N, N).squaredNorm();
    }
    return sum / static_cast<double>(trials);
}

} // namespace

Eigen::MatrixXd resolve_normalization(const TrialGenerator& gen, const CombiningScheme& scheme,
                                      const ClusterAssignment& clusters, const Eigen::VectorXd& powers,
                                      double noise_power, std::size_t trials) {
    if (scheme.normalization.size() > 0) return scheme.normalization;
    if (scheme.method == Combiner::MR) {
        const auto r = gen(0);
        if (r.estimates.closed_form) return mr_combining(r.estimates, clusters).normalization;
    }
    return sample_normalization(gen, clusters, trials, [&](const EstimateSet& est) {
        return combine(est, clusters, scheme.method, powers, noise_power).v_bar;
    });
}

Eigen::MatrixXd resolve_normalization(const TrialGenerator& gen, const PrecodingScheme& scheme,
                                      const ClusterAssignment& clusters, double noise_power, std::size_t trials) {
    if (scheme.normalization.size() > 0) return scheme.normalization;
    if (scheme.method == Precoder::MR) {
        const auto r = gen(0);
        if (r.estimates.closed_form) return mr_precoding(r.estimates, clusters).normalization;
    }
    return sample_normalization(gen, clusters, trials, [&](const EstimateSet& est) {
        return precode(est, clusters, scheme.method, scheme.rho, noise_power).w_bar;
    });
}

SinrEstimate estimate_ul_sinr(const TrialGenerator& gen, const CombiningScheme& scheme,
                              const ClusterAssignment& clusters, const Eigen::VectorXd& powers, double noise_power,
                              std::size_t trials, std::size_t batches) {
    check_run(trials, batches);
    require(static_cast<std::size_t>(powers.size()) == clusters.num_ues(), "estimate_ul_sinr: need one power per UE");
    require((powers.array() >= 0.0).all(), "estimate_ul_sinr: powers must be nonnegative");
    require(noise_power > 0.0, "estimate_ul_sinr: noise power must be positive");

    const Eigen::MatrixXd norm = resolve_normalization(gen, scheme, clusters, powers, noise_power, trials);
    const Eigen::MatrixXcd weights = scheme.weights.size() > 0 ? scheme.weights : default_weights(clusters);
    const auto K = static_cast<Eigen::Index>(clusters.num_ues());
    const auto L = static_cast<Eigen::Index>(clusters.num_aps);
    require(weights.rows() == K && weights.cols() == L, "estimate_ul_sinr: weights must be K x L");

    // v_kl = a_kl v_bar_kl / sqrt(E{||v_bar_kl||^2}); zero outside M_k
    Eigen::MatrixXcd scale = Eigen::MatrixXcd::Zero(K, L);
    for (Eigen::Index k = 0; k < K; ++k)
        for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)]) {
            const auto li = static_cast<Eigen::Index>(l);
            scale(k, li) = weights(k, li) * inv_sqrt_or_zero(norm(k, li));
        }

    std::vector<Accumulator> acc(batches, Accumulator(K));
    for (std::size_t t = 0; t < trials; ++t) {
        const auto r = gen(t);
        const CombiningSet cs = combine(r.estimates, clusters, scheme.method, powers, noise_power);
        const Eigen::MatrixXcd v = scale_blocks(cs.v_bar, scale, cs.antennas);
        const Eigen::MatrixXcd e = v.adjoint() * r.channels.h; // e(k,i) = sum_l v_kl^H h_il
        const Eigen::VectorXd nf = noise_power * v.colwise().squaredNorm().transpose();
        acc[batch_of(t, trials, batches)].add(e, nf);
    }
    return finish_batches(acc);
}

SinrEstimate estimate_dl_sinr(const TrialGenerator& gen, const PrecodingScheme& scheme,
                              const ClusterAssignment& clusters, double noise_power, std::size_t trials,
                              std::size_t batches) {
    check_run(trials, batches);
    require(noise_power > 0.0, "estimate_dl_sinr: noise power must be positive");
    const auto K = static_cast<Eigen::Index>(clusters.num_ues());
    const auto L = static_cast<Eigen::Index>(clusters.num_aps);
    require(scheme.rho.rows() == K && scheme.rho.cols() == L, "estimate_dl_sinr: rho must be K x L");
    require((scheme.rho.array() >= 0.0).all(), "estimate_dl_sinr: rho must be nonnegative");

    const Eigen::MatrixXd norm = resolve_normalization(gen, scheme, clusters, noise_power, trials);
    Eigen::MatrixXcd scale = Eigen::MatrixXcd::Zero(K, L);
    for (Eigen::Index k = 0; k < K; ++k)
        for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)]) {
            const auto li = static_cast<Eigen::Index>(l);
            scale(k, li) = std::sqrt(scheme.rho(k, li)) * inv_sqrt_or_zero(norm(k, li));
        }

    const Eigen::VectorXd nf = Eigen::VectorXd::Constant(K, noise_power);
    std::vector<Accumulator> acc(batches, Accumulator(K));
    for (std::size_t t = 0; t < trials; ++t) {
        const auto r = gen(t);
        const PrecodingSet ps = precode(r.estimates, clusters, scheme.method, scheme.rho, noise_power);
        const Eigen::MatrixXcd w = scale_blocks(ps.w_bar, scale, ps.antennas);
        // e(k,i) = sum_{l in M_i} h_kl^T w_il
        const Eigen::MatrixXcd e = r.channels.h.transpose() * w;
        acc[batch_of(t, trials, batches)].add(e, nf);
    }
    return finish_batches(acc);
}

Eigen::VectorXd assemble_ul_sinr(const SinrCoefficients& c, const Eigen::VectorXd& powers) {
    const Eigen::Index K = c.signal_gain.size();
    require(powers.size() == K, "assemble_ul_sinr: need one power per UE");
    Eigen::VectorXd sinr(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double denom = c.interference.row(k).dot(powers) - powers(k) * c.self_term(k) + c.noise_factor(k);
        if (!(denom > 0.0)) {
            if (powers(k) == 0.0 && c.noise_factor(k) == 0.0) {
                sinr(k) = 0.0;
                continue;
            }
            throw InternalError("assemble_ul_sinr: non-positive SINR denominator");
        }
        sinr(k) = powers(k) * c.signal_gain(k) / denom;
    }
    return sinr;
}

Eigen::VectorXd assemble_dl_sinr(const SinrCoefficients& c) {
    const Eigen::Index K = c.signal_gain.size();
    Eigen::VectorXd sinr(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double denom = c.interference.row(k).sum() - c.self_term(k) + c.noise_factor(k);
        if (!(denom > 0.0)) throw InternalError("assemble_dl_sinr: non-positive SINR denominator");
        sinr(k) = c.signal_gain(k) / denom;
    }
    return sinr;
}

Eigen::VectorXd spectral_efficiency(const Eigen::VectorXd& sinr, double prelog) {
    return prelog * sinr.array().log1p() / std::log(2.0);
}

LsfdStatistics collect_lsfd_statistics(const TrialGenerator& gen, const CombiningScheme& scheme,
                                       const ClusterAssignment& clusters, const Eigen::VectorXd& powers,
                                       double noise_power, std::size_t trials) {
    require(trials >= 1, "collect_lsfd_statistics: need at least one trial");
    require(static_cast<std::size_t>(powers.size()) == clusters.num_ues(),
            "collect_lsfd_statistics: need one power per UE");
    const Eigen::MatrixXd norm = resolve_normalization(gen, scheme, clusters, powers, noise_power, trials);
    const auto K = static_cast<Eigen::Index>(clusters.num_ues());
    const auto L = static_cast<Eigen::Index>(clusters.num_aps);

    Eigen::MatrixXd inv_scale = Eigen::MatrixXd::Zero(K, L);
    for (Eigen::Index k = 0; k < K; ++k)
        for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)])
            inv_scale(k, static_cast<Eigen::Index>(l)) = inv_sqrt_or_zero(norm(k, static_cast<Eigen::Index>(l)));

    const Eigen::VectorXd sqrt_p = powers.cwiseSqrt();
    Eigen::Index N = 0;
    std::vector<Eigen::MatrixXcd> acc; // per k, (L*N) x (L*N)
    Eigen::MatrixXcd mean_acc;         // (L*N) x K, running sum of conj(q) .* h_k
    Eigen::MatrixXd power_acc;         // K x L

    for (std::size_t t = 0; t < trials; ++t) {
        const auto r = gen(t);
        if (t == 0) {
            N = static_cast<Eigen::Index>(r.estimates.antennas);
            acc.assign(static_cast<std::size_t>(K), Eigen::MatrixXcd::Zero(L * N, L * N));
            mean_acc = Eigen::MatrixXcd::Zero(L * N, K);
            power_acc = Eigen::MatrixXd::Zero(K, L);
        }
        const CombiningSet cs = combine(r.estimates, clusters, scheme.method, powers, noise_power);
        const Eigen::MatrixXcd q = scale_blocks(cs.v_bar, inv_scale.cast<cd>(), cs.antennas);
        const Eigen::MatrixXcd hs = r.channels.h * sqrt_p.asDiagonal();
        // R = sum_i p_i h_i h_i^H over the stacked AP dimension
        const Eigen::MatrixXcd R = hs * hs.adjoint();

        for (Eigen::Index k = 0; k < K; ++k) {
            const Eigen::VectorXcd qk = q.col(k);
            const Eigen::VectorXcd qk_conj = qk.conjugate();
            std::span<const cd> y(qk_conj.data(), static_cast<std::size_t>(qk_conj.size()));
            auto& a = acc[static_cast<std::size_t>(k)];
            for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)]) {
                for (Eigen::Index n = 0; n < N; ++n) {
                    const Eigen::Index c = static_cast<Eigen::Index>(l) * N + n;
                    // a(r, c) += conj(q_r) R(r, c) q_c
                    simd::scaled_product_acc(std::span<cd>(a.col(c).data(), static_cast<std::size_t>(L * N)), qk(c),
                                             std::span<const cd>(R.col(c).data(), static_cast<std::size_t>(L * N)), y);
                }
            }
            mean_acc.col(k) += qk_conj.cwiseProduct(r.channels.h.col(k));
            for (auto l : clusters.serving_sets[static_cast<std::size_t>(k)])
                power_acc(k, static_cast<Eigen::Index>(l)) +=
                    qk.segment(static_cast<Eigen::Index>(l) * N, N).squaredNorm();
        }
    }

    const double inv_t = 1.0 / static_cast<double>(trials);
    LsfdStatistics out;
    out.clusters = clusters;
    out.powers = powers;
    out.trials = trials;
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& m = clusters.serving_sets[static_cast<std::size_t>(k)];
        const auto sz = static_cast<Eigen::Index>(m.size());
        Eigen::MatrixXcd g(sz, sz);
        Eigen::VectorXcd b(sz);
        Eigen::VectorXd pw(sz);
        const auto& a = acc[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < sz; ++i) {
            const auto li = static_cast<Eigen::Index>(m[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < sz; ++j) {
                const auto lj = static_cast<Eigen::Index>(m[static_cast<std::size_t>(j)]);
                g(i, j) = a.block(li * N, lj * N, N, N).sum() * inv_t;
            }
            b(i) = mean_acc.col(k).segment(li * N, N).sum() * inv_t;
            pw(i) = power_acc(k, li) * inv_t;
        }
        out.gram.push_back(std::move(g));
        out.mean_signal.push_back(std::move(b));
        out.combiner_power.push_back(std::move(pw));
    }
    return out;
}

LsfdWeights optimal_lsfd_weights(const LsfdStatistics& stats, double noise_power) {
    require(noise_power > 0.0, "optimal_lsfd_weights: noise power must be positive");
    const std::size_t K = stats.gram.size();
    require(stats.mean_signal.size() == K && stats.combiner_power.size() == K &&
                static_cast<std::size_t>(stats.powers.size()) == K,
            "optimal_lsfd_weights: inconsistent statistics");

    require(stats.clusters.num_ues() == K, "optimal_lsfd_weights: statistics lack the serving sets");
    LsfdWeights out;
    out.regularized.assign(K, false);
    out.weights = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(stats.clusters.num_aps));
    for (std::size_t k = 0; k < K; ++k) {
        const auto& serving = stats.clusters.serving_sets[k];
        const auto& b = stats.mean_signal[k];
        const Eigen::Index m = b.size();
        require(static_cast<std::size_t>(m) == serving.size(), "optimal_lsfd_weights: statistics do not match M_k");
        Eigen::VectorXcd w;
        if (m == 1) {
            w = Eigen::VectorXcd::Ones(1);
        } else {
            const double pk = stats.powers(static_cast<Eigen::Index>(k));
            Eigen::MatrixXcd a = stats.gram[k] - pk * b * b.adjoint();
            a.diagonal() += (noise_power * stats.combiner_power[k]).cast<cd>();
            a = (0.5 * (a + a.adjoint())).eval();
            linalg::SolveReport rep;
            w = linalg::hermitian_solve(a, b, &rep);
            out.regularized[k] = rep.regularized;
            const double nrm = w.norm();
            if (nrm > 0.0) w /= nrm;
            else w = Eigen::VectorXcd::Ones(m) / std::sqrt(static_cast<double>(m));
        }
        for (Eigen::Index i = 0; i < m; ++i)
            out.weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(serving[static_cast<std::size_t>(i)])) = w(i);
    }
    return out;
}

SmallCellResult smallcell_baseline(const TrialGenerator& gen, const LargeScaleFading& lsf,
                                   const Eigen::VectorXd& powers, double noise_power, std::size_t trials,
                                   double prelog, std::size_t batches) {
    SmallCellResult out;
    out.clusters = select_clusters(lsf, 1);
    CombiningScheme scheme;
    scheme.method = Combiner::MR;
    out.estimate = estimate_ul_sinr(gen, scheme, out.clusters, powers, noise_power, trials, batches);
    out.se = spectral_efficiency(assemble_ul_sinr(out.estimate.total, powers), prelog);
    return out;
}

} // namespace b5g::cellfree
