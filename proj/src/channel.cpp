#include "b5g/channel.hpp"

#include "b5g/error.hpp"
#include "b5g/rng.hpp"

#include <cmath>
#include <numbers>

namespace b5g::channel {

NetworkLayout generate_layout(std::size_t num_aps, std::size_t num_ues, double side, std::uint64_t seed,
                              bool wrap_around) {
    require(num_aps >= 1 && num_ues >= 1, "generate_layout: need at least one AP and one UE");
    require(side > 0.0 && std::isfinite(side), "generate_layout: side length must be positive");

    Rng rng(derive_seed(seed, {stream::layout}));
    std::uniform_real_distribution<double> u(0.0, side);
    NetworkLayout out;
    out.side_length = side;
    out.wrap_around = wrap_around;
    out.ap_positions.resize(num_aps);
    out.ue_positions.resize(num_ues);
    for (auto& p : out.ap_positions) {
        p.x = u(rng);
        p.y = u(rng);
    }
    for (auto& p : out.ue_positions) {
        p.x = u(rng);
        p.y = u(rng);
    }
    return out;
}

namespace {

double axis_gap(double a, double b, double side, bool wrap) {
    double d = std::abs(a - b);
    if (wrap) d = std::min(d, side - d);
    return d;
}

double distance_impl(const NetworkLayout& layout, std::size_t k, std::size_t l, bool wrap) {
    const Point& u = layout.ue_positions.at(k);
    const Point& a = layout.ap_positions.at(l);
    return std::hypot(axis_gap(u.x, a.x, layout.side_length, wrap), axis_gap(u.y, a.y, layout.side_length, wrap));
}

} // namespace

double distance(const NetworkLayout& layout, std::size_t k, std::size_t l) {
    return distance_impl(layout, k, l, layout.wrap_around);
}

LargeScaleFading compute_large_scale(const NetworkLayout& layout, const PathlossConfig& model, std::uint64_t seed) {
    require(layout.num_aps() >= 1 && layout.num_ues() >= 1, "compute_large_scale: empty layout");
    require(model.exponent > 0.0, "compute_large_scale: pathloss exponent must be positive");
    require(model.d_min_m > 0.0, "compute_large_scale: d_min must be positive");
    require(model.shadowing_db >= 0.0, "compute_large_scale: shadowing deviation must be nonnegative");

    const auto K = static_cast<Eigen::Index>(layout.num_ues());
    const auto L = static_cast<Eigen::Index>(layout.num_aps());
    const bool wrap = layout.wrap_around || model.wrap_around;

    LargeScaleFading out;
    out.beta.resize(K, L);
    if (model.shadowing_db > 0.0) {
        Rng rng(derive_seed(seed, {stream::shadowing}));
        std::normal_distribution<double> n(0.0, model.shadowing_db);
        out.shadowing_db.resize(K, L);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index l = 0; l < L; ++l) out.shadowing_db(k, l) = n(rng);
    }
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index l = 0; l < L; ++l) {
            const double d = std::max(distance_impl(layout, static_cast<std::size_t>(k), static_cast<std::size_t>(l), wrap),
                                      model.d_min_m);
            double gain_db = -model.ref_loss_db - 10.0 * model.exponent * std::log10(d);
            if (out.shadowing_db.size() > 0) gain_db += out.shadowing_db(k, l);
            out.beta(k, l) = std::pow(10.0, gain_db / 10.0);
        }
    }
    return out;
}

ChannelSet draw_channels(const LargeScaleFading& lsf, std::size_t antennas, const FadingModel& model,
                         std::uint64_t seed) {
    require(antennas >= 1, "draw_channels: need at least one antenna per AP");
    require(model.kind != FadingModel::Kind::RicianLoS || model.kappa >= 0.0, "draw_channels: negative Rician factor");

    const std::size_t K = lsf.num_ues();
    const std::size_t L = lsf.num_aps();
    ChannelSet out;
    out.antennas = antennas;
    out.model = model;
    out.beta = lsf.beta;
    out.h.resize(static_cast<Eigen::Index>(L * antennas), static_cast<Eigen::Index>(K));

    Rng rng(derive_seed(seed, {stream::fading}));
    if (model.kind == FadingModel::Kind::RayleighIID) {
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l) {
                const double b = lsf.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
                for (std::size_t n = 0; n < antennas; ++n)
                    out.h(static_cast<Eigen::Index>(l * antennas + n), static_cast<Eigen::Index>(k)) = complex_normal(rng, b);
            }
        return out;
    }

    // LoS part: equal-magnitude entries with a per-(k,l) phase fixed by the
    // layout-level seed; scattered part: CN(0, beta/(1+kappa)).
    Rng phase_rng(derive_seed(model.los_phase_seed, {stream::los_phase}));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double kappa = model.kappa;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double b = lsf.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            const double los_amp = std::sqrt(kappa / (1.0 + kappa) * b);
            const double nlos_var = b / (1.0 + kappa);
            const cd los = std::polar(los_amp, phase(phase_rng));
            for (std::size_t n = 0; n < antennas; ++n)
                out.h(static_cast<Eigen::Index>(l * antennas + n), static_cast<Eigen::Index>(k)) =
                    los + complex_normal(rng, nlos_var);
        }
    return out;
}

PilotAssignment round_robin_pilots(std::size_t num_ues, std::size_t tau_p) {
    require(tau_p >= 1, "round_robin_pilots: pilot length must be positive");
    PilotAssignment out;
    out.tau_p = tau_p;
    out.pilot_index.resize(num_ues);
    for (std::size_t k = 0; k < num_ues; ++k) out.pilot_index[k] = k % tau_p;
    return out;
}

EstimateSet estimate_channels(const ChannelSet& channels, const PilotAssignment& pilots, double pilot_power,
                              double noise_power, std::uint64_t seed, CsiMode mode) {
    const std::size_t K = channels.num_ues();
    const std::size_t L = channels.num_aps();
    const std::size_t N = channels.antennas;
    const auto Ki = static_cast<Eigen::Index>(K);
    const auto Li = static_cast<Eigen::Index>(L);

    EstimateSet out;
    out.antennas = N;
    if (mode == CsiMode::Perfect) {
        out.h_hat = channels.h;
        out.est_variance = channels.beta;
        out.error_variance = Eigen::MatrixXd::Zero(Ki, Li);
        out.closed_form = channels.model.kind == FadingModel::Kind::RayleighIID;
        return out;
    }

    if (channels.model.kind != FadingModel::Kind::RayleighIID)
        throw UnsupportedModel("estimate_channels: MMSE estimator supports only i.i.d. Rayleigh fading");
    require(pilots.tau_p >= 1 && pilots.pilot_index.size() == K, "estimate_channels: pilot assignment does not match K");
    for (auto t : pilots.pilot_index) require(t < pilots.tau_p, "estimate_channels: pilot index out of range");
    require(pilot_power >= 0.0 && noise_power > 0.0, "estimate_channels: invalid pilot or noise power");

    const double tp = static_cast<double>(pilots.tau_p) * pilot_power;
    const double sqrt_tp = std::sqrt(tp);

    // Despread observation per (pilot, AP): sqrt(tau_p p_p) sum_{i on pilot} h_il + n.
    Rng rng(derive_seed(seed, {stream::pilot_noise}));
    Eigen::MatrixXcd y(static_cast<Eigen::Index>(L * N), static_cast<Eigen::Index>(pilots.tau_p));
    for (Eigen::Index t = 0; t < y.cols(); ++t)
        for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, t) = complex_normal(rng, noise_power);
    for (std::size_t k = 0; k < K; ++k)
        y.col(static_cast<Eigen::Index>(pilots.pilot_index[k])) += sqrt_tp * channels.h.col(static_cast<Eigen::Index>(k));

    // sum of beta over co-pilot UEs, per (pilot, AP)
    Eigen::MatrixXd copilot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pilots.tau_p), Li);
    for (std::size_t k = 0; k < K; ++k)
        copilot.row(static_cast<Eigen::Index>(pilots.pilot_index[k])) += channels.beta.row(static_cast<Eigen::Index>(k));

    out.h_hat.resize(channels.h.rows(), channels.h.cols());
    out.est_variance.resize(Ki, Li);
    out.error_variance.resize(Ki, Li);
    out.closed_form = true;
    for (std::size_t k = 0; k < K; ++k) {
        const auto t = static_cast<Eigen::Index>(pilots.pilot_index[k]);
        for (std::size_t l = 0; l < L; ++l) {
            const auto ki = static_cast<Eigen::Index>(k);
            const auto li = static_cast<Eigen::Index>(l);
            const double b = channels.beta(ki, li);
            const double denom = tp * copilot(t, li) + noise_power;
            const double c = sqrt_tp * b / denom;
            const double est = tp * b * b / denom;
            out.est_variance(ki, li) = est;
            out.error_variance(ki, li) = b - est;
            const auto r0 = static_cast<Eigen::Index>(l * N);
            out.h_hat.col(ki).segment(r0, static_cast<Eigen::Index>(N)) = c * y.col(t).segment(r0, static_cast<Eigen::Index>(N));
        }
    }
    return out;
}

TrialGenerator make_trial_generator(TrialSetup setup, std::uint64_t seed) {
    return [setup = std::move(setup), seed](std::size_t trial) {
        Realization r;
        r.channels = draw_channels(setup.lsf, setup.antennas, setup.model, derive_seed(seed, {stream::fading, trial}));
        r.estimates = estimate_channels(r.channels, setup.pilots, setup.pilot_power, setup.noise_power,
                                        derive_seed(seed, {stream::pilot_noise, trial}), setup.csi);
        return r;
    };
}

} // namespace b5g::channel
