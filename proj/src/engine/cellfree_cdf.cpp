#include "b5g/engine.hpp"

#include "b5g/cellfree.hpp"
#include "b5g/channel.hpp"
#include "b5g/error.hpp"
#include "b5g/power_control.hpp"
#include "b5g/rng.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace b5g::engine {

namespace {

SchemeOutcome outcome(const cellfree::SinrEstimate& est, const Eigen::VectorXd& powers, double prelog) {
    SchemeOutcome o;
    o.se = cellfree::spectral_efficiency(cellfree::assemble_ul_sinr(est.total, powers), prelog);
    for (const auto& b : est.batches)
        o.batch_se.push_back(cellfree::spectral_efficiency(cellfree::assemble_ul_sinr(b, powers), prelog));
    return o;
}

} // namespace

LayoutOutcome evaluate_cellfree_layout(const CellfreeParams& p, std::size_t trials, std::uint64_t master_seed,
                                       std::size_t layout_id) {
    using namespace cellfree;
    require(trials >= 1, "evaluate_cellfree_layout: need at least one trial");
    const std::uint64_t seed = derive_seed(master_seed, {stream::layout, layout_id});
    const auto layout = channel::generate_layout(p.num_aps, p.num_ues, p.side_m, derive_seed(seed, {stream::layout}),
                                                 p.pathloss.wrap_around);
    const auto lsf = channel::compute_large_scale(layout, p.pathloss, derive_seed(seed, {stream::shadowing}));

    const double noise = p.noise_w();
    channel::TrialSetup setup;
    setup.lsf = lsf;
    setup.antennas = p.antennas;
    setup.pilots = channel::round_robin_pilots(p.num_ues, p.tau_p);
    setup.pilot_power = p.ue_power_w;
    setup.noise_power = noise;
    const auto raw = channel::make_trial_generator(setup, seed);

    // Every scheme sees the same realizations.
    std::vector<channel::Realization> cache;
    cache.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) cache.push_back(raw(t));
    const TrialGenerator gen = [&cache](std::size_t t) { return cache[t]; };

    const Eigen::VectorXd powers = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.num_ues), p.ue_power_w);
    const std::size_t batches = std::min(p.batches, trials);
    const auto clusters = select_clusters(lsf, p.cluster_size, p.max_ues_per_ap);

    auto prepare = [&](Combiner method, bool optimal, const Eigen::VectorXd& pw) {
        CombiningScheme s;
        s.method = method;
        s.normalization = resolve_normalization(gen, s, clusters, pw, noise, trials);
        if (optimal) {
            const auto stats = collect_lsfd_statistics(gen, s, clusters, pw, noise, trials);
            s.weights = optimal_lsfd_weights(stats, noise).weights;
        }
        return s;
    };

    LayoutOutcome out;
    const auto mr = prepare(Combiner::MR, p.mr_weights == MrWeights::Optimal, powers);
    out.schemes[0] = outcome(estimate_ul_sinr(gen, mr, clusters, powers, noise, trials, batches), powers, p.prelog);

    const auto lmmse = prepare(Combiner::LMMSE, true, powers);
    const auto est = estimate_ul_sinr(gen, lmmse, clusters, powers, noise, trials, batches);
    out.schemes[1] = outcome(est, powers, p.prelog);

    const auto sc = smallcell_baseline(gen, lsf, powers, noise, trials, p.prelog, batches);
    out.schemes[2] = outcome(sc.estimate, powers, p.prelog);

    // Combiners and weights are frozen at the powers they were designed for.
    power::MaxMinOptions opts;
    opts.tol = p.maxmin_tol;
    SinrEstimate frozen = est;
    power::SinrAffineModel model = power::build_affine_model(frozen.total);
    power::MaxMinResult mm = power::maxmin_power_control(model, p.ue_power_w, opts);
    for (std::size_t it = 1; it < p.maxmin_outer_iterations; ++it) {
        const auto redesigned = prepare(Combiner::LMMSE, true, mm.allocation.p);
        frozen = estimate_ul_sinr(gen, redesigned, clusters, mm.allocation.p, noise, trials, batches);
        model = power::build_affine_model(frozen.total);
        mm = power::maxmin_power_control(model, p.ue_power_w, opts);
    }
    out.schemes[3] = outcome(frozen, mm.allocation.p, p.prelog);

    auto& d = out.maxmin;
    d.powers = mm.allocation.p;
    d.sinr = model.sinr(mm.allocation.p);
    d.gamma = mm.gamma;
    d.full_power_min_se = out.schemes[1].se.minCoeff();
    d.maxmin_min_se = out.schemes[3].se.minCoeff();
    double lo = INFINITY, hi = 0.0;
    for (Eigen::Index k = 0; k < d.sinr.size(); ++k) {
        if (d.powers(k) >= p.ue_power_w * (1.0 - 1e-9)) continue;
        lo = std::min(lo, d.sinr(k));
        hi = std::max(hi, d.sinr(k));
    }
    d.sinr_spread = hi > 0.0 ? (hi - lo) / lo : 0.0;
    return out;
}

CellfreeRun run_cellfree_cdf(const ExperimentConfig& cfg) {
    cfg.validate();
    CellfreeRun run;
    run.layouts.resize(cfg.layouts);
    parallel_for(cfg.layouts, cfg.workers, [&](std::size_t i) {
        run.layouts[i] = evaluate_cellfree_layout(cfg.cellfree, cfg.trials, cfg.master_seed, i);
    });
    for (std::size_t s = 0; s < cellfree_schemes.size(); ++s) {
        std::vector<double> all;
        for (const auto& l : run.layouts) all.insert(all.end(), l.schemes[s].se.begin(), l.schemes[s].se.end());
        run.cdf[s] = compute_cdf(std::move(all));
    }
    return run;
}

std::string cellfree_csv(const CellfreeRun& run) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "{}\nlayout_id,scheme,ue_id,se_bps_hz\n", csv_version_line);
    for (std::size_t l = 0; l < run.layouts.size(); ++l)
        for (std::size_t s = 0; s < cellfree_schemes.size(); ++s) {
            const auto& se = run.layouts[l].schemes[s].se;
            for (Eigen::Index k = 0; k < se.size(); ++k)
                fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", l, cellfree_schemes[s], k, se(k));
        }
    return fmt::to_string(buf);
}

} // namespace b5g::engine
