#include "b5g/engine.hpp"

#include "b5g/beamspace.hpp"
#include "b5g/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace b5g::engine {

namespace {

beamspace::MultipathChannel random_channel(const BeamspaceParams& p, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(-0.5, 0.5);
    beamspace::MultipathChannel ch;
    ch.n_tx = p.n_tx;
    ch.n_rx = p.n_rx;
    for (std::size_t i = 0; i < p.num_paths; ++i) {
        beamspace::Path path;
        path.gain = complex_normal(rng, 1.0 / static_cast<double>(p.num_paths));
        path.aod = angle(rng);
        path.aoa = angle(rng);
        ch.paths.push_back(path);
    }
    return ch;
}

} // namespace

std::vector<BeamspaceRow> run_beamspace_demo(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& p = cfg.beamspace;
    std::vector<std::size_t> budgets = p.budgets;
    if (budgets.empty())
        for (std::size_t b = 1; b <= p.n_tx; ++b) budgets.push_back(b);

    std::vector<beamspace::MultipathChannel> channels;
    if (!p.paths.empty()) {
        beamspace::MultipathChannel ch;
        ch.n_tx = p.n_tx;
        ch.n_rx = p.n_rx;
        for (const auto& bp : p.paths) ch.paths.push_back({std::polar(bp.gain, bp.phase_rad), bp.aod, bp.aoa});
        channels.push_back(std::move(ch));
    } else {
        for (std::size_t i = 0; i < cfg.layouts; ++i)
            channels.push_back(random_channel(p, derive_seed(cfg.master_seed, {stream::layout, i})));
    }

    const auto W1 = beamspace::dft_codebook(p.n_tx, p.n_tx);
    const auto Z = beamspace::dft_codebook(p.n_rx, p.n_rx);
    std::vector<std::vector<BeamspaceRow>> per_channel(channels.size());
    parallel_for(channels.size(), cfg.workers, [&](std::size_t i) {
        const auto H = channels[i].matrix();
        const auto model = beamspace::virtual_channel(H, W1, Z);
        const double full = beamspace::mimo_se(H, p.power_w, p.noise_w);
        for (auto b : budgets) {
            const auto sel = beamspace::select_beams(model.H_v, b);
            per_channel[i].push_back(
                {b, sel.captured_energy, beamspace::selected_se(model.H_v, sel.beams, p.power_w, p.noise_w), full});
        }
    });

    std::vector<BeamspaceRow> rows(budgets.size());
    for (std::size_t j = 0; j < budgets.size(); ++j) {
        rows[j].budget = budgets[j];
        for (const auto& pc : per_channel) {
            rows[j].captured_energy += pc[j].captured_energy;
            rows[j].se += pc[j].se;
            rows[j].se_full += pc[j].se_full;
        }
        const double n = static_cast<double>(per_channel.size());
        rows[j].captured_energy /= n;
        rows[j].se /= n;
        rows[j].se_full /= n;
    }
    return rows;
}

std::string beamspace_csv(const std::vector<BeamspaceRow>& rows) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "{}\nbudget,captured_energy,se_bps_hz,se_full\n", csv_version_line);
    for (const auto& r : rows)
        fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", r.budget, r.captured_energy, r.se, r.se_full);
    return fmt::to_string(buf);
}

} // namespace b5g::engine
