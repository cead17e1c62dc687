#include "b5g/engine.hpp"

#include "b5g/irs.hpp"
#include "b5g/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace b5g::engine {

namespace {

double to_db(double x) { return 10.0 * std::log10(x); }

bool oracle_enabled(const IrsParams& p) {
    return p.elements <= p.oracle_max_elements &&
           std::pow(static_cast<double>(p.oracle_levels), static_cast<double>(p.elements)) <= 1e8;
}

} // namespace

IrsRun run_irs_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& p = cfg.irs;
    IrsRun run;
    run.distances = p.distances();
    const bool oracle = oracle_enabled(p);
    std::vector<std::string> schemes = {"alternating"};
    if (oracle) schemes.emplace_back("grid-oracle");
    schemes.emplace_back("no-irs");

    // The same fading seeds are reused at every distance.
    std::vector<std::uint64_t> seeds(cfg.layouts);
    for (std::size_t s = 0; s < cfg.layouts; ++s) seeds[s] = derive_seed(cfg.master_seed, {stream::irs_fading, s});

    std::vector<std::vector<IrsPoint>> per_d(run.distances.size());
    parallel_for(run.distances.size(), cfg.workers, [&](std::size_t i) {
        const double d = run.distances[i];
        std::vector<double> db(schemes.size(), 0.0);
        std::vector<std::size_t> iters(schemes.size(), 0);
        for (auto seed : seeds) {
            const auto sc = irs::build_sweep_scenario(d, p.elements, seed);
            auto alt = irs::alternating_optimize(sc, p.tol, p.max_iters);
            if (p.phase_bits > 0) {
                alt.theta = irs::quantize_phases(alt.theta, p.phase_bits);
                alt.w = irs::mrt(irs::composite_channel(sc, alt.theta), sc.p_max);
                alt.snr = irs::snr(sc, alt.w, alt.theta);
            }
            std::size_t j = 0;
            db[j] += to_db(alt.snr);
            iters[j] = std::max(iters[j], alt.iterations);
            ++j;
            if (oracle) {
                const auto g = irs::grid_oracle(sc, p.oracle_levels);
                db[j] += to_db(g.snr);
                iters[j] = std::max(iters[j], g.iterations);
                ++j;
            }
            db[j] += to_db(irs::no_irs_baseline(sc));
        }
        for (std::size_t j = 0; j < schemes.size(); ++j)
            per_d[i].push_back({d, schemes[j], db[j] / static_cast<double>(seeds.size()), iters[j]});
    });
    for (auto& v : per_d) run.rows.insert(run.rows.end(), v.begin(), v.end());
    return run;
}

std::string irs_csv(const IrsRun& run) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "{}\nd_m,scheme,snr_db,iters\n", csv_version_line);
    for (const auto& r : run.rows)
        fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", r.d, r.scheme, r.snr_db, r.iters);
    return fmt::to_string(buf);
}

} // namespace b5g::engine
