#include "b5g/engine.hpp"

#include "b5g/error.hpp"

#include <json.hpp>

#include <fstream>

namespace b5g::engine {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

} // namespace

std::filesystem::path run_and_write(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json summary;
    summary["scenario"] = scenario_name(cfg.scenario);
    summary["master_seed"] = cfg.master_seed;
    summary["trials"] = cfg.trials;
    summary["layouts"] = cfg.layouts;

    std::filesystem::path csv;
    switch (cfg.scenario) {
    case Scenario::CellfreeCdf: {
        const auto run = run_cellfree_cdf(cfg);
        csv = dir / "cellfree_cdf.csv";
        write_file(csv, cellfree_csv(run));
        for (std::size_t s = 0; s < cellfree_schemes.size(); ++s) {
            const auto& c = run.cdf[s];
            summary["schemes"][std::string(cellfree_schemes[s])] = {
                {"n_samples", c.n_samples()}, {"q05", c.quantile(0.05)}, {"median", c.quantile(0.5)}};
        }
        summary["q05_ratio_lmmse_opt_over_smallcell"] = run.cdf[1].quantile(0.05) / run.cdf[2].quantile(0.05);
        break;
    }
    case Scenario::IrsSweep: {
        const auto run = run_irs_sweep(cfg);
        csv = dir / "irs_sweep.csv";
        write_file(csv, irs_csv(run));
        double best = -INFINITY, best_d = 0.0;
        for (const auto& r : run.rows)
            if (r.scheme == "alternating" && r.snr_db > best) {
                best = r.snr_db;
                best_d = r.d;
            }
        summary["alternating_argmax_d_m"] = best_d;
        summary["alternating_max_snr_db"] = best;
        break;
    }
    case Scenario::BeamspaceDemo: {
        const auto rows = run_beamspace_demo(cfg);
        csv = dir / "beamspace_demo.csv";
        write_file(csv, beamspace_csv(rows));
        summary["budgets"] = rows.size();
        break;
    }
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    return csv;
}

} // namespace b5g::engine
