#include "b5g/engine.hpp"

#include "b5g/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace b5g::engine {

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    if (!node.IsMap()) throw InvalidArgument("config: '" + where + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw InvalidArgument("config: unknown key '" + where + key + "'");
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    const auto v = node[key];
    if (!v) return;
    try {
        out = v.as<T>();
    } catch (const YAML::Exception&) {
        throw InvalidArgument("config: bad value for '" + where + key + "'");
    }
}

void read_count(const YAML::Node& node, const char* key, std::size_t& out, const std::string& where) {
    const auto v = node[key];
    if (!v) return;
    long long x = 0;
    try {
        x = v.as<long long>();
    } catch (const YAML::Exception&) {
        throw InvalidArgument("config: '" + where + key + "' must be an integer");
    }
    if (x < 0) throw InvalidArgument("config: '" + where + key + "' must be nonnegative");
    out = static_cast<std::size_t>(x);
}

void parse_cellfree(const YAML::Node& n, CellfreeParams& p) {
    const std::string w = "cellfree.";
    check_keys(n,
               {"num_aps", "num_ues", "antennas", "side_m", "cluster_size", "max_ues_per_ap", "tau_p", "ue_power_w",
                "noise_dbm", "pathloss", "prelog", "batches", "mr_weights", "maxmin_tol", "maxmin_outer_iterations"},
               w);
    read_count(n, "num_aps", p.num_aps, w);
    read_count(n, "num_ues", p.num_ues, w);
    read_count(n, "antennas", p.antennas, w);
    read(n, "side_m", p.side_m, w);
    read_count(n, "cluster_size", p.cluster_size, w);
    if (n["max_ues_per_ap"] && !n["max_ues_per_ap"].IsNull()) {
        std::size_t cap = 0;
        read_count(n, "max_ues_per_ap", cap, w);
        p.max_ues_per_ap = cap;
    }
    read_count(n, "tau_p", p.tau_p, w);
    read(n, "ue_power_w", p.ue_power_w, w);
    read(n, "noise_dbm", p.noise_dbm, w);
    if (const auto pl = n["pathloss"]) {
        const std::string pw = "cellfree.pathloss.";
        check_keys(pl, {"exponent", "ref_loss_db", "shadowing_db", "d_min_m", "wrap_around"}, pw);
        read(pl, "exponent", p.pathloss.exponent, pw);
        read(pl, "ref_loss_db", p.pathloss.ref_loss_db, pw);
        read(pl, "shadowing_db", p.pathloss.shadowing_db, pw);
        read(pl, "d_min_m", p.pathloss.d_min_m, pw);
        read(pl, "wrap_around", p.pathloss.wrap_around, pw);
    }
    read(n, "prelog", p.prelog, w);
    read_count(n, "batches", p.batches, w);
    read(n, "maxmin_tol", p.maxmin_tol, w);
    read_count(n, "maxmin_outer_iterations", p.maxmin_outer_iterations, w);
    if (n["mr_weights"]) {
        std::string s;
        read(n, "mr_weights", s, w);
        if (s == "unit") p.mr_weights = MrWeights::Unit;
        else if (s == "optimal") p.mr_weights = MrWeights::Optimal;
        else throw InvalidArgument("config: 'cellfree.mr_weights' must be unit or optimal");
    }
}

void parse_irs(const YAML::Node& n, IrsParams& p) {
    const std::string w = "irs.";
    check_keys(n,
               {"d_start", "d_stop", "d_step", "elements", "oracle_levels", "oracle_max_elements", "tol", "max_iters",
                "phase_bits"},
               w);
    read(n, "d_start", p.d_start, w);
    read(n, "d_stop", p.d_stop, w);
    read(n, "d_step", p.d_step, w);
    read_count(n, "elements", p.elements, w);
    read_count(n, "oracle_levels", p.oracle_levels, w);
    read_count(n, "oracle_max_elements", p.oracle_max_elements, w);
    read(n, "tol", p.tol, w);
    read_count(n, "max_iters", p.max_iters, w);
    std::size_t bits = p.phase_bits;
    read_count(n, "phase_bits", bits, w);
    p.phase_bits = static_cast<unsigned>(bits);
}

void parse_beamspace(const YAML::Node& n, BeamspaceParams& p) {
    const std::string w = "beamspace.";
    check_keys(n, {"n_tx", "n_rx", "paths", "num_paths", "power_w", "noise_w", "budgets"}, w);
    read_count(n, "n_tx", p.n_tx, w);
    read_count(n, "n_rx", p.n_rx, w);
    read_count(n, "num_paths", p.num_paths, w);
    read(n, "power_w", p.power_w, w);
    read(n, "noise_w", p.noise_w, w);
    if (const auto b = n["budgets"]) {
        if (!b.IsSequence()) throw InvalidArgument("config: 'beamspace.budgets' must be a list");
        p.budgets.clear();
        for (const auto& x : b) {
            long long v = 0;
            try {
                v = x.as<long long>();
            } catch (const YAML::Exception&) {
                throw InvalidArgument("config: 'beamspace.budgets' entries must be integers");
            }
            if (v < 1) throw InvalidArgument("config: 'beamspace.budgets' entries must be positive");
            p.budgets.push_back(static_cast<std::size_t>(v));
        }
    }
    if (const auto ps = n["paths"]) {
        if (!ps.IsSequence()) throw InvalidArgument("config: 'beamspace.paths' must be a list");
        p.paths.clear();
        for (const auto& e : ps) {
            const std::string pw = "beamspace.paths[].";
            check_keys(e, {"gain", "phase_rad", "aod", "aoa"}, pw);
            BeamPath bp;
            read(e, "gain", bp.gain, pw);
            read(e, "phase_rad", bp.phase_rad, pw);
            read(e, "aod", bp.aod, pw);
            read(e, "aoa", bp.aoa, pw);
            p.paths.push_back(bp);
        }
    }
}

} // namespace

std::string_view scenario_name(Scenario s) {
    switch (s) {
    case Scenario::CellfreeCdf: return "cellfree-cdf";
    case Scenario::IrsSweep: return "irs-sweep";
    case Scenario::BeamspaceDemo: return "beamspace-demo";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    for (auto s : {Scenario::CellfreeCdf, Scenario::IrsSweep, Scenario::BeamspaceDemo})
        if (scenario_name(s) == name) return s;
    return std::nullopt;
}

double CellfreeParams::noise_w() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

std::vector<double> IrsParams::distances() const {
    std::vector<double> d;
    const double span = d_stop - d_start;
    const auto steps = static_cast<std::size_t>(std::floor(span / d_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) d.push_back(d_start + static_cast<double>(i) * d_step);
    return d;
}

void ExperimentConfig::validate() const {
    require(trials >= 1, "config: trials must be >= 1");
    require(layouts >= 1, "config: layouts must be >= 1");
    require(workers >= 1, "config: workers must be >= 1");
    const auto& c = cellfree;
    require(c.num_aps >= 1 && c.num_ues >= 1 && c.antennas >= 1, "config: cellfree sizes must be positive");
    require(c.side_m > 0.0, "config: cellfree.side_m must be positive");
    require(c.cluster_size >= 1 && c.cluster_size <= c.num_aps, "config: cellfree.cluster_size must lie in [1, num_aps]");
    require(!c.max_ues_per_ap || *c.max_ues_per_ap >= 1, "config: cellfree.max_ues_per_ap must be positive");
    require(c.tau_p >= 1, "config: cellfree.tau_p must be positive");
    require(c.ue_power_w > 0.0, "config: cellfree.ue_power_w must be positive");
    require(std::isfinite(c.noise_dbm), "config: cellfree.noise_dbm must be finite");
    require(c.pathloss.exponent > 0.0 && c.pathloss.shadowing_db >= 0.0 && c.pathloss.d_min_m > 0.0,
            "config: bad cellfree pathloss parameters");
    require(c.prelog > 0.0 && c.prelog <= 1.0, "config: cellfree.prelog must lie in (0, 1]");
    require(c.batches >= 1, "config: cellfree.batches must be positive");
    require(c.maxmin_outer_iterations >= 1, "config: cellfree.maxmin_outer_iterations must be positive");
    require(c.maxmin_tol > 0.0 && c.maxmin_tol < 0.1, "config: cellfree.maxmin_tol must lie in (0, 0.1)");
    const auto& i = irs;
    require(i.d_start > 0.0 && i.d_stop >= i.d_start && i.d_step > 0.0, "config: bad irs distance grid");
    require(i.elements >= 1, "config: irs.elements must be positive");
    require(i.oracle_levels >= 1, "config: irs.oracle_levels must be positive");
    require(i.tol > 0.0 && i.tol < 0.1, "config: irs.tol must lie in (0, 0.1)");
    require(i.max_iters >= 1, "config: irs.max_iters must be positive");
    require(i.phase_bits <= 30, "config: irs.phase_bits must be <= 30");
    const auto& b = beamspace;
    require(b.n_tx >= 1 && b.n_rx >= 1, "config: beamspace array sizes must be positive");
    require(b.power_w >= 0.0 && b.noise_w > 0.0, "config: bad beamspace power or noise");
    require(!b.paths.empty() || b.num_paths >= 1, "config: beamspace needs paths or num_paths >= 1");
    for (auto x : b.budgets) require(x >= 1 && x <= b.n_tx, "config: beamspace budgets must lie in [1, n_tx]");
    for (const auto& p : b.paths)
        require(std::abs(p.aod) <= 0.5 && std::abs(p.aoa) <= 0.5, "config: beamspace path angles must lie in [-1/2, 1/2]");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw InvalidArgument(std::string("config: YAML parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    if (root.IsNull()) return cfg;
    check_keys(root,
               {"scenario", "trials", "layouts", "master_seed", "output_dir", "workers", "cellfree", "irs", "beamspace"},
               "");
    if (root["scenario"]) {
        std::string s;
        read(root, "scenario", s, "");
        const auto sc = parse_scenario(s);
        if (!sc) throw InvalidArgument("config: unknown scenario '" + s + "'");
        cfg.scenario = *sc;
        cfg.scenario_declared = true;
    }
    read_count(root, "trials", cfg.trials, "");
    read_count(root, "layouts", cfg.layouts, "");
    read(root, "master_seed", cfg.master_seed, "");
    read(root, "output_dir", cfg.output_dir, "");
    read_count(root, "workers", cfg.workers, "");
    if (root["cellfree"]) parse_cellfree(root["cellfree"], cfg.cellfree);
    if (root["irs"]) parse_irs(root["irs"], cfg.irs);
    if (root["beamspace"]) parse_beamspace(root["beamspace"], cfg.beamspace);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace b5g::engine
