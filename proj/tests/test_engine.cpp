#include <doctest.h>

#include "b5g/engine.hpp"
#include "b5g/error.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace b5g;
using namespace b5g::engine;

namespace {

std::size_t count_rows(const std::string& csv) {
    std::size_t n = 0;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++n;
    return n - 1; // header
}

ExperimentConfig small_cellfree() {
    auto cfg = parse_config(R"(
scenario: cellfree-cdf
trials: 20
layouts: 3
master_seed: 5
cellfree:
  num_aps: 16
  num_ues: 6
  cluster_size: 16
  tau_p: 3
  batches: 4
)");
    return cfg;
}

} // namespace

TEST_CASE("quantile convention") {
    CHECK(compute_cdf({5, 4, 3, 2, 1}).quantile(0.05) == doctest::Approx(1.2));
    CHECK(compute_cdf({1, 3}).quantile(0.5) == doctest::Approx(2.0));
    const auto c = compute_cdf({7, 7, 7, 7});
    for (double q : {0.0, 0.05, 0.5, 1.0}) CHECK(c.quantile(q) == 7.0);
    const auto r = compute_cdf({3, 1, 4, 1, 5, 9, 2, 6});
    double prev = -INFINITY;
    for (double q = 0.0; q <= 1.0; q += 0.01) {
        CHECK(r.quantile(q) >= prev);
        prev = r.quantile(q);
    }
    CHECK(r.n_samples() == 8);
    CHECK(r.quantile(0.0) == 1.0);
    CHECK(r.quantile(1.0) == 9.0);
    CHECK_THROWS_AS(compute_cdf({}), InvalidArgument);
    CHECK_THROWS_AS(compute_cdf({1.0, NAN}), InvalidArgument);
}

TEST_CASE("config parsing is strict") {
    const auto d = parse_config("");
    CHECK(d.trials == 200);
    CHECK(d.layouts == 50);
    CHECK(d.cellfree.num_aps == 100);
    CHECK(d.cellfree.num_ues == 40);

    const auto cfg = parse_config("scenario: irs-sweep\ntrials: 7\nirs:\n  elements: 8\n  d_step: 5\n");
    CHECK(cfg.scenario == Scenario::IrsSweep);
    CHECK(cfg.scenario_declared);
    CHECK(cfg.trials == 7);
    CHECK(cfg.irs.elements == 8);

    CHECK_THROWS_AS(parse_config("trails: 3\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("cellfree:\n  num_ap: 3\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("cellfree:\n  pathloss:\n    alpha: 3\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("trials: 0\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("layouts: -1\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("trials: many\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("scenario: fig9\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("cellfree:\n  cluster_size: 101\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("trials: [1\n"), InvalidArgument);
    CHECK_THROWS_AS(load_config("/nonexistent/b5g.yaml"), InvalidArgument);
}

TEST_CASE("irs distance grid") {
    IrsParams p;
    const auto d = p.distances();
    CHECK(d.size() == 31);
    CHECK(d.front() == 20.0);
    CHECK(d.back() == doctest::Approx(80.0));
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    try {
        parallel_for(50, 3, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}

TEST_CASE("cellfree run: rows, determinism across workers") {
    auto cfg = small_cellfree();
    const auto a = run_cellfree_cdf(cfg);
    const auto csv = cellfree_csv(a);
    CHECK(count_rows(csv) == 3 * 4 * 6);
    CHECK(csv.rfind(std::string(csv_version_line), 0) == 0);
    cfg.workers = 8;
    CHECK(cellfree_csv(run_cellfree_cdf(cfg)) == csv);
    cfg.master_seed = 6;
    CHECK(cellfree_csv(run_cellfree_cdf(cfg)) != csv);

    for (const auto& l : a.layouts) {
        CHECK(l.schemes[0].batch_se.size() == 4);
        CHECK(l.maxmin.maxmin_min_se >= l.maxmin.full_power_min_se - 1e-3);
        CHECK((l.maxmin.powers.array() <= 0.1 * (1 + 1e-12)).all());
    }
}

TEST_CASE("degenerate cellfree network") {
    auto cfg = parse_config("trials: 1\nlayouts: 1\ncellfree:\n  num_aps: 1\n  num_ues: 1\n  cluster_size: 1\n");
    const auto run = run_cellfree_cdf(cfg);
    CHECK(count_rows(cellfree_csv(run)) == 4);
    const double ref = run.layouts[0].schemes[0].se(0);
    for (const auto& s : run.layouts[0].schemes) CHECK(s.se(0) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("irs sweep: rows, dominance, determinism") {
    auto cfg = parse_config(R"(
scenario: irs-sweep
layouts: 4
irs:
  d_start: 40
  d_stop: 60
  d_step: 10
  elements: 3
  oracle_levels: 16
)");
    const auto run = run_irs_sweep(cfg);
    CHECK(run.distances.size() == 3);
    CHECK(run.rows.size() == 3 * 3);
    const auto csv = irs_csv(run);
    CHECK(count_rows(csv) == 9);
    for (std::size_t i = 0; i < run.distances.size(); ++i) {
        const auto& alt = run.rows[3 * i];
        const auto& none = run.rows[3 * i + 2];
        CHECK(alt.scheme == "alternating");
        CHECK(none.scheme == "no-irs");
        CHECK(alt.snr_db >= none.snr_db);
    }
    cfg.workers = 8;
    CHECK(irs_csv(run_irs_sweep(cfg)) == csv);

    cfg.irs.elements = 100;
    const auto big = run_irs_sweep(cfg);
    CHECK(big.rows.size() == 3 * 2); // oracle skipped
}

TEST_CASE("beamspace demo") {
    auto cfg = parse_config(R"(
scenario: beamspace-demo
layouts: 3
beamspace:
  n_tx: 16
  n_rx: 8
  budgets: [1, 2, 4, 16]
)");
    const auto rows = run_beamspace_demo(cfg);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].captured_energy >= rows[i - 1].captured_energy);
    for (const auto& r : rows) CHECK(r.se <= r.se_full + 1e-9);
    CHECK(rows.back().captured_energy == doctest::Approx(1.0));
    CHECK(rows.back().se == doctest::Approx(rows.back().se_full));
    CHECK(count_rows(beamspace_csv(rows)) == 4);

    cfg.beamspace.paths = {{1.0, 0.0, 0.25, -0.125}};
    cfg.beamspace.budgets = {1};
    const auto one = run_beamspace_demo(cfg);
    CHECK(one[0].captured_energy >= 0.99);
}

TEST_CASE("run_and_write creates CSV and summary") {
    auto cfg = small_cellfree();
    cfg.layouts = 1;
    cfg.output_dir = (std::filesystem::temp_directory_path() / "b5g_engine_test").string();
    std::filesystem::remove_all(cfg.output_dir);
    const auto path = run_and_write(cfg);
    CHECK(std::filesystem::exists(path));
    CHECK(path.filename() == "cellfree_cdf.csv");
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.output_dir) / "summary.json"));
    std::filesystem::remove_all(cfg.output_dir);
}
