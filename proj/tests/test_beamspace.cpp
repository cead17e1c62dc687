#include <doctest.h>

#include "b5g/beamspace.hpp"
#include "b5g/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace b5g;
using namespace b5g::beamspace;

namespace {

Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = {g(rng), g(rng)};
    return m;
}

} // namespace

TEST_CASE("array_response: broadside, quarter cycle, norm") {
    const auto a = array_response(5, 0.0);
    for (Eigen::Index m = 0; m < 5; ++m) CHECK(std::abs(a(m) - cd(1.0 / std::sqrt(5.0), 0)) < 1e-15);
    const auto q = array_response(2, 0.25);
    CHECK(std::abs(q(0) - cd(1.0 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(q(1) - cd(0, -1.0 / std::sqrt(2.0))) < 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (std::size_t n : {1u, 2u, 7u, 64u, 255u}) CHECK(std::abs(array_response(n, u(rng)).norm() - 1.0) < 1e-14);
    CHECK_THROWS_AS(array_response(4, 0.51), InvalidArgument);
    CHECK_THROWS_AS(array_response(0, 0.0), InvalidArgument);
}

TEST_CASE("array_response inner products follow the Dirichlet kernel") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    for (int i = 0; i < 20; ++i) {
        const double t = u(rng), d = u(rng);
        const cd ip = array_response(8, t).dot(array_response(8, t + d));
        const double ref = std::abs(std::sin(8 * std::numbers::pi * d) / (8 * std::sin(std::numbers::pi * d)));
        CHECK(std::abs(std::abs(ip) - ref) < 1e-12);
    }
}

TEST_CASE("dft_codebook: scalar, unitary, grid columns") {
    CHECK(std::abs(dft_codebook(1, 1)(0, 0) - cd(1.0)) < 1e-15);
    const auto W = dft_codebook(4, 4);
    CHECK((W.adjoint() * W - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-12);
    for (std::size_t n : {4u, 7u, 16u}) {
        const auto C = dft_codebook(n, n);
        for (std::size_t m = 0; m < n; ++m)
            CHECK((C.col(static_cast<Eigen::Index>(m)) - array_response(n, grid_angle(m, n))).norm() < 1e-12);
    }
    CHECK(grid_angle(0, 4) == 0.0);
    CHECK(grid_angle(2, 4) == -0.5);
    CHECK(grid_angle(3, 4) == -0.25);
    CHECK(dft_codebook(8, 3).cols() == 3);
    CHECK_THROWS_AS(dft_codebook(4, 5), InvalidArgument);
    CHECK_THROWS_AS(dft_codebook(4, 0), InvalidArgument);
}

TEST_CASE("virtual_channel: identity, on-grid sparsity, unitary invariance") {
    std::mt19937_64 rng(3);
    const auto H = random_matrix(rng, 4, 6);
    CHECK(virtual_channel(H, Eigen::MatrixXcd::Identity(6, 6), Eigen::MatrixXcd::Identity(4, 4)).H_v == H);
    CHECK_THROWS_AS(virtual_channel(H, Eigen::MatrixXcd::Identity(5, 5), Eigen::MatrixXcd::Identity(4, 4)),
                    InvalidArgument);

    const std::size_t nt = 16, nr = 8, m = 5, k = 3;
    MultipathChannel ch{{{cd(1.0), grid_angle(m, nt), grid_angle(k, nr)}}, nt, nr};
    const auto v = virtual_channel(ch.matrix(), dft_codebook(nt, nt), dft_codebook(nr, nr));
    const double total = v.H_v.squaredNorm();
    Eigen::Index r, c;
    const double peak = v.H_v.cwiseAbs2().maxCoeff(&r, &c);
    CHECK(r == static_cast<Eigen::Index>(k));
    CHECK(c == static_cast<Eigen::Index>(m));
    CHECK(peak >= 0.99 * total);
    CHECK(std::abs(v.H_v(r, c)) == doctest::Approx(std::sqrt(double(nt * nr))).epsilon(1e-12));

    const auto Hr = random_matrix(rng, 8, 16);
    const auto vr = virtual_channel(Hr, dft_codebook(16, 16), dft_codebook(8, 8));
    CHECK(std::abs(vr.H_v.norm() - Hr.norm()) <= 1e-10 * Hr.norm());
    CHECK(mimo_se(vr.H_v, 2.0, 0.1) == doctest::Approx(mimo_se(Hr, 2.0, 0.1)).epsilon(1e-9));
}

TEST_CASE("P on-grid paths give exactly P significant entries") {
    const std::size_t nt = 32, nr = 16;
    MultipathChannel ch{{{cd(1.0), grid_angle(1, nt), grid_angle(2, nr)},
                         {cd(0.0, 0.7), grid_angle(10, nt), grid_angle(9, nr)},
                         {cd(-0.5, 0.2), grid_angle(25, nt), grid_angle(14, nr)}},
                        nt,
                        nr};
    const auto v = virtual_channel(ch.matrix(), dft_codebook(nt, nt), dft_codebook(nr, nr));
    const Eigen::MatrixXd e = v.H_v.cwiseAbs2();
    CHECK((e.array() > 0.01 * e.maxCoeff()).count() == 3);
}

TEST_CASE("select_beams") {
    const std::size_t nt = 64, nr = 16;
    MultipathChannel one{{{cd(1.0), grid_angle(7, nt), grid_angle(3, nr)}}, nt, nr};
    const auto v1 = virtual_channel(one.matrix(), dft_codebook(nt, nt), dft_codebook(nr, nr));
    const auto s1 = select_beams(v1.H_v, 1);
    CHECK(s1.beams == std::vector<std::size_t>{7});
    CHECK(s1.captured_energy >= 0.99);
    const auto all = select_beams(v1.H_v, nt);
    CHECK(all.beams.size() == nt);
    CHECK(all.captured_energy == doctest::Approx(1.0));

    // well-separated, off-grid
    MultipathChannel three{{{cd(1.0), -0.31, 0.2}, {cd(0.8, 0.3), 0.05, -0.1}, {cd(0.0, -0.9), 0.37, 0.41}}, nt, nr};
    const auto v3 = virtual_channel(three.matrix(), dft_codebook(nt, nt), dft_codebook(nr, nr));
    // off-grid leakage spreads each path over neighbours; on-grid paths do not
    MultipathChannel three_on{{{cd(1.0), grid_angle(44, nt), 0.25},
                               {cd(0.8, 0.3), grid_angle(3, nt), -0.125},
                               {cd(0.0, -0.9), grid_angle(24, nt), 0.375}},
                              nt,
                              nr};
    const auto v3o = virtual_channel(three_on.matrix(), dft_codebook(nt, nt), dft_codebook(nr, nr));
    CHECK(select_beams(v3o.H_v, 3).captured_energy >= 0.9);
    double prev = 0.0;
    const double full = mimo_se(v3.H_v, 1.0, 0.01);
    for (std::size_t b = 1; b <= nt; ++b) {
        const auto s = select_beams(v3.H_v, b);
        CHECK(s.captured_energy >= prev - 1e-15);
        prev = s.captured_energy;
        CHECK(selected_se(v3.H_v, s.beams, 1.0, 0.01) <= full + 1e-9);
        CHECK(std::is_sorted(s.beams.begin(), s.beams.end()));
    }
    CHECK(selected_se(v3.H_v, select_beams(v3.H_v, nt).beams, 1.0, 0.01) == doctest::Approx(full).epsilon(1e-12));
    CHECK_THROWS_AS(select_beams(v3.H_v, 0), InvalidArgument);
    CHECK_THROWS_AS(select_beams(v3.H_v, nt + 1), InvalidArgument);
}

TEST_CASE("select_beams breaks ties toward lower indices") {
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Ones(2, 4);
    CHECK(select_beams(h, 2).beams == std::vector<std::size_t>{0, 1});
}

TEST_CASE("mimo_se closed forms") {
    CHECK(mimo_se(Eigen::MatrixXcd::Zero(3, 2), 1.0, 1.0) == 0.0);
    CHECK(mimo_se(Eigen::MatrixXcd::Ones(1, 1), 1.0, 1.0) == doctest::Approx(1.0));
    // power / (noise * 2) = 1.5 per stream
    CHECK(mimo_se(Eigen::MatrixXcd::Identity(2, 2), 3.0, 1.0) == doctest::Approx(2.0 * std::log2(2.5)));
    CHECK_THROWS_AS(mimo_se(Eigen::MatrixXcd::Ones(1, 1), 1.0, 0.0), InvalidArgument);
}
