#include "b5g/irs.hpp"

#include "b5g/error.hpp"
#include "b5g/kernels.hpp"
#include "b5g/rng.hpp"

#include <cmath>
#include <numbers>

namespace b5g::irs {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_phase(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

std::span<const simd::cd> as_span(const Eigen::VectorXcd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

void IrsScenario::validate() const {
    require(p_max > 0.0 && std::isfinite(p_max), "IrsScenario: p_max must be positive");
    require(noise > 0.0 && std::isfinite(noise), "IrsScenario: noise must be positive");
    require(h_d.size() >= 1, "IrsScenario: need at least one transmit antenna");
    require(G.rows() == h_r.size() && G.cols() == h_d.size(), "IrsScenario: G must be N x M");
}

IrsScenario build_sweep_scenario(double d, std::size_t n_elements, std::uint64_t seed, const SweepGeometry& geo) {
    require(d > 0.0 && std::isfinite(d), "build_sweep_scenario: d must be positive");
    require(n_elements >= 1, "build_sweep_scenario: need at least one element");
    const auto M = static_cast<Eigen::Index>(geo.tx_antennas);
    const auto N = static_cast<Eigen::Index>(n_elements);
    const double c0 = std::pow(10.0, geo.ref_gain_db / 10.0);

    IrsScenario sc;
    sc.p_max = geo.p_max;
    sc.noise = geo.noise;

    // Both arrays lie on the x axis, so the link is end-fire: unit-modulus
    // entries whose phase advances by pi per element on either side.
    const double d_g = geo.irs_x;
    const double amp_g = std::sqrt(c0 * std::pow(d_g, -geo.los_exponent));
    const double base = -two_pi * d_g / geo.wavelength;
    sc.G.resize(N, M);
    for (Eigen::Index n = 0; n < N; ++n)
        for (Eigen::Index m = 0; m < M; ++m)
            sc.G(n, m) = std::polar(amp_g, base + std::numbers::pi * static_cast<double>(m - n));

    Rng rng(derive_seed(seed, {stream::irs_fading}));
    const double d_direct = std::hypot(d, geo.user_offset);
    const double d_reflect = std::hypot(d - geo.irs_x, geo.user_offset);
    const double beta_d = c0 * std::pow(d_direct, -geo.fading_exponent);
    const double beta_r = c0 * std::pow(d_reflect, -geo.fading_exponent);
    sc.h_d.resize(M);
    for (Eigen::Index m = 0; m < M; ++m) sc.h_d(m) = complex_normal(rng, beta_d);
    sc.h_r.resize(N);
    for (Eigen::Index n = 0; n < N; ++n) sc.h_r(n) = complex_normal(rng, beta_r);
    return sc;
}

Eigen::VectorXcd composite_channel(const IrsScenario& sc, const std::vector<double>& theta) {
    sc.validate();
    require(theta.size() == sc.elements(), "composite_channel: need one phase per element");
    // composite = G^T diag(e^{-j theta}) h_r + h_d, the conjugate transpose of the row form
    Eigen::VectorXcd reflected(sc.G.rows());
    for (Eigen::Index n = 0; n < sc.G.rows(); ++n)
        reflected(n) = std::polar(1.0, -theta[static_cast<std::size_t>(n)]) * sc.h_r(n);
    return sc.G.adjoint() * reflected + sc.h_d;
}

double snr(const IrsScenario& sc, const Eigen::VectorXcd& w, const std::vector<double>& theta) {
    require(w.size() == sc.h_d.size(), "snr: w must have one entry per antenna");
    const Eigen::VectorXcd c = composite_channel(sc, theta);
    return std::norm(simd::cdotc(as_span(c), as_span(w))) / sc.noise;
}

std::vector<double> optimal_phases_given_w(const IrsScenario& sc, const Eigen::VectorXcd& w) {
    sc.validate();
    require(w.size() == sc.h_d.size(), "optimal_phases_given_w: w must have one entry per antenna");
    require(w.squaredNorm() > 0.0, "optimal_phases_given_w: w must be nonzero");
    const simd::cd direct = simd::cdotc(as_span(sc.h_d), as_span(w));
    const double ref = std::abs(direct) > 0.0 ? std::arg(direct) : 0.0;
    const Eigen::VectorXcd gw = sc.G * w;
    std::vector<double> theta(sc.elements());
    for (std::size_t n = 0; n < theta.size(); ++n) {
        const auto i = static_cast<Eigen::Index>(n);
        const simd::cd term = std::conj(sc.h_r(i)) * gw(i);
        theta[n] = wrap_phase(ref - (std::abs(term) > 0.0 ? std::arg(term) : ref));
    }
    return theta;
}

Eigen::VectorXcd mrt(const Eigen::VectorXcd& c, double p_max) {
    const double nrm = c.norm();
    if (!(nrm > 0.0)) return Eigen::VectorXcd::Zero(c.size());
    return (std::sqrt(p_max) / nrm) * c;
}

double no_irs_baseline(const IrsScenario& sc) {
    sc.validate();
    return sc.p_max * sc.h_d.squaredNorm() / sc.noise;
}

IrsSolution alternating_optimize(const IrsScenario& sc, double tol, std::size_t max_iters) {
    sc.validate();
    require(tol > 0.0 && tol < 0.1, "alternating_optimize: tol must lie in (0, 0.1)");
    require(max_iters >= 1, "alternating_optimize: max_iters must be positive");

    IrsSolution out;
    out.theta.assign(sc.elements(), 0.0);
    Eigen::VectorXcd w = mrt(sc.h_d, sc.p_max);
    if (w.squaredNorm() == 0.0) {
        // Strongest direction of the reflected path when there is no direct one.
        const Eigen::MatrixXcd A = sc.G.adjoint() * sc.h_r.conjugate().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(A * A.adjoint());
        const Eigen::Index top = sc.G.cols() - 1;
        if (eig.eigenvalues()(top) > 0.0) w = std::sqrt(sc.p_max) * eig.eigenvectors().col(top);
    }
    if (w.squaredNorm() == 0.0) {
        out.w = w;
        out.diagnostics.emplace_back("all channels are zero; returning zero SNR");
        out.objective_trace.push_back(0.0);
        return out;
    }

    // Starts at the direct-path objective, i.e. the no-IRS baseline under the
    // default initialization.
    double obj = std::norm(simd::cdotc(as_span(sc.h_d), as_span(w))) / sc.noise;
    out.objective_trace.push_back(obj);
    std::vector<double> theta;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        theta = optimal_phases_given_w(sc, w);
        out.objective_trace.push_back(snr(sc, w, theta));
        w = mrt(composite_channel(sc, theta), sc.p_max);
        const double next = snr(sc, w, theta);
        out.objective_trace.push_back(next);
        out.iterations = it;
        const double gain = next - obj;
        obj = next;
        if (gain < tol * obj) break;
    }
    out.w = std::move(w);
    out.theta = std::move(theta);
    out.snr = obj;
    return out;
}

IrsSolution grid_oracle(const IrsScenario& sc, std::size_t levels) {
    sc.validate();
    require(levels >= 1, "grid_oracle: need at least one phase level");
    const std::size_t N = sc.elements();
    const auto M = static_cast<Eigen::Index>(sc.antennas());
    const double count = std::pow(static_cast<double>(levels), static_cast<double>(N));
    if (count > 1e8)
        throw InvalidArgument("grid_oracle: levels^N = " + std::to_string(count) + " exceeds the 1e8 bound");

    std::vector<double> cos_tab(levels), sin_tab(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        const double phi = two_pi * static_cast<double>(k) / static_cast<double>(levels);
        cos_tab[k] = std::cos(phi);
        sin_tab[k] = std::sin(phi);
    }
    // rows[n] = conj(h_r,n) G_n as a column, so composite^H = h_d^H + sum_n e^{j theta_n} rows[n]^T.
    // Work with the conjugate: s = h_d + sum_n e^{-j theta_n} conj(rows[n]).
    std::vector<Eigen::VectorXcd> refl(N);
    for (std::size_t n = 0; n < N; ++n)
        refl[n] = sc.h_r(static_cast<Eigen::Index>(n)) * sc.G.row(static_cast<Eigen::Index>(n)).adjoint();

    // ||s + e^{-j phi} r||^2 = ||s||^2 + ||r||^2 + 2 Re(e^{j phi} r^H s)
    const std::size_t last = N - 1;
    const double r_last = refl[last].squaredNorm();
    std::vector<Eigen::VectorXcd> partial(N, Eigen::VectorXcd(M));
    std::vector<std::size_t> idx(N, 0), best_idx(N, 0);
    double best = -1.0;

    partial[0] = sc.h_d;
    std::size_t depth = 0;
    // Depth-first walk over the first N-1 elements; the last is maximized in closed form.
    while (true) {
        if (depth == last) {
            const simd::cd z = simd::cdotc(as_span(refl[last]), as_span(partial[last]));
            const auto rm = simd::max_rotated_real(z, cos_tab, sin_tab);
            const double val = partial[last].squaredNorm() + r_last + 2.0 * rm.value;
            if (val > best) {
                best = val;
                best_idx = idx;
                best_idx[last] = rm.index;
            }
            if (depth == 0) break;
            --depth;
            ++idx[depth];
        } else if (idx[depth] < levels) {
            const std::size_t k = idx[depth];
            partial[depth + 1] = partial[depth] + simd::cd(cos_tab[k], -sin_tab[k]) * refl[depth];
            ++depth;
            idx[depth] = 0;
        } else {
            idx[depth] = 0;
            if (depth == 0) break;
            --depth;
            ++idx[depth];
        }
    }

    IrsSolution out;
    out.theta.resize(N);
    for (std::size_t n = 0; n < N; ++n) out.theta[n] = two_pi * static_cast<double>(best_idx[n]) / static_cast<double>(levels);
    out.w = mrt(composite_channel(sc, out.theta), sc.p_max);
    out.snr = snr(sc, out.w, out.theta);
    out.objective_trace.push_back(out.snr);
    out.iterations = 1;
    return out;
}

std::vector<double> quantize_phases(const std::vector<double>& theta, unsigned bits) {
    require(bits >= 1 && bits <= 30, "quantize_phases: bits must lie in [1, 30]");
    const double levels = std::ldexp(1.0, static_cast<int>(bits));
    const double step = two_pi / levels;
    std::vector<double> out(theta.size());
    for (std::size_t n = 0; n < theta.size(); ++n) out[n] = wrap_phase(std::round(theta[n] / step) * step);
    return out;
}

} // namespace b5g::irs
