#include "b5g/power_control.hpp"

#include "b5g/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace b5g::power {

Eigen::VectorXd SinrAffineModel::sinr(const Eigen::VectorXd& p) const {
    require(p.size() == a.size(), "SinrAffineModel::sinr: need one power per UE");
    Eigen::VectorXd out(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double denom = B.row(k).dot(p) + c(k);
        out(k) = denom > 0.0 ? a(k) * p(k) / denom : (a(k) * p(k) > 0.0 ? INFINITY : 0.0);
    }
    return out;
}

SinrAffineModel build_affine_model(const cellfree::SinrCoefficients& coeff) {
    const Eigen::Index K = coeff.signal_gain.size();
    require(coeff.interference.rows() == K && coeff.interference.cols() == K && coeff.self_term.size() == K &&
                coeff.noise_factor.size() == K,
            "build_affine_model: inconsistent coefficient shapes");
    SinrAffineModel m;
    m.a = coeff.signal_gain;
    m.B = coeff.interference;
    m.c = coeff.noise_factor;
    for (Eigen::Index k = 0; k < K; ++k) {
        const double scale = std::max(coeff.interference(k, k), coeff.self_term(k));
        m.B(k, k) -= coeff.self_term(k);
        if (m.B(k, k) < 0.0) {
            if (m.B(k, k) < -1e-9 * scale)
                throw InternalError("build_affine_model: self term exceeds the interference term for UE " +
                                    std::to_string(k));
            m.diagnostics.push_back("clamped B(" + std::to_string(k) + "," + std::to_string(k) + ") = " +
                                    std::to_string(m.B(k, k)) + " to 0");
            m.B(k, k) = 0.0;
        }
    }
    if ((m.B.array() < 0.0).any() || (m.c.array() < 0.0).any() || (m.a.array() < 0.0).any())
        throw InternalError("build_affine_model: negative coefficient");
    return m;
}

std::optional<Eigen::VectorXd> feasible_powers(const SinrAffineModel& model, double gamma, double p_max,
                                               std::size_t max_iters,
                                               const std::function<void(const Eigen::VectorXd&)>& observer) {
    const Eigen::Index K = model.a.size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
    if (observer) observer(p);
    for (std::size_t it = 0; it < max_iters; ++it) {
        Eigen::VectorXd next(K);
        for (Eigen::Index k = 0; k < K; ++k) next(k) = gamma * (model.B.row(k).dot(p) + model.c(k)) / model.a(k);
        if (observer) observer(next);
        // The sequence is nondecreasing, so once above the ceiling it stays there.
        if ((next.array() > p_max).any()) return std::nullopt;
        const double change = (next - p).cwiseAbs().maxCoeff();
        p = std::move(next);
        if (change <= 1e-13 * std::max(p.maxCoeff(), std::numeric_limits<double>::min())) return p;
    }
    return std::nullopt;
}

MaxMinResult maxmin_power_control(const SinrAffineModel& model, double p_max, const MaxMinOptions& opts) {
    const Eigen::Index K = model.a.size();
    require(K >= 1, "maxmin_power_control: empty model");
    require(p_max > 0.0 && std::isfinite(p_max), "maxmin_power_control: p_max must be positive");
    require(opts.tol > 0.0 && opts.tol < 0.1, "maxmin_power_control: tol must lie in (0, 0.1)");
    for (Eigen::Index k = 0; k < K; ++k)
        if (!(model.a(k) > 0.0))
            throw Infeasible("maxmin_power_control: UE " + std::to_string(k) + " has zero signal gain");

    // Full power is always feasible for its own minimum SINR.
    const Eigen::VectorXd full = Eigen::VectorXd::Constant(K, p_max);
    double lo = model.sinr(full).minCoeff();
    Eigen::VectorXd best = full;
    // Interference from other UEs only lowers SINR, so the single-user SINR at
    // p_max bounds every achievable common target.
    double hi = INFINITY;
    for (Eigen::Index k = 0; k < K; ++k) {
        const double denom = model.B(k, k) * p_max + model.c(k);
        hi = std::min(hi, denom > 0.0 ? model.a(k) * p_max / denom : INFINITY);
    }
    if (!std::isfinite(hi)) {
        // Noise-free, interference-free UE: grow the bracket until infeasible.
        hi = std::max(lo, 1.0);
        while (feasible_powers(model, hi, p_max, opts.max_fixed_point_iters)) hi *= 2.0;
    }

    MaxMinResult out;
    if (auto p = feasible_powers(model, lo, p_max, opts.max_fixed_point_iters)) best = *p;
    while (hi - lo > opts.tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (auto p = feasible_powers(model, mid, p_max, opts.max_fixed_point_iters)) {
            lo = mid;
            best = *p;
        } else {
            hi = mid;
        }
        ++out.bisection_steps;
    }
    out.allocation = {best, p_max};
    out.gamma = lo;
    out.gamma_upper = hi;
    return out;
}

} // namespace b5g::power
