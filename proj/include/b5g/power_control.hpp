#pragma once

#include "b5g/cellfree.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace b5g::power {

struct PowerAllocation {
    Eigen::VectorXd p;
    double p_max = 0.0;
};

// SINR_k(p) = a_k p_k / (sum_i B_ki p_i + c_k), valid while the combining
// vectors behind the coefficients stay fixed.
struct SinrAffineModel {
    Eigen::VectorXd a;
    Eigen::MatrixXd B;
    Eigen::VectorXd c;
    std::vector<std::string> diagnostics;

    Eigen::VectorXd sinr(const Eigen::VectorXd& p) const;
};

// B_kk drops the coherent self term. Negative entries down to -1e-9 relative
// to the diagonal scale are treated as Monte-Carlo noise and clamped;
// anything worse throws InternalError.
SinrAffineModel build_affine_model(const cellfree::SinrCoefficients& coeff);

struct MaxMinOptions {
    double tol = 1e-4;
    std::size_t max_fixed_point_iters = 10000;
};

struct MaxMinResult {
    PowerAllocation allocation;
    double gamma = 0.0;         // certified feasible common target
    double gamma_upper = 0.0;   // bracket upper end at termination
    std::size_t bisection_steps = 0;
};

// Fixed-point feasibility test for target gamma: iterate
// p <- gamma (B p + c) / a from p = 0. Returns the limit when it stays within
// p_max and converges; nullopt otherwise. The observer, when set, sees every
// iterate.
std::optional<Eigen::VectorXd> feasible_powers(const SinrAffineModel& model, double gamma, double p_max,
                                               std::size_t max_iters = 10000,
                                               const std::function<void(const Eigen::VectorXd&)>& observer = {});

// Bisection on the common SINR target. Throws Infeasible if some a_k = 0.
MaxMinResult maxmin_power_control(const SinrAffineModel& model, double p_max, const MaxMinOptions& opts = {});

} // namespace b5g::power
