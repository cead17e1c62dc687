#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>

namespace b5g::linalg {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct SolveReport {
    bool regularized = false;
    double ridge = 0.0;
};

// Lower-triangular factor L with A = L L^H, or nullopt when a pivot is not
// strictly positive. Only the lower triangle of A is read.
std::optional<Matrix> cholesky(const Matrix& a);

// Solves A X = B for Hermitian positive-definite A via Cholesky. When the
// factorization fails, retries with A + ridge*I, ridge = 1e-12 * trace(A)/n,
// and records that in the report. Non-finite input throws InvalidArgument.
Matrix hermitian_solve(const Matrix& a, const Matrix& b, SolveReport* report = nullptr);
Vector hermitian_solve(const Matrix& a, const Vector& b, SolveReport* report = nullptr);

// log2 det(A) for Hermitian positive-definite A.
double log2_det_hpd(const Matrix& a);

bool all_finite(const Matrix& a);

} // namespace b5g::linalg
