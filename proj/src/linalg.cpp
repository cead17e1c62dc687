#include "b5g/linalg.hpp"

#include "b5g/error.hpp"
#include "b5g/kernels.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace b5g::linalg {
namespace {

// Row-major packed factor so the inner products run over contiguous memory.
bool factor_rows(const Matrix& a, std::vector<cd>& l, Eigen::Index n) {
    l.assign(static_cast<std::size_t>(n * n), cd{0.0, 0.0});
    auto row = [&](Eigen::Index i) { return l.data() + i * n; };
    for (Eigen::Index j = 0; j < n; ++j) {
        std::span<const cd> lj(row(j), static_cast<std::size_t>(j));
        const double d = a(j, j).real() - simd::norm_sq(lj);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        row(j)[j] = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            std::span<const cd> li(row(i), static_cast<std::size_t>(j));
            // sum_k L(i,k) conj(L(j,k))
            const cd s = simd::cdotc(lj, li);
            row(i)[j] = (a(i, j) - s) / ljj;
        }
    }
    return true;
}

Matrix solve_with_rows(const std::vector<cd>& l, Eigen::Index n, const Matrix& b) {
    Matrix x = b;
    auto at = [&](Eigen::Index i, Eigen::Index j) { return l[static_cast<std::size_t>(i * n + j)]; };
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        // L y = b
        for (Eigen::Index i = 0; i < n; ++i) {
            cd s = x(i, c);
            for (Eigen::Index k = 0; k < i; ++k) s -= at(i, k) * x(k, c);
            x(i, c) = s / at(i, i);
        }
        // L^H x = y
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            cd s = x(i, c);
            for (Eigen::Index k = i + 1; k < n; ++k) s -= std::conj(at(k, i)) * x(k, c);
            x(i, c) = s / at(i, i);
        }
    }
    return x;
}

} // namespace

bool all_finite(const Matrix& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    return true;
}

std::optional<Matrix> cholesky(const Matrix& a) {
    require(a.rows() == a.cols(), "cholesky: matrix must be square");
    const Eigen::Index n = a.rows();
    std::vector<cd> rows;
    if (!factor_rows(a, rows, n)) return std::nullopt;
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = rows[static_cast<std::size_t>(i * n + j)];
    return l;
}

Matrix hermitian_solve(const Matrix& a, const Matrix& b, SolveReport* report) {
    require(a.rows() == a.cols(), "hermitian_solve: matrix must be square");
    require(b.rows() == a.rows(), "hermitian_solve: dimension mismatch");
    require(all_finite(a) && all_finite(b), "hermitian_solve: non-finite input");
    const Eigen::Index n = a.rows();
    std::vector<cd> rows;
    if (factor_rows(a, rows, n)) {
        if (report) *report = {};
        return solve_with_rows(rows, n, b);
    }
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) trace += a(i, i).real();
    double ridge = 1e-12 * std::abs(trace) / static_cast<double>(n);
    if (!(ridge > 0.0)) ridge = 1e-300;
    Matrix reg = a;
    // Grow the ridge until the factorization goes through.
    for (int attempt = 0; attempt < 64; ++attempt) {
        reg.diagonal() = a.diagonal().array() + ridge;
        if (factor_rows(reg, rows, n)) {
            if (report) *report = {true, ridge};
            return solve_with_rows(rows, n, b);
        }
        ridge *= 10.0;
    }
    throw InternalError("hermitian_solve: matrix is not positive semi-definite");
}

Vector hermitian_solve(const Matrix& a, const Vector& b, SolveReport* report) {
    Matrix bm = b;
    return hermitian_solve(a, bm, report).col(0);
}

double log2_det_hpd(const Matrix& a) {
    auto l = cholesky(a);
    if (!l) throw InvalidArgument("log2_det_hpd: matrix is not positive definite");
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log2((*l)(i, i).real());
    return 2.0 * s;
}

} // namespace b5g::linalg
