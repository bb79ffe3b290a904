#include "statsmerge/svd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "statsmerge/error.hpp"

namespace statsmerge {

namespace {

// Hestenes one-sided Jacobi: rotate column pairs of A until all pairs are
// orthogonal; the singular values are the final column norms. Cyclic sweeps,
// convergence when every off-diagonal inner product satisfies
// |a_p . a_q| <= tol * ||a_p|| * ||a_q||.
std::vector<double> jacobi_column_norms(Matrix a, double tol) {
    const std::size_t n = a.cols;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < a.rows; ++i) {
                    const double vp = a(i, p);
                    const double vq = a(i, q);
                    app += vp * vp;
                    aqq += vq * vq;
                    apq += vp * vq;
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) {
                    continue;
                }
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = std::copysign(1.0, zeta) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < a.rows; ++i) {
                    const double vp = a(i, p);
                    const double vq = a(i, q);
                    a(i, p) = c * vp - s * vq;
                    a(i, q) = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if (!rotated) {
            break;
        }
    }
    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) {
            sum += a(i, j) * a(i, j);
        }
        norms[j] = std::sqrt(sum);
    }
    return norms;
}

} // namespace

std::vector<double> svd_values(const Matrix& m, std::size_t r, double tol) {
    if (m.rows == 0 || m.cols == 0) {
        throw ParamError("svd_values: empty matrix");
    }
    if (!(tol > 0.0)) {
        throw ParamError("svd_values: tol must be > 0");
    }
    // Work with the column count on the smaller side; the singular values of
    // m and its transpose coincide. Requests past the rank limit pad with
    // zeros so callers always get r values back.
    std::vector<double> sv = (m.cols <= m.rows) ? jacobi_column_norms(m, tol)
                                                : jacobi_column_norms(transpose(m), tol);
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    sv.resize(r, 0.0);
    return sv;
}

} // namespace statsmerge
