#pragma once

#include <cstddef>
#include <vector>

#include "statsmerge/matrix.hpp"

namespace statsmerge {

inline constexpr double kDefaultSvdTol = 1e-10;

// Top-r singular values of m, non-negative, sorted descending. One-sided
// Jacobi (Hestenes) on the smaller-dimension side; only singular values are
// needed, never U or V. Each value is within tol (relative) of the truth.
std::vector<double> svd_values(const Matrix& m, std::size_t r, double tol = kDefaultSvdTol);

} // namespace statsmerge
