#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace statsmerge {

// Dense row-major f64 matrix; the single carrier for weights, activations
// and gradients. Vectors (biases) are 1×n matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> data);

    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::size_t size() const { return rows * cols; }
    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
    bool operator==(const Matrix& other) const = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
double frobenius_norm(const Matrix& m);

// Row-wise softmax, numerically stabilized; every output row sums to 1.
Matrix softmax_rows(const Matrix& logits);
// softmax(logits / temperature) per row.
Matrix softmax_rows_tempered(const Matrix& logits, double temperature);

// Gather a row subset, in the order given.
Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& indices);

// Throws ShapeError when m contains NaN or Inf.
void ensure_finite(const Matrix& m, const char* what);

} // namespace statsmerge
