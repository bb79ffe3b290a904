#include "statsmerge/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statsmerge/error.hpp"

namespace statsmerge {

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), values(r * c, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> data) {
    Matrix m;
    m.rows = data.size();
    m.cols = data.begin() == data.end() ? 0 : data.begin()->size();
    m.values.reserve(m.rows * m.cols);
    for (const auto& row : data) {
        if (row.size() != m.cols) {
            throw ShapeError("ragged initializer rows");
        }
        m.values.insert(m.values.end(), row.begin(), row.end());
    }
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " * " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            const double* brow = &b.values[k * b.cols];
            double* orow = &out.values[i * out.cols];
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    ensure_finite(out, "matmul result");
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out(j, i) = m(i, j);
        }
    }
    return out;
}

double frobenius_norm(const Matrix& m) {
    double sum = 0.0;
    for (double v : m.values) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

Matrix softmax_rows(const Matrix& logits) {
    return softmax_rows_tempered(logits, 1.0);
}

Matrix softmax_rows_tempered(const Matrix& logits, double temperature) {
    if (temperature <= 0.0) {
        throw ParamError("softmax temperature must be > 0");
    }
    Matrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double maxv = -HUGE_VAL;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            maxv = std::max(maxv, logits(i, j) / temperature);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp(logits(i, j) / temperature - maxv);
            out(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) {
            out(i, j) /= denom;
        }
    }
    ensure_finite(out, "softmax result");
    return out;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= m.rows) {
            throw ShapeError("take_rows: index out of range");
        }
        std::copy_n(&m.values[indices[i] * m.cols], m.cols, &out.values[i * m.cols]);
    }
    return out;
}

void ensure_finite(const Matrix& m, const char* what) {
    for (double v : m.values) {
        if (!std::isfinite(v)) {
            throw ShapeError(std::string(what) + ": non-finite value");
        }
    }
}

} // namespace statsmerge
