#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace procaudit {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. The whole pipeline runs in 64-bit
// precision; the finite-difference gradient oracle depends on it.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
    std::span<double> row(std::size_t r) {
        return {data.data() + r * cols, cols};
    }
};

Matrix identity(std::size_t n);

// Standard product. Throws ShapeError naming both operand shapes when the
// inner dimensions disagree, NumericError if the result is not finite.
Matrix matmul(const Matrix& a, const Matrix& b);

} // namespace procaudit
