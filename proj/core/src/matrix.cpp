#include "procaudit/matrix.hpp"

#include <cmath>
#include <string>

#include "procaudit/errors.hpp"

namespace procaudit {

Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: lhs is " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + ", rhs is " +
                         std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i).data();
        double* orow = out.row(i).data();
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k).data();
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    double sum = 0.0;
    for (double v : out.data) sum += v;
    if (!std::isfinite(sum)) {
        throw NumericError("matmul: non-finite value in product");
    }
    return out;
}

} // namespace procaudit
